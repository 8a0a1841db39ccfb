#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hoferlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Charts are capped at this dimension so hot loops can use stack buffers.
constexpr int kMaxDim = 16;

// Central-difference step used whenever a gradient has no closed form.
inline double fd_step(const double* x, int n) {
    double norm2 = 0;
    for (int i = 0; i < n; ++i) norm2 += x[i] * x[i];
    return 1e-5 * (1.0 + std::sqrt(norm2));
}

struct IntegrationError : std::runtime_error {
    double time;
    Vec state;
    IntegrationError(const std::string& what, double t, Vec x)
        : std::runtime_error(what), time(t), state(std::move(x)) {}
};

struct NotImplementedError : std::logic_error {
    using std::logic_error::logic_error;
};

// Axis-aligned box, the footprint type for supports, charts and grids.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo.size() != hi.size())
            throw std::invalid_argument("box: lo/hi dimension mismatch");
        for (int i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i]))
                throw std::invalid_argument("box: lo > hi on axis " + std::to_string(i));
    }

    static Box cube(int dim, double half_width) {
        return Box(Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width));
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const double* x) const {
        for (int i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
    bool contains(const Vec& x) const { return contains(x.data()); }

    Box inflated(double pad) const {
        return Box(lo.array() - pad, hi.array() + pad);
    }

    // Smallest box containing both operands.
    static Box hull(const Box& a, const Box& b) {
        return Box(a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi));
    }

    Vec center() const { return 0.5 * (lo + hi); }
    Vec extent() const { return hi - lo; }
};

// Ball or box region of a chart; radius 0 encodes the empty region.
struct Region {
    enum class Kind { Ball, BoxKind };
    Kind kind = Kind::Ball;
    Vec center;
    double radius = 0.0;
    Box box;

    static Region ball(Vec c, double r) {
        if (r < 0) throw std::invalid_argument("region: negative radius");
        Region u;
        u.kind = Kind::Ball;
        u.center = std::move(c);
        u.radius = r;
        return u;
    }
    static Region from_box(Box b) {
        Region u;
        u.kind = Kind::BoxKind;
        u.box = std::move(b);
        u.center = u.box.center();
        return u;
    }

    int dim() const {
        return kind == Kind::Ball ? static_cast<int>(center.size()) : box.dim();
    }

    bool empty() const {
        if (kind == Kind::Ball) return radius == 0.0;
        return (box.hi - box.lo).minCoeff() == 0.0;
    }

    // Positive outside, negative inside, zero on the boundary.
    double signed_distance(const Vec& x) const {
        if (kind == Kind::Ball) return (x - center).norm() - radius;
        double inside = -std::numeric_limits<double>::infinity();
        double outside2 = 0.0;
        bool out = false;
        for (int i = 0; i < box.dim(); ++i) {
            double lo_gap = box.lo[i] - x[i];
            double hi_gap = x[i] - box.hi[i];
            double gap = std::max(lo_gap, hi_gap);
            if (gap > 0) {
                out = true;
                outside2 += gap * gap;
            } else {
                inside = std::max(inside, gap);
            }
        }
        return out ? std::sqrt(outside2) : inside;
    }

    Box bounding() const {
        if (kind == Kind::BoxKind) return box;
        return Box(center.array() - radius, center.array() + radius);
    }
};

// Quintic smoothstep: 0 below 0, 1 above 1, C^2 across both edges.
inline double smoothstep(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}
inline double smoothstep_deriv(double u) {
    if (u <= 0 || u >= 1) return 0;
    return u * u * (30.0 + u * (-60.0 + 30.0 * u));
}

}  // namespace hoferlab
