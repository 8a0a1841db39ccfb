#include "hoferlab/hamiltonian.hpp"

#include "hoferlab/expr.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

namespace hoferlab {

TimeProfile TimeProfile::from_expression(const std::string& expr_text) {
    auto compiled = std::make_shared<Expression>(Expression::parse(expr_text, {"t"}));
    TimeProfile p;
    p.text = expr_text;
    p.fn = [compiled](double t) { return compiled->eval(t); };
    return p;
}

void HamiltonianImpl::gradient(double t, const double* x, double* g) const {
    int n = dim();
    double h = fd_step(x, n);
    double xs[kMaxDim];
    std::memcpy(xs, x, sizeof(double) * n);
    for (int i = 0; i < n; ++i) {
        double xi = xs[i];
        xs[i] = xi + h;
        double fp = value(t, xs);
        xs[i] = xi - h;
        double fm = value(t, xs);
        xs[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
}

double TimeDependentHamiltonian::support_leak(int samples_per_face) const {
    Box probe = support_.inflated(0.05 * support_.extent().maxCoeff());
    int n = dim();
    double worst = 0;
    uint64_t state = 0x9e3779b97f4a7c15ull;  // fixed stream; this is an audit, not a test oracle
    auto uniform = [&]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    Vec x(n);
    for (int axis = 0; axis < n; ++axis) {
        for (int side = 0; side < 2; ++side) {
            for (int s = 0; s < samples_per_face; ++s) {
                for (int i = 0; i < n; ++i)
                    x[i] = probe.lo[i] + uniform() * (probe.hi[i] - probe.lo[i]);
                x[axis] = side ? probe.hi[axis] : probe.lo[axis];
                for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
                    worst = std::max(worst, std::abs(impl_->value(t, x.data())));
            }
        }
    }
    return worst;
}

// --- Plateau ----------------------------------------------------------------

double Plateau::value(const double* x) const {
    double v = 1.0;
    for (int i = 0; i < inner.dim(); ++i) {
        double lo_ramp = inner.lo[i] - outer.lo[i];
        double hi_ramp = outer.hi[i] - inner.hi[i];
        double r;
        if (x[i] < inner.lo[i])
            r = smoothstep(1.0 - (inner.lo[i] - x[i]) / lo_ramp);
        else if (x[i] > inner.hi[i])
            r = smoothstep(1.0 - (x[i] - inner.hi[i]) / hi_ramp);
        else
            r = 1.0;
        if (r == 0.0) return 0.0;
        v *= r;
    }
    return v;
}

void Plateau::value_and_gradient(const double* x, double& v, double* g) const {
    int n = inner.dim();
    double factor[kMaxDim], dfactor[kMaxDim];
    for (int i = 0; i < n; ++i) {
        double lo_ramp = inner.lo[i] - outer.lo[i];
        double hi_ramp = outer.hi[i] - inner.hi[i];
        if (x[i] < inner.lo[i]) {
            double u = 1.0 - (inner.lo[i] - x[i]) / lo_ramp;
            factor[i] = smoothstep(u);
            dfactor[i] = smoothstep_deriv(u) / lo_ramp;
        } else if (x[i] > inner.hi[i]) {
            double u = 1.0 - (x[i] - inner.hi[i]) / hi_ramp;
            factor[i] = smoothstep(u);
            dfactor[i] = -smoothstep_deriv(u) / hi_ramp;
        } else {
            factor[i] = 1.0;
            dfactor[i] = 0.0;
        }
    }
    // prefix[i] = product of factors before i, suffix accumulated in reverse.
    double prefix[kMaxDim + 1];
    prefix[0] = 1.0;
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * factor[i];
    v = prefix[n];
    double suffix = 1.0;
    for (int i = n - 1; i >= 0; --i) {
        g[i] = prefix[i] * dfactor[i] * suffix;
        suffix *= factor[i];
    }
}

// --- Family implementations --------------------------------------------------

namespace {

class ZeroHam final : public HamiltonianImpl {
public:
    explicit ZeroHam(int dim) : dim_(dim) {}
    int dim() const override { return dim_; }
    double value(double, const double*) const override { return 0.0; }
    void gradient(double, const double*, double* g) const override {
        std::fill(g, g + dim_, 0.0);
    }
    bool analytic_gradient() const override { return true; }

private:
    int dim_;
};

class BumpHam final : public HamiltonianImpl {
public:
    BumpHam(Vec center, double radius, double height, TimeProfile profile)
        : center_(std::move(center)), radius_(radius), height_(height),
          profile_(std::move(profile)) {
        if (radius <= 0) throw std::invalid_argument("bump: radius must be positive");
    }
    int dim() const override { return static_cast<int>(center_.size()); }
    double value(double t, const double* x) const override {
        double r2 = 0;
        for (int i = 0; i < dim(); ++i) {
            double d = x[i] - center_[i];
            r2 += d * d;
        }
        return profile_(t) * height_ * smoothstep(1.0 - r2 / (radius_ * radius_));
    }
    void gradient(double t, const double* x, double* g) const override {
        double r2 = 0;
        for (int i = 0; i < dim(); ++i) {
            double d = x[i] - center_[i];
            r2 += d * d;
        }
        double u = 1.0 - r2 / (radius_ * radius_);
        double coef = -profile_(t) * height_ * smoothstep_deriv(u) * 2.0 / (radius_ * radius_);
        for (int i = 0; i < dim(); ++i) g[i] = coef * (x[i] - center_[i]);
    }
    bool analytic_gradient() const override { return true; }

private:
    Vec center_;
    double radius_, height_;
    TimeProfile profile_;
};

// (affine form) * plateau covers the coordinate, translation and custom
// linear families.
class AffinePlateauHam final : public HamiltonianImpl {
public:
    AffinePlateauHam(Vec alpha, double offset, Plateau plateau, TimeProfile profile)
        : alpha_(std::move(alpha)), offset_(offset), plateau_(std::move(plateau)),
          profile_(std::move(profile)) {}
    int dim() const override { return static_cast<int>(alpha_.size()); }
    double value(double t, const double* x) const override {
        double lin = offset_;
        for (int i = 0; i < dim(); ++i) lin += alpha_[i] * x[i];
        return profile_(t) * lin * plateau_.value(x);
    }
    void gradient(double t, const double* x, double* g) const override {
        double lin = offset_;
        for (int i = 0; i < dim(); ++i) lin += alpha_[i] * x[i];
        double chi;
        plateau_.value_and_gradient(x, chi, g);
        double p = profile_(t);
        for (int i = 0; i < dim(); ++i) g[i] = p * (lin * g[i] + alpha_[i] * chi);
    }
    bool analytic_gradient() const override { return true; }

private:
    Vec alpha_;
    double offset_;
    Plateau plateau_;
    TimeProfile profile_;
};

class QuadraticPlateauHam final : public HamiltonianImpl {
public:
    QuadraticPlateauHam(Vec center, double coef, Plateau plateau, TimeProfile profile)
        : center_(std::move(center)), coef_(coef), plateau_(std::move(plateau)),
          profile_(std::move(profile)) {}
    int dim() const override { return static_cast<int>(center_.size()); }
    double value(double t, const double* x) const override {
        double r2 = 0;
        for (int i = 0; i < dim(); ++i) {
            double d = x[i] - center_[i];
            r2 += d * d;
        }
        return profile_(t) * 0.5 * coef_ * r2 * plateau_.value(x);
    }
    void gradient(double t, const double* x, double* g) const override {
        double r2 = 0;
        for (int i = 0; i < dim(); ++i) {
            double d = x[i] - center_[i];
            r2 += d * d;
        }
        double chi;
        plateau_.value_and_gradient(x, chi, g);
        double p = profile_(t);
        for (int i = 0; i < dim(); ++i)
            g[i] = p * coef_ * (0.5 * r2 * g[i] + (x[i] - center_[i]) * chi);
    }
    bool analytic_gradient() const override { return true; }

private:
    Vec center_;
    double coef_;
    Plateau plateau_;
    TimeProfile profile_;
};

class FieldPlateauHam final : public HamiltonianImpl {
public:
    FieldPlateauHam(ScalarFieldPtr spatial, Plateau plateau, TimeProfile profile)
        : spatial_(std::move(spatial)), plateau_(std::move(plateau)),
          profile_(std::move(profile)) {}
    int dim() const override { return spatial_->dim(); }
    double value(double t, const double* x) const override {
        double chi = plateau_.value(x);
        if (chi == 0.0) return 0.0;
        return profile_(t) * spatial_->value(x) * chi;
    }

private:
    ScalarFieldPtr spatial_;
    Plateau plateau_;
    TimeProfile profile_;
};

class WrappedHam final : public HamiltonianImpl {
public:
    WrappedHam(int dim, std::function<double(double, const double*)> fn)
        : dim_(dim), fn_(std::move(fn)) {}
    int dim() const override { return dim_; }
    double value(double t, const double* x) const override { return fn_(t, x); }

private:
    int dim_;
    std::function<double(double, const double*)> fn_;
};

class LeafRestrictedHam final : public HamiltonianImpl {
public:
    LeafRestrictedHam(TimeDependentHamiltonian ambient, LeafChart leaf)
        : ambient_(std::move(ambient)), leaf_(std::move(leaf)) {}
    int dim() const override { return leaf_.dimension; }
    double value(double t, const double* u) const override {
        return ambient_.value(t, leaf_.embed(u));
    }

private:
    TimeDependentHamiltonian ambient_;
    LeafChart leaf_;
};

}  // namespace

namespace {
// Profiles constructed by TimeProfile::constant() keep the default text; a
// Hamiltonian built from one does not depend on t.
bool constant_profile(const TimeProfile& profile) { return profile.text == "1"; }
}  // namespace

TimeDependentHamiltonian zero_hamiltonian(int dim) {
    TimeDependentHamiltonian H{std::make_shared<ZeroHam>(dim), Box::cube(dim, 1.0), true, "zero"};
    return H.mark_autonomous();
}

TimeDependentHamiltonian bump_hamiltonian(const Vec& center, double radius, double height,
                                          TimeProfile profile) {
    Box support(center.array() - radius, center.array() + radius);
    bool autonomous = constant_profile(profile);
    TimeDependentHamiltonian H{std::make_shared<BumpHam>(center, radius, height,
                                                         std::move(profile)),
                               std::move(support), true, "bump"};
    return H.mark_autonomous(autonomous);
}

TimeDependentHamiltonian coordinate_plateau_hamiltonian(int dim, int index, double coefficient,
                                                        const Plateau& plateau,
                                                        TimeProfile profile) {
    if (index < 0 || index >= dim)
        throw std::invalid_argument("coordinate_plateau: index out of range");
    Vec alpha = Vec::Zero(dim);
    alpha[index] = coefficient;
    bool autonomous = constant_profile(profile);
    TimeDependentHamiltonian H{std::make_shared<AffinePlateauHam>(alpha, 0.0, plateau,
                                                                  std::move(profile)),
                               plateau.outer, true, "coordinate_plateau"};
    return H.mark_autonomous(autonomous);
}

TimeDependentHamiltonian translation_hamiltonian(const PoissonStructure& P, const Vec& velocity,
                                                 const Vec& anchor, const Plateau& plateau,
                                                 TimeProfile profile) {
    if (!P.constant_bivector())
        throw std::invalid_argument("translation family needs a constant bivector");
    int n = P.dim();
    if (velocity.size() != n || anchor.size() != n)
        throw std::invalid_argument("translation family: dimension mismatch");
    Mat L = P.bivector(Vec::Zero(n));
    // Solve sharp(alpha) = velocity, i.e. L^T alpha = velocity.
    Eigen::FullPivLU<Mat> lu(L.transpose());
    if (lu.rank() < n)
        throw std::invalid_argument("translation family needs an invertible bivector");
    Vec alpha = lu.solve(velocity);
    double offset = -alpha.dot(anchor);
    bool autonomous = constant_profile(profile);
    TimeDependentHamiltonian H{std::make_shared<AffinePlateauHam>(alpha, offset, plateau,
                                                                  std::move(profile)),
                               plateau.outer, true, "translation"};
    return H.mark_autonomous(autonomous);
}

TimeDependentHamiltonian rotation_hamiltonian(const Vec& center, double angular_velocity,
                                              const Plateau& plateau, TimeProfile profile) {
    bool autonomous = constant_profile(profile);
    TimeDependentHamiltonian H{std::make_shared<QuadraticPlateauHam>(center, angular_velocity,
                                                                     plateau, std::move(profile)),
                               plateau.outer, true, "rotation"};
    return H.mark_autonomous(autonomous);
}

TimeDependentHamiltonian custom_hamiltonian(int dim, const std::string& expr_text,
                                            const Plateau& plateau, TimeProfile profile) {
    return field_times_plateau(expression_field(dim, expr_text), plateau, std::move(profile),
                               "custom");
}

TimeDependentHamiltonian field_times_plateau(ScalarFieldPtr spatial, const Plateau& plateau,
                                             TimeProfile profile, std::string name) {
    if (spatial->dim() != plateau.inner.dim())
        throw std::invalid_argument("field_times_plateau: dimension mismatch");
    bool autonomous = constant_profile(profile);
    TimeDependentHamiltonian H{std::make_shared<FieldPlateauHam>(std::move(spatial), plateau,
                                                                 std::move(profile)),
                               plateau.outer, true, std::move(name)};
    return H.mark_autonomous(autonomous);
}

TimeDependentHamiltonian wrap_hamiltonian(int dim,
                                          std::function<double(double, const double*)> value,
                                          Box support, bool compact, std::string name) {
    return {std::make_shared<WrappedHam>(dim, std::move(value)), std::move(support), compact,
            std::move(name)};
}

TimeDependentHamiltonian restrict_to_leaf(const TimeDependentHamiltonian& F,
                                          const LeafChart& leaf) {
    if (leaf.dimension <= 0)
        throw std::invalid_argument("restrict_to_leaf: leaf must be positive-dimensional");
    if (!leaf.has_affine_chart)
        throw NotImplementedError("restrict_to_leaf: no leaf coordinates for this structure");
    int k = leaf.dimension;
    Vec lo(k), hi(k);
    for (int a = 0; a < k; ++a) {
        lo[a] = F.support().lo[leaf.axes[a]];
        hi[a] = F.support().hi[leaf.axes[a]];
    }
    TimeDependentHamiltonian H{std::make_shared<LeafRestrictedHam>(F, leaf), Box(lo, hi), true,
                               F.name() + "|leaf"};
    return H.mark_autonomous(F.autonomous());
}

}  // namespace hoferlab
