#include "hoferlab/flows.hpp"

#include "hoferlab/halton.hpp"

#include <cmath>
#include <cstring>

namespace hoferlab {

Isotopy::Isotopy(PoissonStructure P, TimeDependentHamiltonian F, IntegratorSpec spec)
    : P_(std::move(P)), F_(std::move(F)), spec_(spec) {
    if (P_.dim() != F_.dim())
        throw std::invalid_argument("isotopy: structure and Hamiltonian dimensions differ");
}

void Isotopy::field(double t, const double* x, double* dx) const {
    int n = P_.dim();
    if (F_.compact() && !F_.support().contains(x)) {
        std::fill(dx, dx + n, 0.0);
        return;
    }
    double g[kMaxDim];
    F_.gradient(t, x, g);
    P_.sharp_apply(x, g, dx);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat: weights of the embedded error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Vec Isotopy::flow_between(double t0, double t1, const Vec& x) const {
    int n = P_.dim();
    if (x.size() != n) throw std::invalid_argument("isotopy: point dimension mismatch");
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) throw std::domain_error("isotopy: non-finite point");
    if (t0 == t1) return x;

    double y[kMaxDim];
    std::memcpy(y, x.data(), sizeof(double) * n);

    if (spec_.method == IntegratorSpec::Method::RK4) {
        int steps = std::max(1, spec_.rk4_steps);
        double h = (t1 - t0) / steps;
        double k1[kMaxDim], k2[kMaxDim], k3[kMaxDim], k4[kMaxDim], tmp[kMaxDim];
        for (int s = 0; s < steps; ++s) {
            double t = t0 + s * h;
            field(t, y, k1);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            field(t + 0.5 * h, tmp, k2);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            field(t + 0.5 * h, tmp, k3);
            for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
            field(t + h, tmp, k4);
            for (int i = 0; i < n; ++i)
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        return Eigen::Map<Vec>(y, n);
    }

    // Adaptive Dormand-Prince with FSAL.
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double t = t0;
    double h = dir * std::min(0.05, std::abs(t1 - t0));
    double k1[kMaxDim], k2[kMaxDim], k3[kMaxDim], k4[kMaxDim], k5[kMaxDim], k6[kMaxDim],
        k7[kMaxDim], tmp[kMaxDim], ynew[kMaxDim];
    bool have_k1 = false;
    long steps = 0;
    while ((t1 - t) * dir > 0) {
        if (++steps > spec_.max_steps)
            throw IntegrationError("isotopy: step budget exhausted", t, Eigen::Map<Vec>(y, n));
        if (std::abs(h) < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw IntegrationError("isotopy: step size underflow", t, Eigen::Map<Vec>(y, n));
        if ((t + h - t1) * dir > 0) {
            h = t1 - t;
            have_k1 = false;  // stage times change, refresh the cached slope
        }

        if (!have_k1) field(t, y, k1);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        field(t + c2 * h, tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        field(t + c3 * h, tmp, k3);
        for (int i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        field(t + c4 * h, tmp, k4);
        for (int i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        field(t + c5 * h, tmp, k5);
        for (int i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        field(t + h, tmp, k6);
        for (int i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        field(t + h, ynew, k7);

        double err = 0;
        for (int i = 0; i < n; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
            double sc = spec_.abs_tol +
                        spec_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double q = e / sc;
            err += q * q;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            t += h;
            std::memcpy(y, ynew, sizeof(double) * n);
            std::memcpy(k1, k7, sizeof(double) * n);
            have_k1 = true;
            double grow = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            // k1 is still valid at unchanged (t, y).
        }
    }
    return Eigen::Map<Vec>(y, n);
}

PoissonAutomorphism PoissonAutomorphism::identity(int dim) {
    PoissonAutomorphism f;
    f.dim_ = dim;
    return f;
}

PoissonAutomorphism PoissonAutomorphism::time_one(Isotopy iso) {
    PoissonAutomorphism f;
    f.dim_ = iso.structure().dim();
    f.iso_ = std::make_shared<Isotopy>(std::move(iso));
    return f;
}

// --- Support transport ------------------------------------------------------

double estimate_max_displacement(const Isotopy& iso, const Box& box, int samples) {
    int n = box.dim();
    std::vector<Vec> probes;
    if (n <= 6) {
        for (long mask = 0; mask < (1L << n); ++mask) {
            Vec c(n);
            for (int i = 0; i < n; ++i) c[i] = (mask >> i) & 1 ? box.hi[i] : box.lo[i];
            probes.push_back(c);
        }
    }
    Halton seq(n, 7);
    for (int s = 0; s < samples; ++s) probes.push_back(seq.next_in_box(box));

    double worst = 0;
    for (const Vec& p : probes) {
        Vec x = p;
        double t = 0;
        for (double tn : {0.25, 0.5, 0.75, 1.0}) {
            x = iso.flow_between(t, tn, x);
            t = tn;
            worst = std::max(worst, (x - p).norm());
        }
    }
    return worst;
}

Box transported_support(const Isotopy& iso, const Box& box) {
    double pad = estimate_max_displacement(iso, box);
    return box.inflated(1.05 * pad + 1e-3);
}

// --- Hamiltonian algebra ----------------------------------------------------

TimeDependentHamiltonian compose_hamiltonians(const PoissonStructure& P,
                                              const TimeDependentHamiltonian& F,
                                              const TimeDependentHamiltonian& H,
                                              IntegratorSpec inner) {
    if (F.dim() != P.dim() || H.dim() != P.dim())
        throw std::invalid_argument("compose: dimension mismatch");
    auto isoF = std::make_shared<Isotopy>(P, F, inner);
    Box support = transported_support(*isoF, Box::hull(F.support(), H.support()));
    auto value = [isoF, F, H](double t, const double* x) {
        double v = F.value(t, x);
        if (t == 0.0) return v + H.value(0.0, x);
        Vec xv = Eigen::Map<const Vec>(x, F.dim());
        return v + H.value(t, isoF->evaluate_inverse(t, xv));
    };
    return wrap_hamiltonian(P.dim(), value, support, F.compact() && H.compact(),
                            F.name() + "#" + H.name());
}

TimeDependentHamiltonian inverse_hamiltonian(const PoissonStructure& P,
                                             const TimeDependentHamiltonian& F,
                                             IntegratorSpec inner) {
    if (F.dim() != P.dim()) throw std::invalid_argument("inverse: dimension mismatch");
    auto isoF = std::make_shared<Isotopy>(P, F, inner);
    Box support = transported_support(*isoF, F.support());
    auto value = [isoF, F](double t, const double* x) {
        if (t == 0.0) return -F.value(0.0, x);
        Vec xv = Eigen::Map<const Vec>(x, F.dim());
        return -F.value(t, isoF->evaluate(t, xv));
    };
    return wrap_hamiltonian(P.dim(), value, support, F.compact(), F.name() + "~");
}

TimeDependentHamiltonian pullback_hamiltonian(const PoissonStructure& P,
                                              const PoissonAutomorphism& f,
                                              const TimeDependentHamiltonian& F) {
    if (F.dim() != P.dim() || f.dim() != P.dim())
        throw std::invalid_argument("pullback: dimension mismatch");
    Box support = F.support();
    if (!f.is_identity()) {
        const Isotopy& gen = *f.generator();
        support = transported_support(gen, Box::hull(F.support(), gen.hamiltonian().support()));
    }
    auto value = [f, F](double t, const double* x) {
        Vec xv = Eigen::Map<const Vec>(x, F.dim());
        return F.value(t, f.apply(xv));
    };
    return wrap_hamiltonian(P.dim(), value, support, F.compact(), "pullback(" + F.name() + ")");
}

// --- Time reparametrization ---------------------------------------------------

void TimeReparam::validate() const {
    if (!sigma || !dsigma) throw std::invalid_argument("reparametrization: missing callbacks");
    if (std::abs(sigma(0.0)) > 1e-12 || std::abs(sigma(1.0) - 1.0) > 1e-12)
        throw std::invalid_argument("reparametrization must map 0 -> 0 and 1 -> 1");
    for (int k = 0; k <= 64; ++k) {
        double t = k / 64.0;
        double d = dsigma(t);
        if (d < -1e-9)
            throw std::invalid_argument("reparametrization must be non-decreasing");
        if (k > 0 && k < 64) {
            double fd = (sigma(t + 1e-6) - sigma(t - 1e-6)) / 2e-6;
            if (std::abs(fd - d) > 1e-4 * (1.0 + std::abs(d)))
                throw std::invalid_argument("reparametrization derivative is inconsistent");
        }
    }
}

TimeReparam TimeReparam::identity() {
    return {[](double t) { return t; }, [](double) { return 1.0; }, "identity"};
}
TimeReparam TimeReparam::square() {
    return {[](double t) { return t * t; }, [](double t) { return 2.0 * t; }, "square"};
}
TimeReparam TimeReparam::cosine_step() {
    return {[](double t) { return 0.5 * (1.0 - std::cos(M_PI * t)); },
            [](double t) { return 0.5 * M_PI * std::sin(M_PI * t); }, "cosine"};
}
TimeReparam TimeReparam::boundary_flat(double delta) {
    if (!(delta > 0 && delta < 0.5))
        throw std::invalid_argument("boundary_flat: delta must lie in (0, 0.5)");
    double w = 1.0 - 2.0 * delta;
    return {[delta, w](double t) { return smoothstep((t - delta) / w); },
            [delta, w](double t) { return smoothstep_deriv((t - delta) / w) / w; },
            "boundary_flat"};
}

namespace {

class ReparamHam final : public HamiltonianImpl {
public:
    ReparamHam(TimeDependentHamiltonian F, TimeReparam s) : F_(std::move(F)), s_(std::move(s)) {}
    int dim() const override { return F_.dim(); }
    double value(double t, const double* x) const override {
        double rate = s_.dsigma(t);
        if (rate == 0.0) return 0.0;
        return rate * F_.value(s_.sigma(t), x);
    }
    void gradient(double t, const double* x, double* g) const override {
        double rate = s_.dsigma(t);
        if (rate == 0.0) {
            std::fill(g, g + dim(), 0.0);
            return;
        }
        F_.gradient(s_.sigma(t), x, g);
        for (int i = 0; i < dim(); ++i) g[i] *= rate;
    }
    bool analytic_gradient() const override { return F_.analytic_gradient(); }

private:
    TimeDependentHamiltonian F_;
    TimeReparam s_;
};

}  // namespace

TimeDependentHamiltonian reparametrize(const TimeDependentHamiltonian& F, const TimeReparam& s) {
    s.validate();
    return {std::make_shared<ReparamHam>(F, s), F.support(), F.compact(),
            F.name() + "@" + s.name};
}

TimeDependentHamiltonian flatten_boundary(const TimeDependentHamiltonian& F, double delta) {
    return reparametrize(F, TimeReparam::boundary_flat(delta));
}

}  // namespace hoferlab
