#pragma once

#include "hoferlab/hamiltonian.hpp"

#include <functional>
#include <memory>

namespace hoferlab {

struct IntegratorSpec {
    enum class Method { RK45, RK4 };
    Method method = Method::RK45;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    long max_steps = 1'000'000;
    int rk4_steps = 256;  // fixed-step count over the whole requested span

    static IntegratorSpec adaptive(double tol = 1e-10) {
        IntegratorSpec s;
        s.method = Method::RK45;
        s.abs_tol = s.rel_tol = tol;
        return s;
    }
    // Fixed-step RK4: the numerical flow is a smooth map of the initial
    // condition, which keeps finite differences through it well behaved.
    static IntegratorSpec fixed(int steps = 256) {
        IntegratorSpec s;
        s.method = Method::RK4;
        s.rk4_steps = steps;
        return s;
    }
};

// Hamiltonian isotopy: the flow of x' = sharp(d_x F(t, x)).  Stateless apart
// from its ingredients; every evaluation integrates from scratch.
class Isotopy {
public:
    Isotopy() = default;
    Isotopy(PoissonStructure P, TimeDependentHamiltonian F, IntegratorSpec spec = {});

    const PoissonStructure& structure() const { return P_; }
    const TimeDependentHamiltonian& hamiltonian() const { return F_; }
    const IntegratorSpec& spec() const { return spec_; }

    // phi^t(x0); phi^0 is the identity exactly.
    Vec evaluate(double t, const Vec& x0) const { return flow_between(0.0, t, x0); }
    // (phi^t)^{-1}(x), by integrating the same field from time t back to 0.
    Vec evaluate_inverse(double t, const Vec& x) const { return flow_between(t, 0.0, x); }
    // Solves from (t0, x) to time t1.
    Vec flow_between(double t0, double t1, const Vec& x) const;

    // Right-hand side at (t, x); exposed for field-level checks.
    void field(double t, const double* x, double* dx) const;
    Vec field(double t, const Vec& x) const {
        Vec dx(P_.dim());
        field(t, x.data(), dx.data());
        return dx;
    }

private:
    PoissonStructure P_;
    TimeDependentHamiltonian F_;
    IntegratorSpec spec_;
};

// Time-1 Poisson automorphism, stored as the endpoint of an isotopy.
class PoissonAutomorphism {
public:
    static PoissonAutomorphism identity(int dim);
    static PoissonAutomorphism time_one(Isotopy iso);

    int dim() const { return dim_; }
    bool is_identity() const { return iso_ == nullptr; }
    Vec apply(const Vec& x) const { return iso_ ? iso_->evaluate(1.0, x) : x; }
    Vec apply_inverse(const Vec& x) const { return iso_ ? iso_->evaluate_inverse(1.0, x) : x; }
    const Isotopy* generator() const { return iso_.get(); }

private:
    std::shared_ptr<const Isotopy> iso_;
    int dim_ = 0;
};

// Default integrator for flows nested inside Hamiltonian evaluators; see
// IntegratorSpec::fixed for why these are fixed-step.
inline IntegratorSpec inner_flow_spec() { return IntegratorSpec::fixed(256); }

// (F # H)(t, x) = F(t, x) + H(t, (phi_F^t)^{-1}(x)); generates t -> phi_F^t o phi_H^t.
TimeDependentHamiltonian compose_hamiltonians(const PoissonStructure& P,
                                              const TimeDependentHamiltonian& F,
                                              const TimeDependentHamiltonian& H,
                                              IntegratorSpec inner = inner_flow_spec());

// F_bar(t, x) = -F(t, phi_F^t(x)); generates t -> (phi_F^t)^{-1}.
TimeDependentHamiltonian inverse_hamiltonian(const PoissonStructure& P,
                                             const TimeDependentHamiltonian& F,
                                             IntegratorSpec inner = inner_flow_spec());

// (f * F)(t, x) = F(t, f(x)); generates t -> f^{-1} o phi_F^t o f.
TimeDependentHamiltonian pullback_hamiltonian(const PoissonStructure& P,
                                              const PoissonAutomorphism& f,
                                              const TimeDependentHamiltonian& F);

// Monotone time substitution sigma: [0,1] -> [0,1] with endpoint values 0, 1.
struct TimeReparam {
    std::function<double(double)> sigma;
    std::function<double(double)> dsigma;
    std::string name;

    void validate() const;

    static TimeReparam identity();
    static TimeReparam square();       // sigma(t) = t^2
    static TimeReparam cosine_step();  // sigma(t) = (1 - cos(pi t)) / 2
    // Constant on [0, delta] and [1 - delta, 1], smoothstep in between.
    static TimeReparam boundary_flat(double delta);
};

// F^sigma(t, x) = sigma'(t) * F(sigma(t), x): same path of the flow, same
// length, traversed on the reparametrized clock.
TimeDependentHamiltonian reparametrize(const TimeDependentHamiltonian& F, const TimeReparam& s);

// reparametrize with boundary_flat(delta): the generated isotopy is
// stationary near t = 0 and t = 1 with unchanged endpoint.
TimeDependentHamiltonian flatten_boundary(const TimeDependentHamiltonian& F, double delta);

// Max displacement sup_t |phi^t(x) - x| over sampled points of `box`
// (corners plus a low-discrepancy batch), for support transport estimates.
double estimate_max_displacement(const Isotopy& iso, const Box& box, int samples = 64);

// Conservative box containing phi^t(box) for t in [0,1].
Box transported_support(const Isotopy& iso, const Box& box);

}  // namespace hoferlab
