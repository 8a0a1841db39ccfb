#pragma once

#include "hoferlab/poisson.hpp"

#include <functional>
#include <memory>
#include <string>

namespace hoferlab {

// Time profile multiplying a spatial Hamiltonian; fn must be defined on [0,1].
struct TimeProfile {
    std::function<double(double)> fn;
    std::string text = "1";

    static TimeProfile constant() {
        return {[](double) { return 1.0; }, "1"};
    }
    static TimeProfile from_expression(const std::string& expr_text);  // variable t
    double operator()(double t) const { return fn ? fn(t) : 1.0; }
};

class HamiltonianImpl {
public:
    virtual ~HamiltonianImpl() = default;
    virtual int dim() const = 0;
    virtual double value(double t, const double* x) const = 0;
    // Spatial gradient; defaults to central differences of value().
    virtual void gradient(double t, const double* x, double* g) const;
    virtual bool analytic_gradient() const { return false; }
};

// Compactly supported time-dependent Hamiltonian F(t, x), t in [0,1].
// Outside the declared support box the value and gradient are exactly zero,
// which keeps such points exact fixed points of the flow.  Lifted
// Hamiltonians on groupoid charts set compact = false and skip that clamp.
class TimeDependentHamiltonian {
public:
    TimeDependentHamiltonian() = default;
    TimeDependentHamiltonian(std::shared_ptr<const HamiltonianImpl> impl, Box support,
                             bool compact, std::string name)
        : impl_(std::move(impl)), support_(std::move(support)), compact_(compact),
          name_(std::move(name)) {
        if (support_.dim() != impl_->dim())
            throw std::invalid_argument("hamiltonian: support box dimension mismatch");
    }

    bool valid() const { return impl_ != nullptr; }
    int dim() const { return impl_->dim(); }
    const Box& support() const { return support_; }
    bool compact() const { return compact_; }
    const std::string& name() const { return name_; }
    bool analytic_gradient() const { return impl_->analytic_gradient(); }

    // True when value(t, x) does not depend on t; lets integral norms reuse a
    // single time slice.  Opt in only, set by factories that can guarantee it.
    bool autonomous() const { return autonomous_; }
    TimeDependentHamiltonian& mark_autonomous(bool flag = true) {
        autonomous_ = flag;
        return *this;
    }

    double value(double t, const double* x) const {
        if (compact_ && !support_.contains(x)) return 0.0;
        return impl_->value(t, x);
    }
    double value(double t, const Vec& x) const { return value(t, x.data()); }

    void gradient(double t, const double* x, double* g) const {
        if (compact_ && !support_.contains(x)) {
            std::fill(g, g + dim(), 0.0);
            return;
        }
        impl_->gradient(t, x, g);
    }
    Vec gradient(double t, const Vec& x) const {
        Vec g(dim());
        gradient(t, x.data(), g.data());
        return g;
    }

    // Largest |F(t, x)| over boundary samples of the 5%-inflated support box;
    // a cheap audit that the declared box really contains the support.
    double support_leak(int samples_per_face = 64) const;

private:
    std::shared_ptr<const HamiltonianImpl> impl_;
    Box support_;
    bool autonomous_ = false;
    bool compact_ = true;
    std::string name_;
};

// Box plateau: 1 on `inner`, 0 outside `inner` inflated by `ramp`, quintic
// smoothstep in between (C^2).
struct Plateau {
    Box inner, outer;

    Plateau() = default;
    Plateau(Box inner_box, double ramp) : inner(std::move(inner_box)), outer(inner.inflated(ramp)) {
        if (ramp <= 0) throw std::invalid_argument("plateau: ramp width must be positive");
    }

    double value(const double* x) const;
    void value_and_gradient(const double* x, double& v, double* g) const;
};

// --- Built-in families ------------------------------------------------------

TimeDependentHamiltonian zero_hamiltonian(int dim);

// height * S(1 - |x-center|^2 / radius^2): radial C^2 bump, max = height.
TimeDependentHamiltonian bump_hamiltonian(const Vec& center, double radius, double height,
                                          TimeProfile profile = TimeProfile::constant());

// coefficient * x_index * plateau.
TimeDependentHamiltonian coordinate_plateau_hamiltonian(int dim, int index, double coefficient,
                                                        const Plateau& plateau,
                                                        TimeProfile profile = TimeProfile::constant());

// <alpha, x - anchor> * plateau with alpha chosen so the flow inside the
// plateau is the constant field `velocity`; requires an invertible bivector
// (constant over the chart).
TimeDependentHamiltonian translation_hamiltonian(const PoissonStructure& P, const Vec& velocity,
                                                 const Vec& anchor, const Plateau& plateau,
                                                 TimeProfile profile = TimeProfile::constant());

// angular_velocity * |x - center|^2 / 2 * plateau on a symplectic plane:
// rotation about `center` inside the plateau.
TimeDependentHamiltonian rotation_hamiltonian(const Vec& center, double angular_velocity,
                                              const Plateau& plateau,
                                              TimeProfile profile = TimeProfile::constant());

// Expression over x1..xn times a plateau; finite-difference gradients.
TimeDependentHamiltonian custom_hamiltonian(int dim, const std::string& expr_text,
                                            const Plateau& plateau,
                                            TimeProfile profile = TimeProfile::constant());

// Scalar field times plateau (general hook used by the family registry).
TimeDependentHamiltonian field_times_plateau(ScalarFieldPtr spatial, const Plateau& plateau,
                                             TimeProfile profile, std::string name);

// Wraps an arbitrary evaluator; used by the flow-algebra operations.
TimeDependentHamiltonian wrap_hamiltonian(int dim,
                                          std::function<double(double, const double*)> value,
                                          Box support, bool compact, std::string name);

// F restricted to a positive-dimensional leaf with an affine chart: a
// Hamiltonian in the leaf coordinates u -> F(t, embed(u)).  The support box
// is the trace of F's box on the leaf axes.
TimeDependentHamiltonian restrict_to_leaf(const TimeDependentHamiltonian& F, const LeafChart& leaf);

}  // namespace hoferlab
