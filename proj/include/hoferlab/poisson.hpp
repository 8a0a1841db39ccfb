#pragma once

#include "hoferlab/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hoferlab {

// Time-independent scalar function on a chart.  Gradient falls back to
// central differences with step fd_step() unless a subclass provides one.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual int dim() const = 0;
    virtual double value(const double* x) const = 0;
    virtual void gradient(const double* x, double* g) const;
    virtual bool analytic_gradient() const { return false; }

    double value(const Vec& x) const { return value(x.data()); }
    Vec gradient(const Vec& x) const {
        Vec g(dim());
        gradient(x.data(), g.data());
        return g;
    }
};
using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

ScalarFieldPtr coordinate_field(int dim, int index);
ScalarFieldPtr constant_field(int dim, double value);
// Variables x1..xn.
ScalarFieldPtr expression_field(int dim, const std::string& text);
ScalarFieldPtr lambda_field(int dim, std::function<double(const double*)> fn);

struct Covector {
    Vec point, components;
};
struct TangentVector {
    Vec point, components;
};

class PoissonStructureImpl {
public:
    virtual ~PoissonStructureImpl() = default;
    virtual int dim() const = 0;
    virtual std::string label() const = 0;
    // Writes the n-by-n bivector matrix at x, row-major.  Implementations
    // must produce exactly antisymmetric entries.
    virtual void fill(const double* x, double* m) const = 0;
    // out_j = sum_i alpha_i * L_ij(x); overridden where a closed form is cheap.
    virtual void sharp_apply(const double* x, const double* alpha, double* out) const;
    virtual std::vector<ScalarFieldPtr> casimirs() const { return {}; }
    virtual bool constant_bivector() const { return false; }
    // Coordinate axes spanning the (affine) leaf through x; empty when the
    // structure has no affine leaf description.
    virtual std::vector<int> leaf_axes(const double* x) const { return {}; }
    virtual bool leaves_proper() const { return false; }
};

// Value-semantic handle; cheap to copy, immutable.
class PoissonStructure {
public:
    PoissonStructure() = default;
    PoissonStructure(std::shared_ptr<const PoissonStructureImpl> impl, Box chart)
        : impl_(std::move(impl)), chart_(std::move(chart)) {}

    bool valid() const { return impl_ != nullptr; }
    int dim() const { return impl_->dim(); }
    std::string label() const { return impl_->label(); }
    const Box& chart_box() const { return chart_; }

    void bivector_into(const double* x, double* m) const { impl_->fill(x, m); }
    Mat bivector(const Vec& x) const {
        Mat m(dim(), dim());
        // Implementations write row-major; copy entry-wise into the Eigen matrix.
        double buf[kMaxDim * kMaxDim];
        impl_->fill(x.data(), buf);
        for (int i = 0; i < dim(); ++i)
            for (int j = 0; j < dim(); ++j) m(i, j) = buf[i * dim() + j];
        return m;
    }
    void sharp_apply(const double* x, const double* alpha, double* out) const {
        impl_->sharp_apply(x, alpha, out);
    }
    std::vector<ScalarFieldPtr> casimirs() const { return impl_->casimirs(); }
    bool constant_bivector() const { return impl_->constant_bivector(); }
    std::vector<int> leaf_axes(const Vec& x) const { return impl_->leaf_axes(x.data()); }
    bool leaves_proper() const { return impl_->leaves_proper(); }

    PoissonStructure with_chart(Box chart) const { return {impl_, std::move(chart)}; }

private:
    std::shared_ptr<const PoissonStructureImpl> impl_;
    Box chart_;
};

// Built-in structures.
PoissonStructure make_standard_symplectic(int n_pairs);  // "symplectic2n:<n>"
PoissonStructure make_heisenberg();                      // "heisenberg3"
PoissonStructure make_product2x1();                      // "product2x1"

struct BivectorEntry {
    int i, j;          // 0-based, i < j
    std::string expr;  // over x1..xn
};
PoissonStructure make_custom(int dim, const std::vector<BivectorEntry>& entries,
                             std::string label = "custom",
                             std::vector<std::string> casimir_exprs = {});

// Internal building blocks reused by the groupoid module.
PoissonStructure make_scaled_direct_sum(const PoissonStructure& block, double first_sign,
                                        double second_sign, std::string label);
PoissonStructure make_cotangent_heisenberg_total();

// Parses "symplectic2n:<n>", "heisenberg3", "product2x1".
PoissonStructure structure_from_label(const std::string& label);

// --- Pointwise operations -------------------------------------------------

// The musical map: v_j = sum_i alpha_i L_ij(x).
Vec sharp(const PoissonStructure& P, const Covector& alpha);

// Defining identity residual |beta(sharp(alpha)) - Lambda(alpha, beta)|.
double sharp_identity_residual(const PoissonStructure& P, const Vec& x, const Vec& alpha,
                               const Vec& beta);

// {F,H}(x), accumulated over the upper triangle so that swapping arguments
// negates the result exactly.
double poisson_bracket(const PoissonStructure& P, const ScalarField& F, const ScalarField& H,
                       const Vec& x);

Vec hamiltonian_vector_field(const PoissonStructure& P, const ScalarField& F, const Vec& x);

// |{F,{G,H}} + {H,{F,G}} + {G,{H,F}}| at x; zero identifies a Poisson bivector.
double jacobi_residual(const PoissonStructure& P, const ScalarField& F, const ScalarField& G,
                       const ScalarField& H, const Vec& x);

// Max of jacobi_residual over all coordinate triples at x (dim >= 3).
double jacobi_residual_coordinates(const PoissonStructure& P, const Vec& x);

// --- Symplectic leaves ----------------------------------------------------

struct LeafChart {
    Vec base_point;
    int dimension = 0;   // rank of the bivector at the base point (even)
    Mat tangent_basis;   // n x k, orthonormal columns spanning im(sharp)
    Mat sigma;           // k x k leaf symplectic matrix: inverse of E^T L E
    bool proper = false;
    bool has_affine_chart = false;
    std::vector<int> axes;  // ambient axes serving as leaf coordinates

    // Ambient point for leaf coordinates u (affine charts only).
    Vec embed(const double* u) const;
    Vec embed(const Vec& u) const { return embed(u.data()); }

    // |sigma_{01}|: the leaf area density of a 2-dimensional leaf.
    double area_factor() const;
};

LeafChart leaf_at(const PoissonStructure& P, const Vec& x);

}  // namespace hoferlab
