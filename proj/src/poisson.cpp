#include "hoferlab/poisson.hpp"

#include "hoferlab/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace hoferlab {

void ScalarField::gradient(const double* x, double* g) const {
    int n = dim();
    double h = fd_step(x, n);
    double xs[kMaxDim];
    std::memcpy(xs, x, sizeof(double) * n);
    for (int i = 0; i < n; ++i) {
        double xi = xs[i];
        xs[i] = xi + h;
        double fp = value(xs);
        xs[i] = xi - h;
        double fm = value(xs);
        xs[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
}

namespace {

class CoordinateField final : public ScalarField {
public:
    CoordinateField(int dim, int index) : dim_(dim), index_(index) {
        if (index < 0 || index >= dim) throw std::invalid_argument("coordinate index out of range");
    }
    int dim() const override { return dim_; }
    double value(const double* x) const override { return x[index_]; }
    void gradient(const double*, double* g) const override {
        std::fill(g, g + dim_, 0.0);
        g[index_] = 1.0;
    }
    bool analytic_gradient() const override { return true; }

private:
    int dim_, index_;
};

class ConstantField final : public ScalarField {
public:
    ConstantField(int dim, double v) : dim_(dim), v_(v) {}
    int dim() const override { return dim_; }
    double value(const double*) const override { return v_; }
    void gradient(const double*, double* g) const override { std::fill(g, g + dim_, 0.0); }
    bool analytic_gradient() const override { return true; }

private:
    int dim_;
    double v_;
};

std::vector<std::string> coordinate_names(int dim) {
    std::vector<std::string> names(dim);
    for (int i = 0; i < dim; ++i) names[i] = "x" + std::to_string(i + 1);
    return names;
}

class ExpressionScalarField final : public ScalarField {
public:
    ExpressionScalarField(int dim, const std::string& text)
        : dim_(dim), expr_(Expression::parse(text, coordinate_names(dim))) {}
    int dim() const override { return dim_; }
    double value(const double* x) const override {
        return expr_.eval(std::span<const double>(x, dim_));
    }

private:
    int dim_;
    Expression expr_;
};

class LambdaField final : public ScalarField {
public:
    LambdaField(int dim, std::function<double(const double*)> fn)
        : dim_(dim), fn_(std::move(fn)) {}
    int dim() const override { return dim_; }
    double value(const double* x) const override { return fn_(x); }

private:
    int dim_;
    std::function<double(const double*)> fn_;
};

}  // namespace

ScalarFieldPtr coordinate_field(int dim, int index) {
    return std::make_shared<CoordinateField>(dim, index);
}
ScalarFieldPtr constant_field(int dim, double value) {
    return std::make_shared<ConstantField>(dim, value);
}
ScalarFieldPtr expression_field(int dim, const std::string& text) {
    return std::make_shared<ExpressionScalarField>(dim, text);
}
ScalarFieldPtr lambda_field(int dim, std::function<double(const double*)> fn) {
    return std::make_shared<LambdaField>(dim, std::move(fn));
}

void PoissonStructureImpl::sharp_apply(const double* x, const double* alpha, double* out) const {
    int n = dim();
    double m[kMaxDim * kMaxDim];
    fill(x, m);
    for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += alpha[i] * m[i * n + j];
        out[j] = acc;
    }
}

namespace {

// Standard symplectic chart: coordinates (x_1..x_n, y_1..y_n), {x_i, y_i} = 1.
class StdSymplectic final : public PoissonStructureImpl {
public:
    explicit StdSymplectic(int pairs) : pairs_(pairs) {
        if (pairs < 1 || 2 * pairs > kMaxDim)
            throw std::invalid_argument("symplectic chart dimension out of range");
    }
    int dim() const override { return 2 * pairs_; }
    std::string label() const override { return "symplectic2n:" + std::to_string(pairs_); }
    void fill(const double*, double* m) const override {
        int n = dim();
        std::fill(m, m + n * n, 0.0);
        for (int i = 0; i < pairs_; ++i) {
            m[i * n + (pairs_ + i)] = 1.0;
            m[(pairs_ + i) * n + i] = -1.0;
        }
    }
    void sharp_apply(const double*, const double* a, double* out) const override {
        for (int j = 0; j < pairs_; ++j) out[j] = -a[pairs_ + j];
        for (int j = 0; j < pairs_; ++j) out[pairs_ + j] = a[j];
    }
    bool constant_bivector() const override { return true; }
    std::vector<int> leaf_axes(const double*) const override {
        std::vector<int> axes(dim());
        for (int i = 0; i < dim(); ++i) axes[i] = i;
        return axes;
    }
    bool leaves_proper() const override { return true; }

private:
    int pairs_;
};

// Lie-Poisson bracket of the Heisenberg algebra: {x1,x2} = x3, x3 central.
class HeisenbergLP final : public PoissonStructureImpl {
public:
    int dim() const override { return 3; }
    std::string label() const override { return "heisenberg3"; }
    void fill(const double* x, double* m) const override {
        std::fill(m, m + 9, 0.0);
        m[0 * 3 + 1] = x[2];
        m[1 * 3 + 0] = -x[2];
    }
    void sharp_apply(const double* x, const double* a, double* out) const override {
        out[0] = -x[2] * a[1];
        out[1] = x[2] * a[0];
        out[2] = 0.0;
    }
    std::vector<ScalarFieldPtr> casimirs() const override { return {coordinate_field(3, 2)}; }
    std::vector<int> leaf_axes(const double* x) const override {
        if (x[2] == 0.0) return {};
        return {0, 1};
    }
    bool leaves_proper() const override { return true; }
};

// Symplectic plane times a line of Casimirs: {x1,x2} = 1, x3 central.
class Product2x1 final : public PoissonStructureImpl {
public:
    int dim() const override { return 3; }
    std::string label() const override { return "product2x1"; }
    void fill(const double*, double* m) const override {
        std::fill(m, m + 9, 0.0);
        m[0 * 3 + 1] = 1.0;
        m[1 * 3 + 0] = -1.0;
    }
    void sharp_apply(const double*, const double* a, double* out) const override {
        out[0] = -a[1];
        out[1] = a[0];
        out[2] = 0.0;
    }
    bool constant_bivector() const override { return true; }
    std::vector<ScalarFieldPtr> casimirs() const override { return {coordinate_field(3, 2)}; }
    std::vector<int> leaf_axes(const double*) const override { return {0, 1}; }
    bool leaves_proper() const override { return true; }
};

class CustomBivector final : public PoissonStructureImpl {
public:
    CustomBivector(int dim, const std::vector<BivectorEntry>& entries, std::string label,
                   const std::vector<std::string>& casimir_exprs)
        : dim_(dim), label_(std::move(label)) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("custom chart dimension out of range");
        auto names = coordinate_names(dim);
        for (const auto& e : entries) {
            if (e.i < 0 || e.j <= e.i || e.j >= dim)
                throw std::invalid_argument("custom bivector entry indices must satisfy 0 <= i < j < dim");
            entries_.push_back({e.i, e.j, Expression::parse(e.expr, names)});
        }
        for (const auto& c : casimir_exprs) casimirs_.push_back(expression_field(dim, c));
    }
    int dim() const override { return dim_; }
    std::string label() const override { return label_; }
    void fill(const double* x, double* m) const override {
        std::fill(m, m + dim_ * dim_, 0.0);
        std::span<const double> xs(x, static_cast<size_t>(dim_));
        for (const auto& e : entries_) {
            double v = e.expr.eval(xs);
            m[e.i * dim_ + e.j] = v;
            m[e.j * dim_ + e.i] = -v;
        }
    }
    std::vector<ScalarFieldPtr> casimirs() const override { return casimirs_; }

private:
    struct CompiledEntry {
        int i, j;
        Expression expr;
    };
    int dim_;
    std::string label_;
    std::vector<CompiledEntry> entries_;
    std::vector<ScalarFieldPtr> casimirs_;
};

// Two copies of a base bivector, each scaled by a fixed sign, on the product
// chart.  The groupoid module instantiates it as diag(-L, +L).
class ScaledDirectSum final : public PoissonStructureImpl {
public:
    ScaledDirectSum(PoissonStructure block, double s1, double s2, std::string label)
        : block_(std::move(block)), s1_(s1), s2_(s2), label_(std::move(label)) {
        if (2 * block_.dim() > kMaxDim)
            throw std::invalid_argument("direct sum dimension out of range");
    }
    int dim() const override { return 2 * block_.dim(); }
    std::string label() const override { return label_; }
    void fill(const double* x, double* m) const override {
        int nb = block_.dim(), n = dim();
        std::fill(m, m + n * n, 0.0);
        double sub[kMaxDim * kMaxDim];
        block_.bivector_into(x, sub);
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) m[i * n + j] = s1_ * sub[i * nb + j];
        block_.bivector_into(x + nb, sub);
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) m[(nb + i) * n + (nb + j)] = s2_ * sub[i * nb + j];
    }
    void sharp_apply(const double* x, const double* a, double* out) const override {
        int nb = block_.dim();
        block_.sharp_apply(x, a, out);
        for (int j = 0; j < nb; ++j) out[j] *= s1_;
        block_.sharp_apply(x + nb, a + nb, out + nb);
        for (int j = 0; j < nb; ++j) out[nb + j] *= s2_;
    }
    bool constant_bivector() const override { return block_.constant_bivector(); }

private:
    PoissonStructure block_;
    double s1_, s2_;
    std::string label_;
};

// Canonical bracket of T*(Heisenberg group) written in the left-trivialized
// chart (a, b, c, mu1, mu2, mu3), with the overall sign fixed so that the
// fiber projection is a Poisson map onto heisenberg3 (so {mu1, mu2} = +mu3).
class CotangentHeisenberg final : public PoissonStructureImpl {
public:
    int dim() const override { return 6; }
    std::string label() const override { return "cotangent-heisenberg"; }
    void fill(const double* x, double* m) const override {
        std::fill(m, m + 36, 0.0);
        double a = x[0], mu3 = x[5];
        auto set = [&](int i, int j, double v) {
            m[i * 6 + j] = v;
            m[j * 6 + i] = -v;
        };
        set(0, 3, -1.0);
        set(1, 4, -1.0);
        set(2, 4, -a);
        set(2, 5, -1.0);
        set(3, 4, mu3);
    }
};

}  // namespace

static Box default_chart(int dim) { return Box::cube(dim, 5.0); }

PoissonStructure make_standard_symplectic(int n_pairs) {
    return {std::make_shared<StdSymplectic>(n_pairs), default_chart(2 * n_pairs)};
}
PoissonStructure make_heisenberg() {
    return {std::make_shared<HeisenbergLP>(), default_chart(3)};
}
PoissonStructure make_product2x1() {
    return {std::make_shared<Product2x1>(), default_chart(3)};
}
PoissonStructure make_custom(int dim, const std::vector<BivectorEntry>& entries, std::string label,
                             std::vector<std::string> casimir_exprs) {
    return {std::make_shared<CustomBivector>(dim, entries, std::move(label), casimir_exprs),
            default_chart(dim)};
}
PoissonStructure make_scaled_direct_sum(const PoissonStructure& block, double first_sign,
                                        double second_sign, std::string label) {
    Vec lo(2 * block.dim()), hi(2 * block.dim());
    lo << block.chart_box().lo, block.chart_box().lo;
    hi << block.chart_box().hi, block.chart_box().hi;
    return {std::make_shared<ScaledDirectSum>(block, first_sign, second_sign, std::move(label)),
            Box(lo, hi)};
}
PoissonStructure make_cotangent_heisenberg_total() {
    return {std::make_shared<CotangentHeisenberg>(), default_chart(6)};
}

PoissonStructure structure_from_label(const std::string& label) {
    if (label == "heisenberg3") return make_heisenberg();
    if (label == "product2x1") return make_product2x1();
    const std::string prefix = "symplectic2n:";
    if (label.rfind(prefix, 0) == 0) {
        int n = 0;
        try {
            n = std::stoi(label.substr(prefix.size()));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad structure label: " + label);
        }
        return make_standard_symplectic(n);
    }
    throw std::invalid_argument("unknown structure label: " + label);
}

// --- Pointwise operations -------------------------------------------------

static void check_point(const PoissonStructure& P, const Vec& x, const char* what) {
    if (x.size() != P.dim())
        throw std::invalid_argument(std::string(what) + ": point dimension mismatch");
    for (int i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]))
            throw std::domain_error(std::string(what) + ": non-finite point");
}

Vec sharp(const PoissonStructure& P, const Covector& alpha) {
    check_point(P, alpha.point, "sharp");
    if (alpha.components.size() != P.dim())
        throw std::invalid_argument("sharp: covector dimension mismatch");
    Vec out(P.dim());
    P.sharp_apply(alpha.point.data(), alpha.components.data(), out.data());
    return out;
}

double sharp_identity_residual(const PoissonStructure& P, const Vec& x, const Vec& alpha,
                               const Vec& beta) {
    Vec v = sharp(P, {x, alpha});
    Mat L = P.bivector(x);
    double pairing = beta.dot(v);
    double form = alpha.dot(L * beta);
    return std::abs(pairing - form);
}

double poisson_bracket(const PoissonStructure& P, const ScalarField& F, const ScalarField& H,
                       const Vec& x) {
    check_point(P, x, "poisson_bracket");
    int n = P.dim();
    if (F.dim() != n || H.dim() != n)
        throw std::invalid_argument("poisson_bracket: scalar field dimension mismatch");
    double m[kMaxDim * kMaxDim], gF[kMaxDim], gH[kMaxDim];
    P.bivector_into(x.data(), m);
    F.gradient(x.data(), gF);
    H.gradient(x.data(), gH);
    double acc = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) acc += m[i * n + j] * (gF[i] * gH[j] - gF[j] * gH[i]);
    return acc;
}

Vec hamiltonian_vector_field(const PoissonStructure& P, const ScalarField& F, const Vec& x) {
    check_point(P, x, "hamiltonian_vector_field");
    if (F.dim() != P.dim())
        throw std::invalid_argument("hamiltonian_vector_field: scalar field dimension mismatch");
    double g[kMaxDim];
    F.gradient(x.data(), g);
    Vec out(P.dim());
    P.sharp_apply(x.data(), g, out.data());
    return out;
}

namespace {

// {F,G} as a scalar field of the base point, for nesting inside brackets.
class BracketField final : public ScalarField {
public:
    BracketField(const PoissonStructure& P, const ScalarField& F, const ScalarField& G)
        : P_(P), F_(F), G_(G) {}
    int dim() const override { return P_.dim(); }
    double value(const double* x) const override {
        Vec xv = Eigen::Map<const Vec>(x, P_.dim());
        return poisson_bracket(P_, F_, G_, xv);
    }

private:
    const PoissonStructure& P_;
    const ScalarField& F_;
    const ScalarField& G_;
};

}  // namespace

double jacobi_residual(const PoissonStructure& P, const ScalarField& F, const ScalarField& G,
                       const ScalarField& H, const Vec& x) {
    BracketField GH(P, G, H), FG(P, F, G), HF(P, H, F);
    return std::abs(poisson_bracket(P, F, GH, x) + poisson_bracket(P, H, FG, x) +
                    poisson_bracket(P, G, HF, x));
}

double jacobi_residual_coordinates(const PoissonStructure& P, const Vec& x) {
    int n = P.dim();
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        auto F = coordinate_field(n, i);
        for (int j = i + 1; j < n; ++j) {
            auto G = coordinate_field(n, j);
            for (int k = j + 1; k < n; ++k) {
                auto H = coordinate_field(n, k);
                worst = std::max(worst, jacobi_residual(P, *F, *G, *H, x));
            }
        }
    }
    return worst;
}

// --- Symplectic leaves ----------------------------------------------------

Vec LeafChart::embed(const double* u) const {
    if (!has_affine_chart)
        throw NotImplementedError("leaf chart has no affine coordinate description");
    Vec x = base_point;
    for (size_t a = 0; a < axes.size(); ++a) x[axes[a]] = u[a];
    return x;
}

double LeafChart::area_factor() const {
    if (dimension != 2) throw std::invalid_argument("area_factor requires a 2-dimensional leaf");
    return std::abs(sigma(0, 1));
}

LeafChart leaf_at(const PoissonStructure& P, const Vec& x) {
    check_point(P, x, "leaf_at");
    int n = P.dim();
    Mat L = P.bivector(x);

    double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
    double tol = 1e-9 * scale;

    // Modified Gram-Schmidt over the columns of L, in column order, keeping
    // directions with residual above tol.  Signs are canonicalized and the
    // result sorted by leading component so built-in charts produce plain
    // coordinate axes.
    std::vector<Vec> basis;
    for (int c = 0; c < n; ++c) {
        Vec v = L.col(c);
        for (const Vec& e : basis) v -= e.dot(v) * e;
        double nrm = v.norm();
        if (nrm <= tol) continue;
        v /= nrm;
        for (int i = 0; i < n; ++i) {
            if (std::abs(v[i]) > 1e-9) {
                if (v[i] < 0) v = -v;
                break;
            }
        }
        basis.push_back(v);
    }
    std::stable_sort(basis.begin(), basis.end(), [](const Vec& a, const Vec& b) {
        int ia = 0, ib = 0;
        a.cwiseAbs().maxCoeff(&ia);
        b.cwiseAbs().maxCoeff(&ib);
        return ia < ib;
    });

    LeafChart chart;
    chart.base_point = x;
    chart.dimension = static_cast<int>(basis.size());
    chart.tangent_basis = Mat(n, chart.dimension);
    for (int k = 0; k < chart.dimension; ++k) chart.tangent_basis.col(k) = basis[k];

    if (chart.dimension > 0) {
        Mat restricted = chart.tangent_basis.transpose() * L * chart.tangent_basis;
        chart.sigma = restricted.inverse();
    } else {
        chart.sigma = Mat(0, 0);
    }

    chart.proper = P.leaves_proper() && chart.dimension > 0;
    chart.axes = P.leaf_axes(x);
    chart.has_affine_chart = !chart.axes.empty();
    if (chart.has_affine_chart && static_cast<int>(chart.axes.size()) != chart.dimension)
        throw std::logic_error("leaf_at: affine chart does not match computed rank");
    return chart;
}

}  // namespace hoferlab
