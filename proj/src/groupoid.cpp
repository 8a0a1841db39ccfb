#include "hoferlab/groupoid.hpp"

#include "hoferlab/halton.hpp"
#include "hoferlab/parallel.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace hoferlab {

namespace {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x) {
    const int n = static_cast<int>(x.size());
    const double h = fd_step(x.data(), n);
    Vec probe = x;
    probe[0] += h;
    const int m = static_cast<int>(f(probe).size());
    Mat J(m, n);
    for (int j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

}  // namespace

GroupoidRealization pair_groupoid(const PoissonStructure& base) {
    const int n = base.dim();
    GroupoidRealization G;
    G.total = make_scaled_direct_sum(base, -1.0, +1.0, "pair(" + base.label() + ")");
    G.base = base;
    G.source = [n](const Vec& g) { return Vec(g.tail(n)); };
    G.target = [n](const Vec& g) { return Vec(g.head(n)); };
    G.unit = [n](const Vec& x) {
        Vec g(2 * n);
        g << x, x;
        return g;
    };
    G.name = "pair(" + base.label() + ")";
    return G;
}

GroupoidRealization cotangent_heisenberg() {
    GroupoidRealization G;
    G.total = make_cotangent_heisenberg_total();
    G.base = make_heisenberg();
    G.source = [](const Vec& g) { return Vec(g.tail(3)); };
    G.target = [](const Vec& g) {
        Vec x(3);
        x << g[3] + g[1] * g[5], g[4] - g[0] * g[5], g[5];
        return x;
    };
    G.unit = [](const Vec& x) {
        Vec g(6);
        g << 0.0, 0.0, 0.0, x;
        return g;
    };
    G.name = "cotangent-heisenberg";
    return G;
}

TimeDependentHamiltonian lift_hamiltonian(const GroupoidRealization& G,
                                          const TimeDependentHamiltonian& F) {
    if (F.dim() != G.base.dim())
        throw std::invalid_argument("lift: Hamiltonian does not live on the base chart");
    const int n = G.total.dim();
    auto source = G.source;
    auto eval = [source, F, n](double t, const double* x) {
        Vec g = Eigen::Map<const Vec>(x, n);
        return F.value(t, source(g));
    };
    TimeDependentHamiltonian lifted =
        wrap_hamiltonian(n, eval, G.total.chart_box(), false, "s*" + F.name());
    return lifted.mark_autonomous(F.autonomous());
}

double source_morphism_residual(const GroupoidRealization& G, int samples, uint64_t seed) {
    Halton gen(G.total.dim(), seed);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec g = gen.next_in_box(G.total.chart_box());
        Mat J = fd_jacobian(G.source, g);
        Mat R = J * G.total.bivector(g) * J.transpose() - G.base.bivector(G.source(g));
        worst = std::max(worst, R.cwiseAbs().maxCoeff());
    }
    return worst;
}

double target_antimorphism_residual(const GroupoidRealization& G, int samples, uint64_t seed) {
    Halton gen(G.total.dim(), seed);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec g = gen.next_in_box(G.total.chart_box());
        Mat J = fd_jacobian(G.target, g);
        Mat R = J * G.total.bivector(g) * J.transpose() + G.base.bivector(G.target(g));
        worst = std::max(worst, R.cwiseAbs().maxCoeff());
    }
    return worst;
}

double unit_section_residual(const GroupoidRealization& G, int samples, uint64_t seed) {
    Halton gen(G.base.dim(), seed);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec x = gen.next_in_box(G.base.chart_box());
        Vec g = G.unit(x);
        worst = std::max(worst, (G.source(g) - x).cwiseAbs().maxCoeff());
        worst = std::max(worst, (G.target(g) - x).cwiseAbs().maxCoeff());
    }
    return worst;
}

double check_projection(const GroupoidRealization& G, const TimeDependentHamiltonian& F,
                        const RealizationProbe& probe, int jobs) {
    TimeDependentHamiltonian lifted = lift_hamiltonian(G, F);
    Isotopy lift_iso(G.total, lifted, probe.lift_spec);
    Isotopy base_iso(G.base, F, probe.base_spec);

    Halton gen(G.total.dim(), probe.seed);
    std::vector<Vec> points(probe.point_samples);
    for (auto& g : points) g = gen.next_in_box(probe.sample_box);

    std::vector<double> residuals(points.size(), 0.0);
    parallel_for(static_cast<int>(points.size()), jobs, [&](int i) {
        Vec base0 = G.source(points[i]);
        for (double t : probe.times) {
            Vec via_lift = G.source(lift_iso.evaluate(t, points[i]));
            Vec via_base = base_iso.evaluate(t, base0);
            residuals[i] = std::max(residuals[i], (via_lift - via_base).cwiseAbs().maxCoeff());
        }
    });
    return *std::max_element(residuals.begin(), residuals.end());
}

double check_target_fibers(const GroupoidRealization& G, const TimeDependentHamiltonian& F,
                           const RealizationProbe& probe, int jobs) {
    TimeDependentHamiltonian lifted = lift_hamiltonian(G, F);
    Isotopy lift_iso(G.total, lifted, probe.lift_spec);

    Halton gen(G.total.dim(), probe.seed);
    std::vector<Vec> points(probe.point_samples);
    for (auto& g : points) g = gen.next_in_box(probe.sample_box);

    std::vector<double> residuals(points.size(), 0.0);
    parallel_for(static_cast<int>(points.size()), jobs, [&](int i) {
        Vec fiber0 = G.target(points[i]);
        for (double t : probe.times) {
            Vec fiber = G.target(lift_iso.evaluate(t, points[i]));
            residuals[i] = std::max(residuals[i], (fiber - fiber0).cwiseAbs().maxCoeff());
        }
    });
    return *std::max_element(residuals.begin(), residuals.end());
}

// --- Cutoff -------------------------------------------------------------------

namespace {

// F_cut(t, x) = lambda(psi_t(x)) * F(t, s(x)).  psi_t, the inverse of the
// lifted flow, is evaluated on a fixed time grid (backward RK4 from each node
// to 0, memoized per node and start point) and lambda is interpolated
// linearly between nodes; interpolation keeps lambda inside [0, 1], so
// |F_cut| <= |F o s| holds for the computed values, not just in the limit.
class CutoffHam final : public HamiltonianImpl {
public:
    CutoffHam(PoissonStructure total, TimeDependentHamiltonian lifted,
              TimeDependentHamiltonian base_F, std::function<Vec(const Vec&)> source,
              Plateau plateau, int table_nodes, int steps_per_interval)
        : total_(std::move(total)), lifted_(std::move(lifted)), base_(std::move(base_F)),
          source_(std::move(source)), plateau_(std::move(plateau)), nodes_(table_nodes),
          steps_(steps_per_interval), memo_(table_nodes), locks_(table_nodes) {}

    int dim() const override { return total_.dim(); }

    double value(double t, const double* x) const override {
        Vec g = Eigen::Map<const Vec>(x, dim());
        double f = base_.value(t, source_(g));
        if (f == 0.0) return 0.0;

        double pos = std::clamp(t, 0.0, 1.0) * (nodes_ - 1);
        int k = std::min(static_cast<int>(pos), nodes_ - 2);
        double theta = pos - k;
        double lam = (1.0 - theta) * plateau_.value(inverse_at_node(k, g).data());
        if (theta > 0.0) lam += theta * plateau_.value(inverse_at_node(k + 1, g).data());
        return lam * f;
    }

private:
    Vec lifted_field(double t, const Vec& y) const {
        Vec grad = lifted_.gradient(t, y);
        Vec out(dim());
        total_.sharp_apply(y.data(), grad.data(), out.data());
        return out;
    }

    // psi_{t_k}(x): the lifted field integrated from t_k back to 0.
    Vec inverse_at_node(int k, const Vec& x) const {
        if (k == 0) return x;
        std::string key(reinterpret_cast<const char*>(x.data()), sizeof(double) * x.size());
        {
            std::lock_guard<std::mutex> hold(locks_[k]);
            auto it = memo_[k].find(key);
            if (it != memo_[k].end()) return it->second;
        }
        const int steps = steps_ * k;
        const double t_k = static_cast<double>(k) / (nodes_ - 1);
        const double h = -t_k / steps;
        Vec y = x;
        double t = t_k;
        for (int s = 0; s < steps; ++s) {
            Vec k1 = lifted_field(t, y);
            Vec k2 = lifted_field(t + 0.5 * h, y + (0.5 * h) * k1);
            Vec k3 = lifted_field(t + 0.5 * h, y + (0.5 * h) * k2);
            Vec k4 = lifted_field(t + h, y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = t_k + h * (s + 1);
        }
        std::lock_guard<std::mutex> hold(locks_[k]);
        memo_[k].emplace(std::move(key), y);
        return y;
    }

    PoissonStructure total_;
    TimeDependentHamiltonian lifted_, base_;
    std::function<Vec(const Vec&)> source_;
    Plateau plateau_;
    int nodes_, steps_;
    mutable std::vector<std::unordered_map<std::string, Vec>> memo_;
    mutable std::vector<std::mutex> locks_;
};

}  // namespace

TimeDependentHamiltonian cutoff_hamiltonian(const GroupoidRealization& G,
                                            const TimeDependentHamiltonian& F,
                                            const CutoffSpec& cutoff, IntegratorSpec lift_spec) {
    if (cutoff.inner.dim() != G.total.dim())
        throw std::invalid_argument("cutoff: plateau box must live on the total chart");
    if (cutoff.table_nodes < 2 || cutoff.steps_per_interval < 1)
        throw std::invalid_argument("cutoff: bad inverse-flow table parameters");
    TimeDependentHamiltonian lifted = lift_hamiltonian(G, F);
    Plateau plateau(cutoff.inner, cutoff.ramp);

    // Everything the cutoff can touch lies in the forward transport of the
    // plateau; outside that box lambda(psi_t(x)) vanishes.
    Isotopy lift_iso(G.total, lifted, lift_spec);
    Box support = transported_support(lift_iso, plateau.outer);

    auto impl = std::make_shared<CutoffHam>(G.total, lifted, F, G.source, plateau,
                                            cutoff.table_nodes, cutoff.steps_per_interval);
    return {impl, std::move(support), true, F.name() + "^cut"};
}

double sampled_length(const TimeDependentHamiltonian& F, const std::vector<Vec>& points,
                      int simpson_nodes, int jobs) {
    if (points.empty()) throw std::invalid_argument("sampled_length: no points");
    if (simpson_nodes < 3 || simpson_nodes % 2 == 0)
        throw std::invalid_argument("sampled_length: Simpson nodes must be odd and >= 3");
    const double h = 1.0 / (simpson_nodes - 1);
    double sum = 0.0;
    for (int k = 0; k < simpson_nodes; ++k) {
        const double t = k * h;
        std::vector<double> values(points.size());
        parallel_for(static_cast<int>(points.size()), jobs, [&](int i) {
            values[i] = F.value(t, points[i]);
        });
        double hi = 0.0, lo = 0.0;  // 0 belongs to the value set
        for (double v : values) {
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        double w = (k == 0 || k == simpson_nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        sum += w * (hi - lo);
    }
    return sum * h / 3.0;
}

std::vector<Vec> sample_cloud(const Box& box, int lattice_per_axis, int halton_points,
                              uint64_t seed) {
    const int n = box.dim();
    std::vector<Vec> pts;
    if (n <= 8) {
        for (long mask = 0; mask < (1L << n); ++mask) {
            Vec c(n);
            for (int a = 0; a < n; ++a) c[a] = (mask >> a) & 1 ? box.hi[a] : box.lo[a];
            pts.push_back(std::move(c));
        }
    }
    const int k = std::max(2, lattice_per_axis);
    std::vector<long> strides(n);
    long total = 1;
    for (int a = n - 1; a >= 0; --a) {
        strides[a] = total;
        total *= k;
    }
    for (long idx = 0; idx < total; ++idx) {
        Vec x(n);
        for (int a = 0; a < n; ++a) {
            long j = (idx / strides[a]) % k;
            x[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * j / (k - 1);
        }
        pts.push_back(std::move(x));
    }
    Halton fill(n, seed);
    for (int i = 0; i < halton_points; ++i) pts.push_back(fill.next_in_box(box));
    return pts;
}

}  // namespace hoferlab
