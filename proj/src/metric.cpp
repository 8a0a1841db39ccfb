#include "hoferlab/metric.hpp"

#include "hoferlab/expr.hpp"
#include "hoferlab/halton.hpp"
#include "hoferlab/neldermead.hpp"
#include "hoferlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace hoferlab {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = 0.5 * (lo + hi);
        return v;
    }
    double h = (hi - lo) / (count - 1);
    for (int k = 0; k < count; ++k) v[k] = lo + h * k;
    v.back() = hi;
    return v;
}

}  // namespace

OscillationGrid OscillationGrid::uniform(const Box& box, int resolution_per_axis,
                                         int simpson_nodes, bool refine) {
    if (resolution_per_axis < 16)
        throw std::invalid_argument("oscillation grid: resolution must be at least 16 per axis");
    OscillationGrid g;
    g.axis_nodes.reserve(box.dim());
    for (int a = 0; a < box.dim(); ++a)
        g.axis_nodes.push_back(linspace(box.lo[a], box.hi[a], resolution_per_axis + 1));
    g.simpson_nodes = simpson_nodes;
    g.refine = refine;
    return g;
}

void OscillationGrid::insert_axis_value(int axis, double value) {
    auto& nodes = axis_nodes.at(axis);
    if (value < nodes.front() || value > nodes.back()) return;  // outside the grid span
    auto it = std::lower_bound(nodes.begin(), nodes.end(), value);
    if (it != nodes.end() && *it == value) return;
    nodes.insert(it, value);
}

void OscillationGrid::validate() const {
    if (axis_nodes.empty()) throw std::invalid_argument("oscillation grid: no axes");
    for (const auto& nodes : axis_nodes) {
        if (nodes.size() < 2) throw std::invalid_argument("oscillation grid: axis needs 2+ nodes");
        for (size_t k = 1; k < nodes.size(); ++k)
            if (!(nodes[k] > nodes[k - 1]))
                throw std::invalid_argument("oscillation grid: axis nodes must increase");
    }
    if (simpson_nodes < 33 || simpson_nodes % 2 == 0)
        throw std::invalid_argument("oscillation grid: Simpson nodes must be odd and >= 33");
}

OscillationGrid default_grid(const Box& box) {
    int n = box.dim();
    int res = n <= 2 ? 32 : (n == 3 ? 24 : 16);
    int nodes = n <= 2 ? 129 : 33;
    return OscillationGrid::uniform(box, res, nodes, true);
}

namespace {

struct LatticeExtrema {
    double max_value = -std::numeric_limits<double>::infinity();
    double min_value = std::numeric_limits<double>::infinity();
    Vec argmax, argmin;
};

// Scans the full lattice; the winner is the first extremum in row-major
// order, so the result does not depend on the job count.
LatticeExtrema scan_lattice(const TimeDependentHamiltonian& F, double t,
                            const OscillationGrid& grid, int jobs) {
    const int n = grid.dim();
    std::vector<long> sizes(n), strides(n);
    long total = 1;
    for (int a = n - 1; a >= 0; --a) {
        sizes[a] = static_cast<long>(grid.axis_nodes[a].size());
        strides[a] = total;
        total *= sizes[a];
    }

    std::vector<double> values(total);
    int use_jobs = total >= 4096 ? jobs : 1;
    parallel_for(static_cast<int>(total), use_jobs, [&](int k) {
        Vec x(n);
        for (int a = 0; a < n; ++a)
            x[a] = grid.axis_nodes[a][(k / strides[a]) % sizes[a]];
        values[k] = F.value(t, x);
    });

    LatticeExtrema e;
    long kmax = 0, kmin = 0;
    for (long k = 0; k < total; ++k) {
        if (values[k] > e.max_value) {
            e.max_value = values[k];
            kmax = k;
        }
        if (values[k] < e.min_value) {
            e.min_value = values[k];
            kmin = k;
        }
    }
    auto decode = [&](long k) {
        Vec x(n);
        for (int a = 0; a < n; ++a)
            x[a] = grid.axis_nodes[a][(k / strides[a]) % sizes[a]];
        return x;
    };
    e.argmax = decode(kmax);
    e.argmin = decode(kmin);
    return e;
}

// Coordinate-wise golden-section polish of sign * F(t, .) starting from a
// lattice extremum; the search window per axis is one local node spacing.
double refine_extremum(const TimeDependentHamiltonian& F, double t, const OscillationGrid& grid,
                       Vec x, double sign, int sweeps, int iters) {
    auto g = [&](const Vec& p) { return sign * F.value(t, p); };
    double best = g(x);
    for (int s = 0; s < sweeps; ++s) {
        for (int a = 0; a < grid.dim(); ++a) {
            const auto& nodes = grid.axis_nodes[a];
            double spacing = (nodes.back() - nodes.front()) / (nodes.size() - 1);
            double lo = std::max(nodes.front(), x[a] - spacing);
            double hi = std::min(nodes.back(), x[a] + spacing);
            if (!(hi > lo)) continue;

            double c = hi - kGolden * (hi - lo);
            double d = lo + kGolden * (hi - lo);
            Vec p = x;
            p[a] = c;
            double fc = g(p);
            p[a] = d;
            double fd = g(p);
            for (int it = 0; it < iters; ++it) {
                if (fc >= fd) {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - kGolden * (hi - lo);
                    p[a] = c;
                    fc = g(p);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + kGolden * (hi - lo);
                    p[a] = d;
                    fd = g(p);
                }
            }
            double mid = 0.5 * (lo + hi);
            p[a] = mid;
            double fm = g(p);
            if (fm > best) {
                best = fm;
                x[a] = mid;
            }
        }
    }
    return best;
}

}  // namespace

double oscillation(const TimeDependentHamiltonian& F, double t, const OscillationGrid& grid,
                   int jobs) {
    if (grid.dim() != F.dim())
        throw std::invalid_argument("oscillation: grid dimension mismatch");
    LatticeExtrema e = scan_lattice(F, t, grid, jobs);
    double hi = e.max_value;
    double lo = e.min_value;
    if (grid.refine) {
        hi = std::max(hi, refine_extremum(F, t, grid, e.argmax, +1.0, grid.refine_sweeps,
                                          grid.refine_iters));
        lo = std::min(lo, -refine_extremum(F, t, grid, e.argmin, -1.0, grid.refine_sweeps,
                                           grid.refine_iters));
    }
    // Compact support puts 0 in the closure of the value set.
    hi = std::max(hi, 0.0);
    lo = std::min(lo, 0.0);
    return hi - lo;
}

double hofer_length(const TimeDependentHamiltonian& F, const OscillationGrid& grid, int jobs) {
    grid.validate();
    if (F.autonomous()) return oscillation(F, 0.0, grid, jobs);
    const int m = grid.simpson_nodes;
    const double h = 1.0 / (m - 1);
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
        double w = (k == 0 || k == m - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        sum += w * oscillation(F, k * h, grid, jobs);
    }
    return sum * h / 3.0;
}

double hofer_length(const TimeDependentHamiltonian& F, int jobs) {
    return hofer_length(F, default_grid(F.support()), jobs);
}

// --- Displacement ------------------------------------------------------------

namespace {

// Deterministic sample cloud of the closed region: interior lattice,
// low-discrepancy fill, and a shell hugging the boundary from inside.
std::vector<Vec> region_samples(const Region& U, const SamplerSpec& spec, double& cell_out) {
    const int n = static_cast<int>(U.kind == Region::Kind::Ball ? U.center.size()
                                                                : U.box.lo.size());
    std::vector<Vec> pts;
    const Box bb = U.bounding();
    const int k = std::max(2, spec.lattice_per_axis);
    cell_out = (bb.hi - bb.lo).maxCoeff() / (k - 1);

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
            x[a] = bb.lo[a] + (bb.hi[a] - bb.lo[a]) * j / (k - 1);
        }
        if (U.signed_distance(x) <= 0.0) pts.push_back(std::move(x));
    }

    Halton fill(n, 11);
    for (int i = 0; i < spec.halton_points; ++i) {
        Vec x = U.kind == Region::Kind::Ball ? fill.next_in_ball(U.center, U.radius)
                                             : fill.next_in_box(U.box);
        pts.push_back(std::move(x));
    }

    Halton shell(n, 23);
    for (int i = 0; i < spec.shell_points; ++i) {
        if (U.kind == Region::Kind::Ball) {
            Vec p = shell.next_in_ball(U.center, U.radius);
            Vec d = p - U.center;
            double r = d.norm();
            if (r < 1e-12) continue;
            pts.push_back(U.center + d * (spec.shell_factor * U.radius / r));
        } else {
            Vec p = shell.next_in_box(U.box);
            // Push the point onto its nearest face, then pull slightly inside.
            int face_axis = 0;
            double face_value = U.box.lo[0];
            double best_gap = std::numeric_limits<double>::infinity();
            for (int a = 0; a < n; ++a) {
                if (p[a] - U.box.lo[a] < best_gap) {
                    best_gap = p[a] - U.box.lo[a];
                    face_axis = a;
                    face_value = U.box.lo[a];
                }
                if (U.box.hi[a] - p[a] < best_gap) {
                    best_gap = U.box.hi[a] - p[a];
                    face_axis = a;
                    face_value = U.box.hi[a];
                }
            }
            p[face_axis] = face_value;
            Vec c = U.box.center();
            pts.push_back(c + spec.shell_factor * (p - c));
        }
    }
    return pts;
}

}  // namespace

DisplacedReport check_displaced(const Isotopy& iso, const Region& U, const SamplerSpec& sampler,
                                int jobs) {
    DisplacedReport rep;
    if (U.empty()) {
        rep.displaced = true;
        rep.margin_verified = true;
        rep.margin = std::numeric_limits<double>::infinity();
        return rep;
    }
    std::vector<Vec> pts = region_samples(U, sampler, rep.cell);
    rep.samples = static_cast<int>(pts.size());

    std::vector<double> margins(pts.size());
    parallel_for(static_cast<int>(pts.size()), jobs, [&](int i) {
        margins[i] = U.signed_distance(iso.evaluate(1.0, pts[i]));
    });
    rep.margin = *std::min_element(margins.begin(), margins.end());
    rep.displaced = rep.margin > 0.0;
    rep.margin_verified = rep.displaced && rep.margin >= rep.cell;
    return rep;
}

// --- Candidate families -------------------------------------------------------

TimeDependentHamiltonian instantiate_candidate(const PoissonStructure& P,
                                               const CandidateFamilySpec& family,
                                               const Region& U,
                                               const std::vector<double>& params) {
    const int n = P.dim();
    switch (family.type) {
        case CandidateFamilySpec::Type::TranslationCutoff: {
            if (params.size() != 2)
                throw std::invalid_argument("translation family takes (travel, margin)");
            if (U.kind != Region::Kind::Ball)
                throw std::invalid_argument("translation family targets a ball");
            double travel = params[0];
            double margin = std::max(params[1], 1e-3);
            int axis = family.translation_axis;
            if (axis < 0 || axis >= n)
                throw std::invalid_argument("translation family: axis out of range");
            // Plateau covering the swept ball with clearance `margin`, so every
            // trajectory out of U sees the constant field only.
            Vec lo = U.center.array() - U.radius - margin;
            Vec hi = U.center.array() + U.radius + margin;
            lo[axis] -= travel;
            Vec velocity = Vec::Zero(n);
            velocity[axis] = -travel;
            return translation_hamiltonian(P, velocity, U.center, Plateau(Box(lo, hi), margin));
        }
        case CandidateFamilySpec::Type::RotationCutoff: {
            if (params.size() != 2)
                throw std::invalid_argument("rotation family takes (rate, margin)");
            if (U.kind != Region::Kind::Ball)
                throw std::invalid_argument("rotation family targets a ball");
            double margin = std::max(params[1], 1e-3);
            Vec lo = U.center.array() - U.radius - margin;
            Vec hi = U.center.array() + U.radius + margin;
            return rotation_hamiltonian(U.center, params[0], Plateau(Box(lo, hi), margin));
        }
        case CandidateFamilySpec::Type::Custom: {
            if (params.size() > 8)
                throw std::invalid_argument("custom family supports at most 8 parameters");
            std::vector<std::string> vars;
            for (int i = 1; i <= n; ++i) vars.push_back("x" + std::to_string(i));
            vars.push_back("t");
            for (size_t i = 1; i <= params.size(); ++i) vars.push_back("p" + std::to_string(i));
            Expression expr = Expression::parse(family.expression, vars);
            Plateau plateau(family.custom_inner, family.custom_ramp);
            auto value = [expr, plateau, params, n](double t, const double* x) {
                double args[kMaxDim + 1 + 8];
                for (int i = 0; i < n; ++i) args[i] = x[i];
                args[n] = t;
                for (size_t i = 0; i < params.size() && i < 8; ++i)
                    args[n + 1 + i] = params[i];
                return expr.eval({args, static_cast<size_t>(n) + 1 + params.size()}) *
                       plateau.value(x);
            };
            return wrap_hamiltonian(n, value, plateau.outer, true, "custom_family");
        }
    }
    throw std::invalid_argument("unknown candidate family");
}

// --- Displacement energy search ------------------------------------------------

namespace {

OscillationGrid search_grid(const Box& support) {
    return OscillationGrid::uniform(support, 16, 33, true);
}

struct Candidate {
    std::vector<double> params;
    double objective = std::numeric_limits<double>::infinity();
};

}  // namespace

HoferEstimate displacement_upper_bound(const PoissonStructure& P,
                                       const DisplacementExperiment& experiment, int jobs) {
    const Region& U = experiment.U;
    const CandidateFamilySpec& family = experiment.family;
    const SearchBudget& budget = experiment.budget;

    HoferEstimate best;
    if (U.empty()) {
        best.upper = 0.0;
        best.feasible = true;
        best.notes = "empty region, displaced by the zero isotopy";
        return best;
    }
    const size_t arity = family.bounds.size();
    if (arity == 0) throw std::invalid_argument("candidate family has no parameters");

    // Infeasible candidates score above this wall; the margin term slopes the
    // wall toward feasibility so the simplex can climb out.
    constexpr double kInfeasible = 1e3;
    int evals = 0;
    std::map<std::vector<double>, double> cache;
    auto objective = [&](const std::vector<double>& p) -> double {
        if (auto it = cache.find(p); it != cache.end()) return it->second;
        double obj;
        try {
            TimeDependentHamiltonian F = instantiate_candidate(P, family, U, p);
            Isotopy iso(P, F, experiment.integrator);
            DisplacedReport rep = check_displaced(iso, U, SamplerSpec::search_profile(), jobs);
            if (!rep.displaced || rep.margin < budget.margin_floor)
                obj = kInfeasible + std::min(budget.margin_floor - rep.margin, 10.0);
            else
                obj = hofer_length(F, search_grid(F.support()), jobs);
        } catch (const std::exception&) {
            obj = 10.0 * kInfeasible;
        }
        cache.emplace(p, obj);
        ++evals;
        return obj;
    };

    // Coarse parameter lattice.
    std::vector<Candidate> pool;
    {
        const int k = std::max(2, budget.coarse_per_axis);
        std::vector<long> strides(arity);
        long total = 1;
        for (int a = static_cast<int>(arity) - 1; a >= 0; --a) {
            strides[a] = total;
            total *= k;
        }
        for (long idx = 0; idx < total; ++idx) {
            std::vector<double> p(arity);
            for (size_t a = 0; a < arity; ++a) {
                long j = (idx / strides[a]) % k;
                auto [lo, hi] = family.bounds[a];
                p[a] = lo + (hi - lo) * j / (k - 1);
            }
            pool.push_back({p, objective(p)});
        }
    }

    // Simplex starts: caller-provided warm starts first, then the best coarse
    // cells in scan order.
    std::vector<std::vector<double>> starts;
    for (auto seed : experiment.warm_starts) {
        if (seed.size() != arity) continue;
        for (size_t a = 0; a < arity; ++a)
            seed[a] = std::clamp(seed[a], family.bounds[a].first, family.bounds[a].second);
        starts.push_back(std::move(seed));
    }
    {
        std::vector<size_t> order(pool.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return pool[a].objective < pool[b].objective;
        });
        size_t want = starts.size() + static_cast<size_t>(budget.nm_starts);
        for (size_t i = 0; i < order.size() && starts.size() < want; ++i)
            starts.push_back(pool[order[i]].params);
    }

    std::vector<Candidate> results = pool;
    for (const auto& start : starts) {
        NelderMeadResult r = nelder_mead(objective, start, family.bounds, budget.nm_max_evals);
        results.push_back({r.x, r.value});
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.objective < b.objective;
                     });

    // Fine verification of the leading candidates: full sampler, default grid.
    best.evaluations = evals;
    for (size_t i = 0; i < results.size() && i < 3; ++i) {
        if (results[i].objective >= kInfeasible) break;
        TimeDependentHamiltonian F = instantiate_candidate(P, family, U, results[i].params);
        Isotopy iso(P, F, experiment.integrator);
        DisplacedReport rep = check_displaced(iso, U, SamplerSpec::verify_profile(P.dim()), jobs);
        if (!rep.displaced || !rep.margin_verified || rep.margin < budget.margin_floor) continue;
        best.upper = hofer_length(F, default_grid(F.support()), jobs);
        best.feasible = true;
        best.witness = results[i].params;
        best.witness_check = rep;
        best.evaluations = evals;
        return best;
    }
    best.notes = results.empty() || results.front().objective >= kInfeasible
                     ? "no candidate in the family displaces the region"
                     : "search minimum failed fine-grid verification";
    return best;
}

// --- Capacities ----------------------------------------------------------------

namespace {

// True exactly for the standard block bivector [[0, I], [-I, 0]].
bool is_standard_symplectic(const PoissonStructure& P) {
    if (!P.constant_bivector() || P.dim() % 2 != 0) return false;
    int n = P.dim() / 2;
    Mat L = P.bivector(Vec::Zero(P.dim()));
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) {
            double want = 0.0;
            if (j == i + n) want = 1.0;
            if (i == j + n) want = -1.0;
            if (L(i, j) != want) return false;
        }
    return true;
}

}  // namespace

double gromov_width_lower(const PoissonStructure& P, const Region& U,
                          const std::optional<LeafChart>& leaf) {
    if (U.kind != Region::Kind::Ball)
        throw NotImplementedError("width lower bounds are computed for round balls");
    if (leaf) {
        const LeafChart& L = *leaf;
        if (L.dimension != 2)
            throw NotImplementedError("leafwise width needs a 2-dimensional leaf");
        if (!L.has_affine_chart)
            throw NotImplementedError("leafwise width needs leaf coordinates");
        // Distance from the ball center to the leaf plane (the coordinates
        // not serving as leaf axes are frozen at the base point).
        std::vector<bool> on_leaf(P.dim(), false);
        for (int a : L.axes) on_leaf[a] = true;
        double d2 = 0.0;
        for (int i = 0; i < P.dim(); ++i)
            if (!on_leaf[i]) d2 += (U.center[i] - L.base_point[i]) * (U.center[i] - L.base_point[i]);
        double rl2 = U.radius * U.radius - d2;
        if (rl2 <= 0.0) return 0.0;
        return L.area_factor() * kPi * rl2;
    }
    if (is_standard_symplectic(P)) return kPi * U.radius * U.radius;
    throw NotImplementedError("ambient width is implemented for standard symplectic charts");
}

double capacity_lower(const PoissonStructure& P, const Region& U) {
    if (U.kind != Region::Kind::Ball)
        throw NotImplementedError("capacity lower bounds are computed for round balls");
    if (is_standard_symplectic(P)) return kPi * U.radius * U.radius;

    // Codimension-one leaves: scan the transverse coordinate across the ball
    // and take the best leafwise slice.
    LeafChart probe = leaf_at(P, U.center);
    std::vector<int> axes = probe.axes;
    if (probe.dimension == 0 || !probe.has_affine_chart) {
        // The center may sit on a degenerate leaf; probe slightly off it.
        Vec off = U.center;
        off[P.dim() - 1] += 0.5 * U.radius;
        probe = leaf_at(P, off);
        axes = probe.axes;
    }
    if (probe.dimension != 2 || !probe.has_affine_chart ||
        static_cast<int>(axes.size()) + 1 != P.dim())
        throw NotImplementedError("capacity scan needs codimension-one affine leaves");

    int transverse = -1;
    std::vector<bool> on_leaf(P.dim(), false);
    for (int a : axes) on_leaf[a] = true;
    for (int i = 0; i < P.dim(); ++i)
        if (!on_leaf[i]) transverse = i;

    double best = 0.0;
    const int samples = 101;
    for (int k = 0; k < samples; ++k) {
        Vec x = U.center;
        x[transverse] += U.radius * (2.0 * k / (samples - 1) - 1.0);
        LeafChart L;
        try {
            L = leaf_at(P, x);
        } catch (const std::exception&) {
            continue;
        }
        if (L.dimension != 2 || !L.has_affine_chart) continue;
        best = std::max(best, gromov_width_lower(P, U, L));
    }
    return best;
}

CapacityReport energy_capacity_check(const PoissonStructure& P, const Region& U,
                                     const HoferEstimate& estimate) {
    CapacityReport rep;
    rep.capacity = capacity_lower(P, U);
    rep.half_capacity = 0.5 * rep.capacity;
    rep.upper = estimate.upper;
    rep.holds = rep.half_capacity <= rep.upper + 1e-9;
    return rep;
}

// --- Leaf restriction ------------------------------------------------------------

LeafRestrictionReport leaf_restriction_check(const PoissonStructure& P,
                                             const TimeDependentHamiltonian& F,
                                             const Vec& base_point, int resolution,
                                             int simpson_nodes, int jobs) {
    LeafChart L = leaf_at(P, base_point);
    if (L.dimension == 0)
        throw std::invalid_argument("leaf restriction: zero-dimensional leaf at the base point");
    TimeDependentHamiltonian FL = restrict_to_leaf(F, L);

    // The leaf plane is forced into the ambient lattice and refinement is off,
    // so every leaf lattice value is also an ambient lattice value and the
    // inequality holds sample by sample.
    OscillationGrid ambient = OscillationGrid::uniform(F.support(), resolution, simpson_nodes,
                                                       false);
    std::vector<bool> on_leaf(P.dim(), false);
    for (int a : L.axes) on_leaf[a] = true;
    for (int i = 0; i < P.dim(); ++i)
        if (!on_leaf[i]) ambient.insert_axis_value(i, L.base_point[i]);

    OscillationGrid leaf_grid;
    leaf_grid.simpson_nodes = simpson_nodes;
    leaf_grid.refine = false;
    for (int a : L.axes) leaf_grid.axis_nodes.push_back(ambient.axis_nodes[a]);

    LeafRestrictionReport rep;
    rep.ambient_length = hofer_length(F, ambient, jobs);
    rep.leaf_length = hofer_length(FL, leaf_grid, jobs);
    rep.holds = rep.leaf_length <= rep.ambient_length + rep.slack;
    return rep;
}

}  // namespace hoferlab
