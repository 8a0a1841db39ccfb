// Acceptance gate: one pass/fail line per criterion, exit 0 only when all
// criteria hold.  Tolerances are pinned here and nowhere else.

#include "hoferlab/suites.hpp"

#include "hoferlab/halton.hpp"
#include "hoferlab/metric.hpp"
#include "hoferlab/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace hoferlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %02d %-26s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

// --- 1: bracket axioms ------------------------------------------------------

void criterion_bracket_axioms() {
    const double tol = 1e-9;       // Jacobi residual on Poisson structures
    const double floor = 1e-3;     // required violation of the twisted control
    double worst = 0.0;
    for (const char* label : {"symplectic2n:1", "symplectic2n:2", "heisenberg3", "product2x1"}) {
        PoissonStructure P = structure_from_label(label);
        Halton gen(P.dim(), 11);
        Box inner = Box(0.5 * P.chart_box().lo, 0.5 * P.chart_box().hi);
        for (int i = 0; i < 24; ++i)
            worst = std::max(worst, jacobi_residual_coordinates(P, gen.next_in_box(inner)));
    }

    PoissonStructure bad = make_custom(3, {{0, 1, "x2"}, {1, 2, "1"}}, "twisted-control");
    double control = 1e300;
    Halton gen(3, 13);
    Box inner(vec3(-1, -1, -1), vec3(1, 1, 1));
    for (int i = 0; i < 24; ++i)
        control = std::min(control, jacobi_residual_coordinates(bad, gen.next_in_box(inner)));

    bool pass = worst < tol && control > floor;
    report(1, "bracket-axioms", pass,
           "max residual " + fmt(worst) + " (tol " + fmt(tol) + "), control min " +
               fmt(control) + " (floor " + fmt(floor) + ")");
}

// --- 2: closed-form flow oracles ---------------------------------------------

void criterion_flow_oracles() {
    const double tol = 1e-8;
    double worst = 0.0;

    PoissonStructure P = make_standard_symplectic(1);
    {
        Plateau plateau(Box(vec2(-0.3, -0.3), vec2(0.8, 0.3)), 0.25);
        TimeDependentHamiltonian F =
            translation_hamiltonian(P, vec2(0.5, 0.0), vec2(0.0, 0.0), plateau);
        Isotopy iso(P, F);
        for (double t : {0.25, 0.5, 1.0}) {
            Vec y = iso.evaluate(t, vec2(0.0, 0.0));
            worst = std::max(worst, (y - vec2(0.5 * t, 0.0)).cwiseAbs().maxCoeff());
        }
    }
    {
        double omega = 0.8;
        Plateau plateau(Box(vec2(-0.4, -0.4), vec2(0.4, 0.4)), 0.2);
        TimeDependentHamiltonian F = rotation_hamiltonian(vec2(0.0, 0.0), omega, plateau);
        Isotopy iso(P, F);
        Vec x0 = vec2(0.2, 0.1);
        for (double t : {0.5, 1.0}) {
            double a = omega * t;
            Vec want = vec2(x0[0] * std::cos(a) - x0[1] * std::sin(a),
                            x0[0] * std::sin(a) + x0[1] * std::cos(a));
            worst = std::max(worst, (iso.evaluate(t, x0) - want).cwiseAbs().maxCoeff());
        }
    }
    {
        PoissonStructure H = make_heisenberg();
        Plateau plateau(Box(vec3(0.0, -0.5, 0.6), vec3(0.4, 0.7, 1.0)), 0.25);
        TimeDependentHamiltonian F = custom_hamiltonian(3, "x1", plateau);
        Isotopy iso(H, F);
        Vec y = iso.evaluate(1.0, vec3(0.2, -0.3, 0.8));
        worst = std::max(worst, (y - vec3(0.2, 0.5, 0.8)).cwiseAbs().maxCoeff());
    }

    report(2, "flow-oracles", worst < tol,
           "max endpoint error " + fmt(worst) + " (tol " + fmt(tol) + ")");
}

// --- 3: conserved quantities ---------------------------------------------------

void criterion_conserved_quantities() {
    const double casimir_tol = 1e-8;
    const double energy_tol = 1e-7;
    double casimir_drift = 0.0;
    double energy_drift = 0.0;

    {
        PoissonStructure H = make_heisenberg();
        TimeDependentHamiltonian F = bump_hamiltonian(vec3(0.1, 0.0, 0.9), 0.45, 0.6);
        Isotopy iso(H, F);
        auto casimir = H.casimirs().at(0);
        for (Vec x0 : {vec3(0.2, 0.1, 0.8), vec3(0.0, -0.2, 1.1), vec3(0.3, 0.2, 0.7)}) {
            double before_c = casimir->value(x0);
            double before_e = F.value(0.0, x0);
            for (double t : {0.5, 1.0}) {
                Vec y = iso.evaluate(t, x0);
                casimir_drift = std::max(casimir_drift, std::abs(casimir->value(y) - before_c));
                energy_drift = std::max(energy_drift, std::abs(F.value(0.0, y) - before_e));
            }
        }
    }
    {
        PoissonStructure P = make_product2x1();
        TimeDependentHamiltonian F = bump_hamiltonian(vec3(0.0, 0.0, 0.5), 0.4, 0.5);
        Isotopy iso(P, F);
        auto casimir = P.casimirs().at(0);
        Vec x0 = vec3(0.1, -0.1, 0.45);
        double before = casimir->value(x0);
        casimir_drift = std::max(casimir_drift,
                                 std::abs(casimir->value(iso.evaluate(1.0, x0)) - before));
    }

    bool pass = casimir_drift < casimir_tol && energy_drift < energy_tol;
    report(3, "conserved-quantities", pass,
           "casimir drift " + fmt(casimir_drift) + " (tol " + fmt(casimir_tol) +
               "), generator drift " + fmt(energy_drift) + " (tol " + fmt(energy_tol) + ")");
}

// --- 4: group operations --------------------------------------------------------

void criterion_group_operations() {
    const double tol = 1e-6;
    PoissonStructure P = make_standard_symplectic(1);
    // Trajectories of all probes stay inside the rotation plateau, where the
    // map is linear, so discretization of the composed generators converges
    // with a small constant and the law defect is what remains.
    Plateau trans_plateau(Box(vec2(-0.3, -0.3), vec2(0.6, 0.3)), 0.25);
    Plateau rot_plateau(Box(vec2(-0.4, -0.4), vec2(0.4, 0.4)), 0.2);
    TimeDependentHamiltonian F =
        translation_hamiltonian(P, vec2(0.2, 0.0), vec2(0.0, 0.0), trans_plateau);
    TimeDependentHamiltonian H = rotation_hamiltonian(vec2(0.0, 0.0), 0.6, rot_plateau);
    IntegratorSpec spec = IntegratorSpec::adaptive(1e-9);
    // The composed generators evaluate an inner flow inside every field call
    // and take gradients by difference quotients; a fixed-step outer
    // integrator keeps that evaluation noise out of step-size control.
    IntegratorSpec inner = IntegratorSpec::fixed(1024);
    IntegratorSpec outer = IntegratorSpec::fixed(512);

    std::vector<Vec> points = {vec2(0.1, -0.05), vec2(0.0, 0.1), vec2(-0.1, 0.0)};
    double worst = 0.0;

    TimeDependentHamiltonian K = compose_hamiltonians(P, F, H, inner);
    for (const Vec& x : points) {
        Vec lhs = Isotopy(P, K, outer).evaluate(1.0, x);
        Vec rhs = Isotopy(P, F, spec).evaluate(1.0, Isotopy(P, H, spec).evaluate(1.0, x));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    TimeDependentHamiltonian Hbar = inverse_hamiltonian(P, H, inner);
    for (const Vec& x : points) {
        Vec forward = Isotopy(P, H, spec).evaluate(1.0, x);
        Vec back = Isotopy(P, Hbar, outer).evaluate(1.0, forward);
        worst = std::max(worst, (back - x).cwiseAbs().maxCoeff());
    }

    PoissonAutomorphism f = PoissonAutomorphism::time_one(Isotopy(P, H, inner));
    TimeDependentHamiltonian FH = pullback_hamiltonian(P, f, F);
    for (const Vec& x : points) {
        Vec lhs = Isotopy(P, FH, outer).evaluate(1.0, x);
        Vec rhs = f.apply_inverse(Isotopy(P, F, spec).evaluate(1.0, f.apply(x)));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    report(4, "group-operations", worst < tol,
           "max composition defect " + fmt(worst) + " (tol " + fmt(tol) + ")");
}

// --- 5: clock invariance of the length -------------------------------------------

void criterion_clock_invariance() {
    const double tol = 1e-6;
    int jobs = default_jobs();
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.7);
    TimeDependentHamiltonian F_full = F;
    F_full.mark_autonomous(false);
    OscillationGrid grid = default_grid(F.support());
    double base = hofer_length(F_full, grid, jobs);

    double worst = 0.0;
    for (const TimeReparam& sigma : {TimeReparam::identity(), TimeReparam::square(),
                                     TimeReparam::cosine_step()}) {
        double len = hofer_length(reparametrize(F, sigma), grid, jobs);
        worst = std::max(worst, std::abs(len - base));
    }

    // The flattened clock ramps on a 0.1 time scale; resolve it in quadrature.
    OscillationGrid flat_grid = OscillationGrid::uniform(F.support(), 32, 257, true);
    TimeDependentHamiltonian flat = flatten_boundary(F, 0.1);
    worst = std::max(worst,
                     std::abs(hofer_length(flat, flat_grid, jobs) -
                              hofer_length(F_full, flat_grid, jobs)));
    double edge = 0.0;
    Halton gen(2, 23);
    for (int i = 0; i < 64; ++i) {
        Vec x = gen.next_in_box(F.support());
        for (double t : {0.0, 0.05, 0.95, 1.0})
            edge = std::max(edge, std::abs(flat.value(t, x)));
    }

    bool pass = worst < tol && edge == 0.0;
    report(5, "clock-invariance", pass,
           "max length defect " + fmt(worst) + " (tol " + fmt(tol) + "), boundary value " +
               fmt(edge));
}

// --- 6: length algebra ------------------------------------------------------------

void criterion_length_algebra() {
    const double tol = 1e-6;
    int jobs = default_jobs();
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.1, 0.0), 0.5, 0.4);
    Plateau rot_plateau(Box(vec2(-0.4, -0.4), vec2(0.4, 0.4)), 0.2);
    TimeDependentHamiltonian H = rotation_hamiltonian(vec2(0.0, 0.0), 0.6, rot_plateau);

    double lF = hofer_length(F, default_grid(F.support()), jobs);
    double lH = hofer_length(H, default_grid(H.support()), jobs);

    TimeDependentHamiltonian K = compose_hamiltonians(P, F, H);
    OscillationGrid k_grid = OscillationGrid::uniform(K.support(), 32, 65, true);
    double lK = hofer_length(K, k_grid, jobs);
    double triangle_slack = lK - (lF + lH);

    TimeDependentHamiltonian Fbar = inverse_hamiltonian(P, F);
    OscillationGrid inv_grid = OscillationGrid::uniform(Fbar.support(), 32, 65, true);
    double inverse_defect = std::abs(hofer_length(Fbar, inv_grid, jobs) - lF);

    PoissonAutomorphism f = PoissonAutomorphism::time_one(Isotopy(P, H, inner_flow_spec()));
    TimeDependentHamiltonian Ff = pullback_hamiltonian(P, f, F);
    OscillationGrid pull_grid = OscillationGrid::uniform(Ff.support(), 32, 65, true);
    double pullback_defect = std::abs(hofer_length(Ff, pull_grid, jobs) - lF);

    bool pass = triangle_slack <= tol && inverse_defect <= tol && pullback_defect <= tol;
    report(6, "length-algebra", pass,
           "triangle slack " + fmt(triangle_slack) + ", inverse defect " + fmt(inverse_defect) +
               ", pullback defect " + fmt(pullback_defect) + " (tol " + fmt(tol) + ")");
}

// --- 7: leaf monotonicity -----------------------------------------------------------

void criterion_leaf_monotonicity() {
    const int trials = 100;
    int jobs = default_jobs();
    int held = 0;
    double worst_violation = 0.0;
    Halton gen(6, 77);
    for (int i = 0; i < trials; ++i) {
        Vec u = gen.next();
        PoissonStructure P = (i % 2 == 0) ? make_heisenberg() : make_product2x1();
        Vec center = vec3(0.4 * (u[0] - 0.5), 0.4 * (u[1] - 0.5), 0.6 + 0.8 * u[2]);
        double radius = 0.3 + 0.2 * u[3];
        Vec base = vec3(0.3 * (u[4] - 0.5), 0.3 * (u[5] - 0.5),
                        center[2] + radius * (u[0] - 0.5));
        TimeDependentHamiltonian F = bump_hamiltonian(center, radius, 0.5 + u[1]);
        LeafRestrictionReport rep = leaf_restriction_check(P, F, base, 16, 33, jobs);
        if (rep.holds)
            ++held;
        else
            worst_violation = std::max(worst_violation, rep.leaf_length - rep.ambient_length);
    }
    report(7, "leaf-monotonicity", held == trials,
           std::to_string(held) + "/" + std::to_string(trials) + " restrictions within slack" +
               (held == trials ? "" : ", worst violation " + fmt(worst_violation)));
}

// --- 8: displacement energy of the disk ----------------------------------------------

void criterion_disk_displacement() {
    const double lower_window = kPi * 0.25 * 0.5;  // half the disk width: 0.3926...
    const double upper_window = 1.1;
    const double margin_floor = 0.01;
    const double budget_seconds = 60.0;

    auto t0 = std::chrono::steady_clock::now();
    PoissonStructure P = make_standard_symplectic(1);
    DisplacementExperiment exp;
    exp.U = Region::ball(vec2(0.0, 0.0), 0.5);
    exp.family = CandidateFamilySpec::translation(1.5, 0.02, 0.12, 0);
    exp.budget.coarse_per_axis = 8;
    exp.budget.nm_starts = 8;
    exp.budget.nm_max_evals = 200;
    exp.budget.margin_floor = 0.02;
    exp.warm_starts = {{1.1, 0.03}};

    HoferEstimate est = displacement_upper_bound(P, exp, default_jobs());
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool pass = est.feasible && est.upper >= lower_window && est.upper <= upper_window &&
                est.witness_check.displaced && est.witness_check.margin > margin_floor &&
                seconds < budget_seconds;
    std::string witness = est.witness.empty()
                              ? std::string("none")
                              : fmt(est.witness[0]) + "/" + fmt(est.witness[1]);
    report(8, "disk-displacement-energy", pass,
           "upper " + fmt(est.upper) + " in [" + fmt(lower_window) + ", " + fmt(upper_window) +
               "], margin " + fmt(est.witness_check.margin) + ", witness " + witness + ", " +
               fmt(seconds) + "s");
}

// --- 9: realization residuals ----------------------------------------------------------

void criterion_realization_residuals() {
    const double tol = 1e-6;
    int jobs = default_jobs();
    double worst = 0.0;

    for (const char* label : {"symplectic2n:1", "heisenberg3"}) {
        GroupoidRealization G = pair_groupoid(structure_from_label(label));
        worst = std::max({worst, source_morphism_residual(G), target_antimorphism_residual(G),
                          unit_section_residual(G)});
    }

    GroupoidRealization C = cotangent_heisenberg();
    worst = std::max({worst, source_morphism_residual(C), target_antimorphism_residual(C),
                      unit_section_residual(C)});
    auto mu1 = coordinate_field(6, 3);
    auto mu2 = coordinate_field(6, 4);
    Halton gen(6, 31);
    for (int i = 0; i < 32; ++i) {
        Vec g = gen.next_in_box(C.total.chart_box());
        worst = std::max(worst, std::abs(poisson_bracket(C.total, *mu1, *mu2, g) - g[5]));
        worst = std::max(worst, jacobi_residual_coordinates(C.total, g));
    }

    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.8);
    RealizationProbe probe;
    probe.sample_box = Box(Vec(Vec::Constant(4, -0.6)), Vec(Vec::Constant(4, 0.6)));
    probe.point_samples = 40;
    worst = std::max(worst, check_projection(G, F, probe, jobs));
    worst = std::max(worst, check_target_fibers(G, F, probe, jobs));

    report(9, "realization-residuals", worst < tol,
           "max residual " + fmt(worst) + " (tol " + fmt(tol) + ")");
}

// --- 10: cutoff transfer ------------------------------------------------------------------

void criterion_cutoff_transfer() {
    const double length_tol = 1e-6;
    int jobs = default_jobs();

    PoissonStructure base = make_standard_symplectic(1);
    GroupoidRealization G = pair_groupoid(base);
    Plateau plateau(Box(vec2(-0.45, -0.45), vec2(1.65, 0.45)), 0.2);
    TimeDependentHamiltonian F =
        translation_hamiltonian(base, vec2(1.2, 0.0), vec2(0.0, 0.0), plateau);

    CutoffSpec cutoff;
    // The plateau must contain every trajectory of the 4D ball.
    Vec lo(4), hi(4);
    lo << -0.5, -0.5, -0.5, -0.5;
    hi << 0.5, 0.5, 1.7, 0.5;
    cutoff.inner = Box(lo, hi);
    cutoff.ramp = 0.2;
    TimeDependentHamiltonian Fcut = cutoff_hamiltonian(G, F, cutoff);

    // Pointwise domination by the lifted values.
    double excess = 0.0;
    Halton gen(4, 41);
    for (int i = 0; i < 64; ++i) {
        Vec g = gen.next_in_box(Fcut.support());
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
            excess = std::max(excess, std::abs(Fcut.value(t, g)) -
                                          std::abs(F.value(t, G.source(g))));
    }

    // The compactly supported cutoff still displaces the ball.
    Region B = Region::ball(Vec(Vec::Zero(4)), 0.4);
    Isotopy iso(G.total, Fcut, IntegratorSpec::fixed(48));
    SamplerSpec sampler{5, 96, 48, 0.999};
    DisplacedReport rep = check_displaced(iso, B, sampler, jobs);

    // And it is not longer than the base Hamiltonian.
    std::vector<Vec> cloud = sample_cloud(Fcut.support(), 4, 192);
    double cut_len = sampled_length(Fcut, cloud, 33, jobs);
    double base_len = hofer_length(F, default_grid(F.support()), jobs);

    bool pass = Fcut.compact() && excess <= 0.0 && rep.displaced && rep.margin_verified &&
                cut_len <= base_len + length_tol;
    report(10, "cutoff-transfer", pass,
           "domination excess " + fmt(excess) + ", margin " + fmt(rep.margin) + " (cell " +
               fmt(rep.cell) + "), length " + fmt(cut_len) + " <= " + fmt(base_len));
}

// --- 11: deterministic reports --------------------------------------------------------------

void criterion_deterministic_reports() {
    RunOptions opts;
    opts.timings = TimingsMode::Zero;

    auto render = [&]() {
        std::string out;
        for (const auto& name : suite_names())
            for (const auto& r : run_suite(name, opts)) out += to_jsonl(r, TimingsMode::Zero) + "\n";
        return out;
    };

    std::string first = render();
    std::string second = render();
    bool all_ok = first.find("\"status\":\"fail\"") == std::string::npos &&
                  first.find("\"status\":\"error\"") == std::string::npos;
    bool pass = !first.empty() && first == second && all_ok;
    report(11, "deterministic-reports", pass,
           std::string(first == second ? "reruns byte-identical" : "reruns differ") + ", " +
               std::to_string(std::count(first.begin(), first.end(), '\n')) + " records" +
               (all_ok ? ", all ok" : ", contains failures"));
}

}  // namespace

int main() {
    criterion_bracket_axioms();
    criterion_flow_oracles();
    criterion_conserved_quantities();
    criterion_group_operations();
    criterion_clock_invariance();
    criterion_length_algebra();
    criterion_leaf_monotonicity();
    criterion_disk_displacement();
    criterion_realization_residuals();
    criterion_cutoff_transfer();
    criterion_deterministic_reports();

    std::printf("acceptance: %d/11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
