#include "hoferlab/scenario.hpp"

#include "hoferlab/expr.hpp"
#include "hoferlab/halton.hpp"
#include "hoferlab/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hoferlab {

namespace {

using nlohmann::json;

uint64_t sub_seed(uint64_t seed, uint64_t salt) { return seed * 1000003ull + salt; }

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_vec(const Vec& v) {
    std::string s = "[";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt_num(v[i]);
    }
    return s + "]";
}

json parse_scenario_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& ex) {
        // Translate the byte offset into a line and column.
        size_t byte = ex.byte > 0 ? ex.byte - 1 : 0;
        byte = std::min(byte, text.size());
        int line = 1, col = 1;
        for (size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioParseError(origin + ": " + ex.what(), line, col);
    }
}

json load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioParseError("cannot open scenario file: " + path, 0, 0);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario_text(text, path);
}

Vec parse_vec(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(std::string(what) + ": expected a number array");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

Box parse_box(const json& j) {
    return Box(parse_vec(j.at("lo"), "box.lo"), parse_vec(j.at("hi"), "box.hi"));
}

Region parse_region(const json& j) {
    if (j.contains("ball")) {
        const json& b = j.at("ball");
        return Region::ball(parse_vec(b.at("center"), "ball.center"), b.at("radius").get<double>());
    }
    if (j.contains("box")) return Region::from_box(parse_box(j.at("box")));
    throw std::invalid_argument("region: expected a 'ball' or 'box' key");
}

TimeProfile parse_profile(const json& e) {
    if (!e.contains("profile")) return TimeProfile::constant();
    std::string text = e.at("profile").get<std::string>();
    if (text == "1") return TimeProfile::constant();
    return TimeProfile::from_expression(text);
}

PoissonStructure parse_structure(const json& j) {
    if (j.is_string()) return structure_from_label(j.get<std::string>());
    if (!j.is_object()) throw std::invalid_argument("structure: expected a label or an object");
    int dim = j.at("dim").get<int>();
    std::vector<BivectorEntry> entries;
    for (const json& ej : j.at("entries")) {
        entries.push_back({ej.at("i").get<int>(), ej.at("j").get<int>(),
                           ej.at("expr").get<std::string>()});
    }
    std::vector<std::string> casimirs;
    if (j.contains("casimirs"))
        for (const json& c : j.at("casimirs")) casimirs.push_back(c.get<std::string>());
    PoissonStructure P = make_custom(dim, entries, j.value("label", std::string("custom")),
                                     casimirs);
    if (j.contains("chart")) P = P.with_chart(parse_box(j.at("chart")));
    return P;
}

TimeDependentHamiltonian parse_hamiltonian(const PoissonStructure& P, const json& j) {
    std::string family = j.at("family").get<std::string>();
    if (family == "zero") return zero_hamiltonian(P.dim());
    if (family == "bump")
        return bump_hamiltonian(parse_vec(j.at("center"), "bump.center"),
                                j.at("radius").get<double>(), j.value("height", 1.0),
                                parse_profile(j));
    if (family == "coordinate_plateau") {
        Plateau plateau(parse_box(j.at("inner")), j.at("ramp").get<double>());
        return coordinate_plateau_hamiltonian(P.dim(), j.at("coordinate").get<int>() - 1,
                                              j.value("coefficient", 1.0), plateau,
                                              parse_profile(j));
    }
    if (family == "translation") {
        Plateau plateau(parse_box(j.at("inner")), j.at("ramp").get<double>());
        Vec velocity = parse_vec(j.at("velocity"), "translation.velocity");
        Vec anchor = j.contains("anchor") ? parse_vec(j.at("anchor"), "translation.anchor")
                                          : Vec(Vec::Zero(P.dim()));
        return translation_hamiltonian(P, velocity, anchor, plateau, parse_profile(j));
    }
    if (family == "rotation") {
        Plateau plateau(parse_box(j.at("inner")), j.at("ramp").get<double>());
        return rotation_hamiltonian(parse_vec(j.at("center"), "rotation.center"),
                                    j.at("rate").get<double>(), plateau, parse_profile(j));
    }
    if (family == "custom") {
        Plateau plateau(parse_box(j.at("inner")), j.at("ramp").get<double>());
        return custom_hamiltonian(P.dim(), j.at("expr").get<std::string>(), plateau,
                                  parse_profile(j));
    }
    throw std::invalid_argument("unknown Hamiltonian family: " + family);
}

IntegratorSpec parse_integrator(const json& e, IntegratorSpec dflt) {
    if (!e.contains("integrator")) return dflt;
    const json& j = e.at("integrator");
    std::string method = j.value("method", std::string("rk45"));
    if (method == "rk4") return IntegratorSpec::fixed(j.value("steps", 256));
    if (method == "rk45") return IntegratorSpec::adaptive(j.value("tol", 1e-10));
    throw std::invalid_argument("integrator method must be rk45 or rk4");
}

GroupoidRealization parse_realization(const PoissonStructure& base, const json& e) {
    const json& j = e.at("realization");
    if (j.is_string()) {
        std::string name = j.get<std::string>();
        if (name == "pair") return pair_groupoid(base);
        if (name == "cotangent_heisenberg") return cotangent_heisenberg();
        throw std::invalid_argument("unknown realization: " + name);
    }
    if (j.is_object() && j.contains("pair")) return pair_groupoid(parse_structure(j.at("pair")));
    throw std::invalid_argument("realization: expected 'pair', 'cotangent_heisenberg' or object");
}

CandidateFamilySpec parse_family(const json& j) {
    CandidateFamilySpec f;
    std::string type = j.at("type").get<std::string>();
    if (type == "translation_cutoff")
        f.type = CandidateFamilySpec::Type::TranslationCutoff;
    else if (type == "rotation_cutoff")
        f.type = CandidateFamilySpec::Type::RotationCutoff;
    else if (type == "custom")
        f.type = CandidateFamilySpec::Type::Custom;
    else
        throw std::invalid_argument("unknown candidate family type: " + type);
    for (const json& b : j.at("bounds")) {
        if (!b.is_array() || b.size() != 2)
            throw std::invalid_argument("family bounds: expected [lo, hi] pairs");
        f.bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
    }
    f.translation_axis = j.value("axis", 0);
    if (f.type == CandidateFamilySpec::Type::Custom) {
        f.expression = j.at("expr").get<std::string>();
        f.custom_inner = parse_box(j.at("inner"));
        f.custom_ramp = j.value("ramp", 0.25);
    }
    return f;
}

SamplerSpec parse_sampler(const json& e, SamplerSpec dflt) {
    if (!e.contains("sampler")) return dflt;
    const json& j = e.at("sampler");
    SamplerSpec s = dflt;
    s.lattice_per_axis = j.value("lattice", s.lattice_per_axis);
    s.halton_points = j.value("halton", s.halton_points);
    s.shell_points = j.value("shell", s.shell_points);
    return s;
}

double tol_of(const json& e, const RunOptions& opts, double dflt) {
    if (e.contains("tol")) return e.at("tol").get<double>();
    if (opts.tol > 0) return opts.tol;
    return dflt;
}

OscillationGrid grid_for(const Box& box, const json& e, const RunOptions& opts,
                         std::string* note) {
    OscillationGrid dflt = default_grid(box);
    int res = e.value("resolution", opts.grid_resolution);
    if (res <= 0) res = static_cast<int>(dflt.axis_nodes[0].size()) - 1;
    int nodes = e.value("nodes", opts.simpson_nodes);
    if (nodes <= 0) nodes = dflt.simpson_nodes;
    bool refine = e.value("refine", true);
    if (note) *note = "res=" + std::to_string(res) + ";nodes=" + std::to_string(nodes);
    return OscillationGrid::uniform(box, res, nodes, refine);
}

Box default_probe_box(const PoissonStructure& P) {
    // Quarter-size box around the chart center: far enough from the chart
    // edge that probe flows stay inside.
    Vec c = P.chart_box().center();
    Vec half = 0.25 * 0.5 * P.chart_box().extent();
    return Box(c - half, c + half);
}

// --- Operation handlers ----------------------------------------------------

void op_sharp(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
              ReportRecord& rec) {
    Vec x = parse_vec(e.at("at"), "at");
    Vec alpha = parse_vec(e.at("covector"), "covector");
    double tol = tol_of(e, opts, 1e-10);
    if (dry) return;
    Vec v = sharp(P, Covector{x, alpha});
    double worst = 0.0;
    for (int i = 0; i < P.dim(); ++i) {
        Vec beta = Vec::Zero(P.dim());
        beta[i] = 1.0;
        worst = std::max(worst, sharp_identity_residual(P, x, alpha, beta));
    }
    Halton dirs(P.dim(), sub_seed(opts.seed, 3));
    for (int i = 0; i < 8; ++i) {
        Vec beta = 2.0 * dirs.next() - Vec::Ones(P.dim());
        worst = std::max(worst, sharp_identity_residual(P, x, alpha, beta));
    }
    rec.value = worst;
    rec.status = worst <= tol ? "ok" : "fail";
    rec.diagnostics = "sharp=" + fmt_vec(v);
}

void op_bracket(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                ReportRecord& rec) {
    auto f = expression_field(P.dim(), e.at("f").get<std::string>());
    auto h = expression_field(P.dim(), e.at("h").get<std::string>());
    Vec x = parse_vec(e.at("at"), "at");
    (void)opts;
    if (dry) return;
    double fh = poisson_bracket(P, *f, *h, x);
    double hf = poisson_bracket(P, *h, *f, x);
    rec.value = fh;
    rec.status = fh + hf == 0.0 ? "ok" : "fail";
    rec.diagnostics = "antisymmetry_defect=" + fmt_num(fh + hf);
    if (e.contains("expect")) {
        double want = e.at("expect").get<double>();
        double tol = tol_of(e, opts, 1e-6);
        if (std::abs(fh - want) > tol) rec.status = "fail";
        rec.diagnostics += ";expected=" + fmt_num(want);
    }
}

void op_hamiltonian_field(const PoissonStructure& P, const json& e, const RunOptions& opts,
                          bool dry, ReportRecord& rec) {
    auto f = expression_field(P.dim(), e.at("f").get<std::string>());
    Vec x = parse_vec(e.at("at"), "at");
    (void)opts;
    if (dry) return;
    Vec X = hamiltonian_vector_field(P, *f, x);
    rec.value = X.norm();
    rec.diagnostics = "field=" + fmt_vec(X);
}

void op_jacobi(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
               ReportRecord& rec) {
    Vec x = parse_vec(e.at("at"), "at");
    std::string expect = e.value("expect", std::string("pass"));
    double tol = tol_of(e, opts, 1e-9);
    double threshold = e.value("threshold", 1e-3);
    ScalarFieldPtr f, g, h;
    if (e.contains("fields")) {
        const json& trio = e.at("fields");
        f = expression_field(P.dim(), trio.at(0).get<std::string>());
        g = expression_field(P.dim(), trio.at(1).get<std::string>());
        h = expression_field(P.dim(), trio.at(2).get<std::string>());
    }
    if (dry) return;
    double r = f ? jacobi_residual(P, *f, *g, *h, x) : jacobi_residual_coordinates(P, x);
    rec.value = r;
    if (expect == "violate") {
        rec.status = r >= threshold ? "ok" : "fail";
        rec.diagnostics = "expected a violation above " + fmt_num(threshold);
    } else {
        rec.status = r <= tol ? "ok" : "fail";
    }
}

void op_leaf_at(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                ReportRecord& rec) {
    Vec x = parse_vec(e.at("at"), "at");
    (void)opts;
    if (dry) return;
    LeafChart L = leaf_at(P, x);
    rec.value = L.dimension;
    std::string axes;
    for (size_t i = 0; i < L.axes.size(); ++i) {
        if (i) axes += ",";
        axes += std::to_string(L.axes[i] + 1);
    }
    rec.diagnostics = "axes=[" + axes + "]";
    if (L.dimension == 2 && L.has_affine_chart)
        rec.diagnostics += ";area_factor=" + fmt_num(L.area_factor());
    if (e.contains("expect_dimension") &&
        e.at("expect_dimension").get<int>() != L.dimension)
        rec.status = "fail";
}

void op_restrict_to_leaf(const PoissonStructure& P, const json& e, const RunOptions& opts,
                         bool dry, ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    Vec x = parse_vec(e.at("at"), "at");
    int samples = e.value("samples", 32);
    if (dry) return;
    LeafChart L = leaf_at(P, x);
    TimeDependentHamiltonian FL = restrict_to_leaf(F, L);
    Halton gen(L.dimension, sub_seed(opts.seed, 7));
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec u = gen.next_in_box(FL.support());
        for (double t : {0.0, 0.5, 1.0})
            worst = std::max(worst, std::abs(FL.value(t, u) - F.value(t, L.embed(u))));
    }
    rec.value = worst;
    rec.status = worst == 0.0 ? "ok" : "fail";
    rec.diagnostics = "leaf_dim=" + std::to_string(L.dimension);
}

void op_integrate(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                  ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    Vec x = parse_vec(e.at("at"), "at");
    double time = e.value("time", 1.0);
    IntegratorSpec spec = parse_integrator(e, IntegratorSpec::adaptive(1e-10));
    if (dry) return;
    Isotopy iso(P, F, spec);
    Vec y = iso.evaluate(time, x);
    rec.diagnostics = "endpoint=" + fmt_vec(y);
    if (e.contains("expect")) {
        Vec want = parse_vec(e.at("expect"), "expect");
        double tol = tol_of(e, opts, 1e-8);
        rec.value = (y - want).cwiseAbs().maxCoeff();
        rec.status = *rec.value <= tol ? "ok" : "fail";
    } else {
        rec.value = (y - x).norm();
    }
}

void op_compose(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("F"));
    TimeDependentHamiltonian H = parse_hamiltonian(P, e.at("H"));
    Vec x = parse_vec(e.at("at"), "at");
    double tol = tol_of(e, opts, 1e-6);
    IntegratorSpec outer = parse_integrator(e, IntegratorSpec::adaptive(1e-9));
    if (dry) return;
    TimeDependentHamiltonian K = compose_hamiltonians(P, F, H);
    Vec via_product = Isotopy(P, K, outer).evaluate(1.0, x);
    Vec via_chain = Isotopy(P, F, outer).evaluate(1.0, Isotopy(P, H, outer).evaluate(1.0, x));
    rec.value = (via_product - via_chain).cwiseAbs().maxCoeff();
    rec.status = *rec.value <= tol ? "ok" : "fail";
}

void op_inverse(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("F"));
    Vec x = parse_vec(e.at("at"), "at");
    double tol = tol_of(e, opts, 1e-6);
    IntegratorSpec outer = parse_integrator(e, IntegratorSpec::adaptive(1e-9));
    if (dry) return;
    TimeDependentHamiltonian Fbar = inverse_hamiltonian(P, F);
    Vec forward = Isotopy(P, F, outer).evaluate(1.0, x);
    Vec back = Isotopy(P, Fbar, outer).evaluate(1.0, forward);
    rec.value = (back - x).cwiseAbs().maxCoeff();
    rec.status = *rec.value <= tol ? "ok" : "fail";
}

void op_pullback(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                 ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("F"));
    TimeDependentHamiltonian G = parse_hamiltonian(P, e.at("G"));
    Vec x = parse_vec(e.at("at"), "at");
    double tol = tol_of(e, opts, 1e-6);
    IntegratorSpec outer = parse_integrator(e, IntegratorSpec::adaptive(1e-9));
    if (dry) return;
    PoissonAutomorphism f = PoissonAutomorphism::time_one(Isotopy(P, G, inner_flow_spec()));
    TimeDependentHamiltonian K = pullback_hamiltonian(P, f, F);
    Vec via_pullback = Isotopy(P, K, outer).evaluate(1.0, x);
    Vec via_conjugation = f.apply_inverse(Isotopy(P, F, outer).evaluate(1.0, f.apply(x)));
    rec.value = (via_pullback - via_conjugation).cwiseAbs().maxCoeff();
    rec.status = *rec.value <= tol ? "ok" : "fail";
}

void op_reparametrize(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                      ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    std::string which = e.value("reparam", std::string("square"));
    double tol = tol_of(e, opts, 1e-6);
    TimeReparam sigma = TimeReparam::identity();
    if (which == "square")
        sigma = TimeReparam::square();
    else if (which == "cosine_step")
        sigma = TimeReparam::cosine_step();
    else if (which.rfind("boundary_flat:", 0) == 0)
        sigma = TimeReparam::boundary_flat(std::stod(which.substr(14)));
    else if (which != "identity")
        throw std::invalid_argument("unknown reparam: " + which);
    std::string note;
    if (dry) return;
    TimeDependentHamiltonian Fs = reparametrize(F, sigma);
    OscillationGrid grid = grid_for(F.support(), e, opts, &note);
    rec.grid = note;
    double l0 = hofer_length(F, grid, opts.jobs ? opts.jobs : default_jobs());
    // The reparametrized Hamiltonian is genuinely time dependent even when F
    // is not, so force the full quadrature on both.
    TimeDependentHamiltonian F_full = F;
    F_full.mark_autonomous(false);
    double l1 = hofer_length(Fs, grid, opts.jobs ? opts.jobs : default_jobs());
    double l0_full = hofer_length(F_full, grid, opts.jobs ? opts.jobs : default_jobs());
    rec.lower = l1;
    rec.upper = l0_full;
    rec.value = std::abs(l1 - l0_full);
    rec.status = *rec.value <= tol ? "ok" : "fail";
    rec.diagnostics = "length=" + fmt_num(l0) + ";reparam=" + which;
}

void op_flatten_boundary(const PoissonStructure& P, const json& e, const RunOptions& opts,
                         bool dry, ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    double delta = e.value("delta", 0.1);
    double tol = tol_of(e, opts, 1e-6);
    if (dry) return;
    TimeDependentHamiltonian Fs = flatten_boundary(F, delta);
    Halton gen(P.dim(), sub_seed(opts.seed, 13));
    double edge = 0.0;
    for (int i = 0; i < 64; ++i) {
        Vec x = gen.next_in_box(F.support());
        for (double t : {0.0, 0.25 * delta, 0.5 * delta, 1.0 - 0.5 * delta, 1.0})
            edge = std::max(edge, std::abs(Fs.value(t, x)));
    }
    std::string note;
    OscillationGrid grid = grid_for(F.support(), e, opts, &note);
    rec.grid = note;
    TimeDependentHamiltonian F_full = F;
    F_full.mark_autonomous(false);
    int jobs = opts.jobs ? opts.jobs : default_jobs();
    double l0 = hofer_length(F_full, grid, jobs);
    double l1 = hofer_length(Fs, grid, jobs);
    rec.value = edge;
    rec.lower = l1;
    rec.upper = l0;
    rec.status = (edge == 0.0 && std::abs(l1 - l0) <= tol) ? "ok" : "fail";
    rec.diagnostics = "length_defect=" + fmt_num(std::abs(l1 - l0));
}

void op_oscillation(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                    ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    double t = e.value("time", 0.0);
    std::string note;
    if (dry) return;
    OscillationGrid grid = grid_for(F.support(), e, opts, &note);
    rec.grid = note;
    rec.value = oscillation(F, t, grid, opts.jobs ? opts.jobs : default_jobs());
    if (e.contains("expect")) {
        double want = e.at("expect").get<double>();
        double tol = tol_of(e, opts, 1e-6);
        rec.status = std::abs(*rec.value - want) <= tol ? "ok" : "fail";
        rec.diagnostics = "expected=" + fmt_num(want);
    }
}

void op_length(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
               ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    std::string note;
    if (dry) return;
    OscillationGrid grid = grid_for(F.support(), e, opts, &note);
    rec.grid = note;
    rec.value = hofer_length(F, grid, opts.jobs ? opts.jobs : default_jobs());
    if (e.contains("expect")) {
        double want = e.at("expect").get<double>();
        double tol = tol_of(e, opts, 1e-6);
        rec.status = std::abs(*rec.value - want) <= tol ? "ok" : "fail";
        rec.diagnostics = "expected=" + fmt_num(want);
    }
}

void op_check_displaced(const PoissonStructure& P, const json& e, const RunOptions& opts,
                        bool dry, ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    Region U = parse_region(e.at("region"));
    SamplerSpec sampler = parse_sampler(e, SamplerSpec{});
    bool expect_displaced = e.value("expect_displaced", true);
    IntegratorSpec spec = parse_integrator(e, IntegratorSpec::adaptive(1e-9));
    if (dry) return;
    Isotopy iso(P, F, spec);
    DisplacedReport rep = check_displaced(iso, U, sampler, opts.jobs ? opts.jobs : default_jobs());
    rec.value = rep.margin;
    rec.margin = rep.margin;
    rec.grid = "lattice=" + std::to_string(sampler.lattice_per_axis) +
               ";halton=" + std::to_string(sampler.halton_points);
    rec.status = rep.displaced == expect_displaced ? "ok" : "fail";
    rec.diagnostics = std::string("displaced=") + (rep.displaced ? "yes" : "no") +
                      ";verified=" + (rep.margin_verified ? "yes" : "no") +
                      ";samples=" + std::to_string(rep.samples);
}

void op_displacement_upper_bound(const PoissonStructure& P, const json& e,
                                 const RunOptions& opts, bool dry, ReportRecord& rec) {
    DisplacementExperiment exp;
    exp.U = parse_region(e.at("region"));
    exp.family = parse_family(e.at("family"));
    if (e.contains("budget")) {
        const json& b = e.at("budget");
        exp.budget.coarse_per_axis = b.value("coarse", exp.budget.coarse_per_axis);
        exp.budget.nm_starts = b.value("starts", exp.budget.nm_starts);
        exp.budget.nm_max_evals = b.value("evals", exp.budget.nm_max_evals);
        exp.budget.margin_floor = b.value("margin_floor", exp.budget.margin_floor);
    }
    exp.integrator = parse_integrator(e, IntegratorSpec::adaptive(1e-9));
    if (e.contains("warm_starts"))
        for (const json& w : e.at("warm_starts"))
            exp.warm_starts.push_back(w.get<std::vector<double>>());
    bool expect_feasible = e.value("expect_feasible", true);
    if (dry) return;
    HoferEstimate est = displacement_upper_bound(P, exp, opts.jobs ? opts.jobs : default_jobs());
    rec.value = est.upper;
    rec.upper = est.upper;
    rec.witness_params = est.witness;
    if (est.feasible) rec.margin = est.witness_check.margin;
    rec.status = est.feasible == expect_feasible ? "ok" : "fail";
    rec.diagnostics = "evaluations=" + std::to_string(est.evaluations) +
                      (est.notes.empty() ? "" : ";" + est.notes);
}

void op_gromov_width_lower(const PoissonStructure& P, const json& e, const RunOptions& opts,
                           bool dry, ReportRecord& rec) {
    Region U = parse_region(e.at("region"));
    (void)opts;
    if (dry) return;
    std::optional<LeafChart> leaf;
    if (e.contains("leaf_at")) leaf = leaf_at(P, parse_vec(e.at("leaf_at"), "leaf_at"));
    double w = gromov_width_lower(P, U, leaf);
    rec.value = w;
    rec.lower = w;
    if (e.contains("expect")) {
        double want = e.at("expect").get<double>();
        double tol = tol_of(e, opts, 1e-9);
        rec.status = std::abs(w - want) <= tol ? "ok" : "fail";
        rec.diagnostics = "expected=" + fmt_num(want);
    }
}

void op_energy_capacity_check(const PoissonStructure& P, const json& e, const RunOptions& opts,
                              bool dry, ReportRecord& rec) {
    Region U = parse_region(e.at("region"));
    HoferEstimate est;
    bool searched = e.contains("family");
    DisplacementExperiment exp;
    if (searched) {
        exp.U = U;
        exp.family = parse_family(e.at("family"));
        if (e.contains("budget")) {
            const json& b = e.at("budget");
            exp.budget.coarse_per_axis = b.value("coarse", exp.budget.coarse_per_axis);
            exp.budget.nm_starts = b.value("starts", exp.budget.nm_starts);
            exp.budget.nm_max_evals = b.value("evals", exp.budget.nm_max_evals);
            exp.budget.margin_floor = b.value("margin_floor", exp.budget.margin_floor);
        }
    } else if (e.contains("upper")) {
        est.upper = e.at("upper").get<double>();
        est.feasible = true;
    }
    if (dry) return;
    if (searched)
        est = displacement_upper_bound(P, exp, opts.jobs ? opts.jobs : default_jobs());
    CapacityReport rep = energy_capacity_check(P, U, est);
    rec.value = rep.half_capacity;
    rec.lower = rep.half_capacity;
    rec.upper = rep.upper;
    rec.status = rep.holds ? "ok" : "fail";
    rec.diagnostics = "capacity=" + fmt_num(rep.capacity);
}

void op_leaf_restriction_check(const PoissonStructure& P, const json& e, const RunOptions& opts,
                               bool dry, ReportRecord& rec) {
    TimeDependentHamiltonian F = parse_hamiltonian(P, e.at("hamiltonian"));
    Vec x = parse_vec(e.at("at"), "at");
    int res = e.value("resolution", opts.grid_resolution > 0 ? opts.grid_resolution : 16);
    int nodes = e.value("nodes", opts.simpson_nodes > 0 ? opts.simpson_nodes : 33);
    if (dry) return;
    LeafRestrictionReport rep =
        leaf_restriction_check(P, F, x, res, nodes, opts.jobs ? opts.jobs : default_jobs());
    rec.grid = "res=" + std::to_string(res) + ";nodes=" + std::to_string(nodes);
    rec.lower = rep.leaf_length;
    rec.upper = rep.ambient_length;
    rec.value = rep.ambient_length - rep.leaf_length;
    rec.status = rep.holds ? "ok" : "fail";
}

void realization_residuals(const GroupoidRealization& G, const json& e, const RunOptions& opts,
                           ReportRecord& rec, double extra_residual) {
    int samples = e.value("samples", 200);
    double tol = tol_of(e, opts, 1e-6);
    double s_res = source_morphism_residual(G, samples, sub_seed(opts.seed, 17));
    double t_res = target_antimorphism_residual(G, samples, sub_seed(opts.seed, 18));
    double u_res = unit_section_residual(G, samples, sub_seed(opts.seed, 29));
    double worst = std::max({s_res, t_res, u_res, extra_residual});
    rec.value = worst;
    rec.status = worst <= tol ? "ok" : "fail";
    rec.diagnostics = "source=" + fmt_num(s_res) + ";target=" + fmt_num(t_res) +
                      ";unit=" + fmt_num(u_res);
}

void op_pair_groupoid(const PoissonStructure& P, const json& e, const RunOptions& opts, bool dry,
                      ReportRecord& rec) {
    if (dry) return;
    GroupoidRealization G = pair_groupoid(P);
    realization_residuals(G, e, opts, rec, 0.0);
}

void op_cotangent_heisenberg(const PoissonStructure&, const json& e, const RunOptions& opts,
                             bool dry, ReportRecord& rec) {
    if (dry) return;
    GroupoidRealization G = cotangent_heisenberg();
    // Momentum coordinates reproduce the base bracket relations through the
    // realization: {mu1, mu2} = mu3 at sampled points.
    auto mu1 = coordinate_field(6, 3);
    auto mu2 = coordinate_field(6, 4);
    Halton gen(6, sub_seed(opts.seed, 31));
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
        Vec g = gen.next_in_box(G.total.chart_box());
        worst = std::max(worst, std::abs(poisson_bracket(G.total, *mu1, *mu2, g) - g[5]));
        worst = std::max(worst, jacobi_residual_coordinates(G.total, g));
    }
    realization_residuals(G, e, opts, rec, worst);
    rec.diagnostics += ";bracket_and_jacobi=" + fmt_num(worst);
}

void op_lift_hamiltonian(const PoissonStructure& P, const json& e, const RunOptions& opts,
                         bool dry, ReportRecord& rec) {
    GroupoidRealization G = parse_realization(P, e);
    TimeDependentHamiltonian F = parse_hamiltonian(G.base, e.at("hamiltonian"));
    if (dry) return;
    TimeDependentHamiltonian lifted = lift_hamiltonian(G, F);
    Box probe = e.contains("sample_box") ? parse_box(e.at("sample_box"))
                                         : default_probe_box(G.total);
    Halton gen(G.total.dim(), sub_seed(opts.seed, 19));
    double worst = 0.0;
    for (int i = 0; i < 128; ++i) {
        Vec g = gen.next_in_box(probe);
        for (double t : {0.0, 0.5, 1.0})
            worst = std::max(worst, std::abs(lifted.value(t, g) - F.value(t, G.source(g))));
    }
    rec.value = worst;
    rec.status = (worst == 0.0 && !lifted.compact()) ? "ok" : "fail";
    rec.diagnostics = std::string("compact=") + (lifted.compact() ? "yes" : "no");
}

void op_check_projection(const PoissonStructure& P, const json& e, const RunOptions& opts,
                         bool dry, ReportRecord& rec) {
    GroupoidRealization G = parse_realization(P, e);
    TimeDependentHamiltonian F = parse_hamiltonian(G.base, e.at("hamiltonian"));
    RealizationProbe probe;
    probe.sample_box = e.contains("sample_box") ? parse_box(e.at("sample_box"))
                                                : default_probe_box(G.total);
    probe.point_samples = e.value("samples", 50);
    probe.seed = sub_seed(opts.seed, 5);
    double tol = tol_of(e, opts, 1e-6);
    if (dry) return;
    double r = check_projection(G, F, probe, opts.jobs ? opts.jobs : default_jobs());
    rec.value = r;
    rec.status = r <= tol ? "ok" : "fail";
}

void op_check_target_fibers(const PoissonStructure& P, const json& e, const RunOptions& opts,
                            bool dry, ReportRecord& rec) {
    GroupoidRealization G = parse_realization(P, e);
    TimeDependentHamiltonian F = parse_hamiltonian(G.base, e.at("hamiltonian"));
    RealizationProbe probe;
    probe.sample_box = e.contains("sample_box") ? parse_box(e.at("sample_box"))
                                                : default_probe_box(G.total);
    probe.point_samples = e.value("samples", 50);
    probe.seed = sub_seed(opts.seed, 5);
    double tol = tol_of(e, opts, 1e-6);
    if (dry) return;
    double r = check_target_fibers(G, F, probe, opts.jobs ? opts.jobs : default_jobs());
    rec.value = r;
    rec.status = r <= tol ? "ok" : "fail";
}

void op_cutoff_hamiltonian(const PoissonStructure& P, const json& e, const RunOptions& opts,
                           bool dry, ReportRecord& rec) {
    GroupoidRealization G = parse_realization(P, e);
    TimeDependentHamiltonian F = parse_hamiltonian(G.base, e.at("hamiltonian"));
    CutoffSpec cutoff;
    cutoff.inner = parse_box(e.at("inner"));
    cutoff.ramp = e.value("ramp", 0.15);
    cutoff.table_nodes = e.value("table_nodes", 17);
    cutoff.steps_per_interval = e.value("steps_per_interval", 2);
    double tol = tol_of(e, opts, 1e-6);
    if (dry) return;
    int jobs = opts.jobs ? opts.jobs : default_jobs();
    TimeDependentHamiltonian Fcut = cutoff_hamiltonian(G, F, cutoff);

    // Pointwise domination |F_cut| <= |F o s| on samples.
    Halton gen(G.total.dim(), sub_seed(opts.seed, 23));
    double domination = 0.0;
    int dom_samples = e.value("domination_samples", 96);
    for (int i = 0; i < dom_samples; ++i) {
        Vec g = gen.next_in_box(Fcut.support());
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            double excess =
                std::abs(Fcut.value(t, g)) - std::abs(F.value(t, G.source(g)));
            domination = std::max(domination, excess);
        }
    }

    // Length comparison: the cutoff is priced on a point cloud, the base
    // Hamiltonian on its default grid.
    std::vector<Vec> cloud =
        sample_cloud(Fcut.support(), e.value("cloud_lattice", 4),
                     e.value("cloud_halton", 192), sub_seed(opts.seed, 37));
    double cut_len = sampled_length(Fcut, cloud, 33, jobs);
    double base_len = hofer_length(F, default_grid(F.support()), jobs);
    rec.lower = cut_len;
    rec.upper = base_len;
    rec.value = cut_len;
    bool ok = domination <= 0.0 && cut_len <= base_len + tol;
    rec.diagnostics = "domination_excess=" + fmt_num(domination) +
                      ";cloud=" + std::to_string(cloud.size());

    if (e.contains("displace")) {
        const json& d = e.at("displace");
        Region B = parse_region(d.at("region"));
        SamplerSpec sampler = parse_sampler(d, SamplerSpec{5, 96, 48, 0.999});
        IntegratorSpec spec = IntegratorSpec::fixed(d.value("flow_steps", 48));
        Isotopy iso(G.total, Fcut, spec);
        DisplacedReport rep = check_displaced(iso, B, sampler, jobs);
        rec.margin = rep.margin;
        ok = ok && rep.displaced && rep.margin_verified;
        rec.diagnostics += std::string(";displaced=") + (rep.displaced ? "yes" : "no") +
                           ";verified=" + (rep.margin_verified ? "yes" : "no");
    }
    rec.status = ok ? "ok" : "fail";
}

using OpHandler = void (*)(const PoissonStructure&, const json&, const RunOptions&, bool,
                           ReportRecord&);

const std::vector<std::pair<std::string, OpHandler>>& op_table() {
    static const std::vector<std::pair<std::string, OpHandler>> table = {
        {"sharp", op_sharp},
        {"bracket", op_bracket},
        {"hamiltonian_field", op_hamiltonian_field},
        {"jacobi_residual", op_jacobi},
        {"leaf_at", op_leaf_at},
        {"restrict_to_leaf", op_restrict_to_leaf},
        {"integrate", op_integrate},
        {"compose", op_compose},
        {"inverse", op_inverse},
        {"pullback", op_pullback},
        {"reparametrize", op_reparametrize},
        {"flatten_boundary", op_flatten_boundary},
        {"oscillation", op_oscillation},
        {"length", op_length},
        {"check_displaced", op_check_displaced},
        {"displacement_upper_bound", op_displacement_upper_bound},
        {"gromov_width_lower", op_gromov_width_lower},
        {"energy_capacity_check", op_energy_capacity_check},
        {"leaf_restriction_check", op_leaf_restriction_check},
        {"pair_groupoid", op_pair_groupoid},
        {"cotangent_heisenberg", op_cotangent_heisenberg},
        {"lift_hamiltonian", op_lift_hamiltonian},
        {"check_projection", op_check_projection},
        {"check_target_fibers", op_check_target_fibers},
        {"cutoff_hamiltonian", op_cutoff_hamiltonian},
    };
    return table;
}

OpHandler find_op(const std::string& name) {
    for (const auto& [op, fn] : op_table())
        if (op == name) return fn;
    throw std::invalid_argument("unknown op: " + name);
}

}  // namespace

namespace {

std::vector<ReportRecord> run_scenario_doc(const json& doc, const RunOptions& opts,
                                           const std::string& origin) {
    if (!doc.is_object() || !doc.contains("experiments") || !doc["experiments"].is_array())
        throw ScenarioParseError(origin + ": scenario needs an 'experiments' array", 1, 1);
    const std::string sid = doc.value("id", std::string("scenario"));
    const json default_structure =
        doc.contains("structure") ? doc["structure"] : json("symplectic2n:1");
    const json& exps = doc["experiments"];

    // Validation pass: parse every experiment before running any.
    for (size_t k = 0; k < exps.size(); ++k) {
        try {
            const json& e = exps[k];
            PoissonStructure P =
                parse_structure(e.contains("structure") ? e["structure"] : default_structure);
            ReportRecord scratch;
            find_op(e.at("op").get<std::string>())(P, e, opts, /*dry=*/true, scratch);
        } catch (const ScenarioParseError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ScenarioParseError(
                origin + ": experiment " + std::to_string(k) + ": " + ex.what(), 0, 0);
        }
    }

    std::vector<ReportRecord> records;
    records.reserve(exps.size());
    for (size_t k = 0; k < exps.size(); ++k) {
        const json& e = exps[k];
        ReportRecord rec;
        rec.op = e.at("op").get<std::string>();
        rec.scenario_id =
            sid + ":" + (e.contains("id") ? e["id"].get<std::string>() : std::to_string(k));
        auto t0 = std::chrono::steady_clock::now();
        try {
            PoissonStructure P =
                parse_structure(e.contains("structure") ? e["structure"] : default_structure);
            find_op(rec.op)(P, e, opts, /*dry=*/false, rec);
        } catch (const NotImplementedError& ex) {
            rec.status = "error";
            rec.diagnostics = std::string("not implemented: ") + ex.what();
        } catch (const std::exception& ex) {
            rec.status = "error";
            rec.diagnostics = ex.what();
        }
        rec.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

std::vector<ReportRecord> run_scenario_file(const std::string& path, const RunOptions& opts) {
    return run_scenario_doc(load_scenario(path), opts, path);
}

std::vector<ReportRecord> run_scenario_text(const std::string& text, const RunOptions& opts,
                                            const std::string& origin) {
    return run_scenario_doc(parse_scenario_text(text, origin), opts, origin);
}

std::string describe_scenario_file(const std::string& path) {
    json doc = load_scenario(path);
    if (!doc.is_object() || !doc.contains("experiments") || !doc["experiments"].is_array())
        throw ScenarioParseError(path + ": scenario needs an 'experiments' array", 1, 1);
    std::ostringstream out;
    out << "id: " << doc.value("id", std::string("scenario")) << "\n";
    if (doc.contains("structure") && doc["structure"].is_string())
        out << "structure: " << doc["structure"].get<std::string>() << "\n";
    const json& exps = doc["experiments"];
    out << "experiments: " << exps.size() << "\n";
    for (size_t k = 0; k < exps.size(); ++k) {
        out << "  [" << k << "] " << exps[k].value("op", std::string("?"));
        if (exps[k].contains("id")) out << " (" << exps[k]["id"].get<std::string>() << ")";
        out << "\n";
    }
    return out.str();
}

std::vector<std::string> builtin_structure_labels() {
    return {"symplectic2n:<n>", "heisenberg3", "product2x1"};
}

std::vector<std::string> hamiltonian_family_names() {
    return {"zero", "bump", "coordinate_plateau", "translation", "rotation", "custom"};
}

std::string family_signature(const std::string& name) {
    if (name == "zero") return "zero {}";
    if (name == "bump") return "bump {center, radius, height?, profile?}";
    if (name == "coordinate_plateau")
        return "coordinate_plateau {coordinate (1-based), coefficient?, inner, ramp, profile?}";
    if (name == "translation") return "translation {velocity, anchor?, inner, ramp, profile?}";
    if (name == "rotation") return "rotation {center, rate, inner, ramp, profile?}";
    if (name == "custom") return "custom {expr over x1..xn, inner, ramp, profile?}";
    throw std::invalid_argument("unknown family: " + name);
}

std::vector<std::string> scenario_op_names() {
    std::vector<std::string> names;
    for (const auto& [op, fn] : op_table()) names.push_back(op);
    return names;
}

}  // namespace hoferlab
