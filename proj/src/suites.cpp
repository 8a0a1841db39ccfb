#include "hoferlab/suites.hpp"

#include <stdexcept>

namespace hoferlab {

namespace {

// Bracket and sharp axioms across the built-in structures, plus the twisted
// control bivector that fails the Jacobi identity.
const char* kAxiomsSuite = R"json({
  "id": "suite-axioms",
  "structure": "heisenberg3",
  "experiments": [
    {"op": "sharp", "id": "sharp-symplectic", "structure": "symplectic2n:2",
     "at": [0.3, -0.2, 0.5, 0.1], "covector": [1.0, 2.0, -1.0, 0.5]},
    {"op": "sharp", "id": "sharp-heisenberg",
     "at": [0.4, -0.3, 0.7], "covector": [1.0, -2.0, 0.5]},
    {"op": "bracket", "id": "bracket-darboux", "structure": "symplectic2n:1",
     "f": "x1", "h": "x2", "at": [0.2, -0.4], "expect": 1.0},
    {"op": "bracket", "id": "bracket-heisenberg",
     "f": "x1", "h": "x2", "at": [0.3, 0.2, 0.8], "expect": 0.8},
    {"op": "hamiltonian_field", "id": "field-heisenberg",
     "f": "x1", "at": [0.3, 0.2, 0.8]},
    {"op": "jacobi_residual", "id": "jacobi-symplectic", "structure": "symplectic2n:2",
     "at": [0.3, -0.2, 0.5, 0.1]},
    {"op": "jacobi_residual", "id": "jacobi-heisenberg", "at": [0.4, -0.3, 0.7]},
    {"op": "jacobi_residual", "id": "jacobi-product", "structure": "product2x1",
     "at": [0.1, 0.2, 0.7]},
    {"op": "jacobi_residual", "id": "jacobi-fields",
     "fields": ["x1*x2", "sin(x2)", "x3^2"], "at": [0.4, -0.3, 0.7], "tol": 1e-4},
    {"op": "jacobi_residual", "id": "jacobi-twisted-control",
     "structure": {"dim": 3, "label": "twisted-control",
                   "entries": [{"i": 0, "j": 1, "expr": "x2"},
                               {"i": 1, "j": 2, "expr": "1"}]},
     "at": [0.2, 0.4, -0.3], "expect": "violate", "threshold": 1e-3},
    {"op": "leaf_at", "id": "leaf-generic", "at": [0.2, 0.3, 0.9], "expect_dimension": 2},
    {"op": "leaf_at", "id": "leaf-origin-stratum", "at": [0.2, 0.3, 0.0],
     "expect_dimension": 0},
    {"op": "leaf_at", "id": "leaf-product", "structure": "product2x1",
     "at": [0.1, 0.2, 0.7], "expect_dimension": 2},
    {"op": "restrict_to_leaf", "id": "restrict-bump",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0, 1.0], "radius": 0.5},
     "at": [0.1, -0.1, 1.0]}
  ]
})json";

// Flow generation, group operations and the clock invariance of the length.
const char* kFlowsSuite = R"json({
  "id": "suite-flows",
  "structure": "symplectic2n:1",
  "experiments": [
    {"op": "integrate", "id": "translate-exact",
     "hamiltonian": {"family": "translation", "velocity": [0.6, 0.0],
                     "inner": {"lo": [-0.2, -0.2], "hi": [0.8, 0.2]}, "ramp": 0.3},
     "at": [0.0, 0.0], "time": 1.0, "expect": [0.6, 0.0]},
    {"op": "integrate", "id": "heisenberg-shear", "structure": "heisenberg3",
     "hamiltonian": {"family": "custom", "expr": "x1",
                     "inner": {"lo": [0.0, -0.5, 0.6], "hi": [0.4, 0.7, 1.0]},
                     "ramp": 0.25},
     "at": [0.2, -0.3, 0.8], "time": 1.0, "expect": [0.2, 0.5, 0.8]},
    {"op": "compose", "id": "compose-chain",
     "F": {"family": "bump", "center": [0.1, 0.0], "radius": 0.5, "height": 0.4},
     "H": {"family": "rotation", "center": [0.0, 0.0], "rate": 0.8,
           "inner": {"lo": [-0.4, -0.4], "hi": [0.4, 0.4]}, "ramp": 0.25},
     "at": [0.15, -0.1]},
    {"op": "inverse", "id": "inverse-roundtrip",
     "F": {"family": "translation", "velocity": [0.3, 0.2],
           "inner": {"lo": [-0.5, -0.5], "hi": [0.6, 0.6]}, "ramp": 0.25},
     "at": [0.1, 0.05]},
    {"op": "pullback", "id": "pullback-conjugation",
     "F": {"family": "bump", "center": [0.1, 0.0], "radius": 0.5, "height": 0.4},
     "G": {"family": "rotation", "center": [0.0, 0.0], "rate": 0.5,
           "inner": {"lo": [-0.4, -0.4], "hi": [0.4, 0.4]}, "ramp": 0.25},
     "at": [0.12, -0.08]},
    {"op": "reparametrize", "id": "reparam-square",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.7},
     "reparam": "square"},
    {"op": "reparametrize", "id": "reparam-cosine",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.7},
     "reparam": "cosine_step"},
    {"op": "flatten_boundary", "id": "flatten-bump",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.7},
     "delta": 0.1, "nodes": 257},
    {"op": "oscillation", "id": "bump-oscillation",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.7},
     "time": 0.0, "expect": 0.7},
    {"op": "length", "id": "half-sine-length",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 1.0, "profile": "sin(3.141592653589793*t)"},
     "expect": 0.6366197723675814}
  ]
})json";

// Realizations over the pair construction and the Heisenberg cotangent model.
const char* kGroupoidSuite = R"json({
  "id": "suite-groupoid",
  "structure": "symplectic2n:1",
  "experiments": [
    {"op": "pair_groupoid", "id": "pair-symplectic"},
    {"op": "pair_groupoid", "id": "pair-heisenberg", "structure": "heisenberg3"},
    {"op": "cotangent_heisenberg", "id": "cotangent-model"},
    {"op": "lift_hamiltonian", "id": "lift-bump", "realization": "pair",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.8}},
    {"op": "check_projection", "id": "projection-bump", "realization": "pair",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.8},
     "sample_box": {"lo": [-0.6, -0.6, -0.6, -0.6], "hi": [0.6, 0.6, 0.6, 0.6]},
     "samples": 40},
    {"op": "check_target_fibers", "id": "fibers-bump", "realization": "pair",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.8},
     "sample_box": {"lo": [-0.6, -0.6, -0.6, -0.6], "hi": [0.6, 0.6, 0.6, 0.6]},
     "samples": 40},
    {"op": "cutoff_hamiltonian", "id": "cutoff-bump", "realization": "pair",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0], "radius": 0.4,
                     "height": 0.8},
     "inner": {"lo": [-0.6, -0.6, -0.6, -0.6], "hi": [0.6, 0.6, 0.6, 0.6]},
     "ramp": 0.2, "domination_samples": 64, "cloud_lattice": 3, "cloud_halton": 64}
  ]
})json";

// Displacement energies and capacity comparisons on the disk.
const char* kEnergySuite = R"json({
  "id": "suite-energy",
  "structure": "symplectic2n:1",
  "experiments": [
    {"op": "check_displaced", "id": "disk-translated",
     "hamiltonian": {"family": "translation", "velocity": [1.2, 0.0],
                     "inner": {"lo": [-0.6, -0.6], "hi": [1.8, 0.6]}, "ramp": 0.25},
     "region": {"ball": {"center": [0.0, 0.0], "radius": 0.5}},
     "expect_displaced": true},
    {"op": "check_displaced", "id": "disk-rotated-in-place",
     "hamiltonian": {"family": "rotation", "center": [0.0, 0.0], "rate": 6.283185307179586,
                     "inner": {"lo": [-0.55, -0.55], "hi": [0.55, 0.55]}, "ramp": 0.25},
     "region": {"ball": {"center": [0.0, 0.0], "radius": 0.5}},
     "expect_displaced": false},
    {"op": "displacement_upper_bound", "id": "disk-upper-bound",
     "region": {"ball": {"center": [0.0, 0.0], "radius": 0.5}},
     "family": {"type": "translation_cutoff", "axis": 0,
                "bounds": [[0.0, 1.5], [0.02, 0.12]]},
     "budget": {"coarse": 4, "starts": 2, "evals": 80, "margin_floor": 0.02},
     "warm_starts": [[1.1, 0.03]]},
    {"op": "gromov_width_lower", "id": "disk-width",
     "region": {"ball": {"center": [0.0, 0.0], "radius": 0.5}},
     "expect": 0.7853981633974483},
    {"op": "gromov_width_lower", "id": "heisenberg-leaf-width", "structure": "heisenberg3",
     "region": {"ball": {"center": [0.0, 0.0, 1.0], "radius": 0.4}},
     "leaf_at": [0.0, 0.0, 1.0], "expect": 0.5026548245743669, "tol": 1e-9},
    {"op": "energy_capacity_check", "id": "disk-capacity",
     "region": {"ball": {"center": [0.0, 0.0], "radius": 0.5}},
     "upper": 1.1},
    {"op": "leaf_restriction_check", "id": "heisenberg-restriction",
     "structure": "heisenberg3",
     "hamiltonian": {"family": "bump", "center": [0.0, 0.0, 1.0], "radius": 0.45},
     "at": [0.0, 0.0, 1.0], "resolution": 16, "nodes": 33}
  ]
})json";

const char* suite_text(const std::string& name) {
    if (name == "axioms") return kAxiomsSuite;
    if (name == "flows") return kFlowsSuite;
    if (name == "groupoid") return kGroupoidSuite;
    if (name == "energy") return kEnergySuite;
    throw std::invalid_argument("unknown suite: " + name +
                                " (expected axioms, flows, groupoid or energy)");
}

}  // namespace

std::vector<std::string> suite_names() { return {"axioms", "flows", "groupoid", "energy"}; }

std::vector<ReportRecord> run_suite(const std::string& name, const RunOptions& opts) {
    return run_scenario_text(suite_text(name), opts, "suite:" + name);
}

}  // namespace hoferlab
