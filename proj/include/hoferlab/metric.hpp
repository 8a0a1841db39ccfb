#pragma once

#include "hoferlab/flows.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hoferlab {

// Spatial lattice plus time quadrature controls for oscillation norms.
// Axis node lists are explicit so a leaf computation can force specific
// coordinate planes into the lattice (making restriction inequalities exact).
struct OscillationGrid {
    std::vector<std::vector<double>> axis_nodes;
    int simpson_nodes = 129;  // odd, >= 33
    bool refine = true;       // golden-section polish around grid extrema
    int refine_sweeps = 3;
    int refine_iters = 24;

    static OscillationGrid uniform(const Box& box, int resolution_per_axis,
                                   int simpson_nodes = 129, bool refine = true);

    // Inserts a coordinate plane; keeps the axis sorted and unique.
    void insert_axis_value(int axis, double value);

    int dim() const { return static_cast<int>(axis_nodes.size()); }
    long lattice_size() const {
        long total = 1;
        for (const auto& nodes : axis_nodes) total *= static_cast<long>(nodes.size());
        return total;
    }
    void validate() const;
};

// Default grid for a support box: denser in low dimension, minimum legal
// resolution in dimension >= 4 where lattices grow fast.
OscillationGrid default_grid(const Box& box);

// max - min of F(t, .) over the lattice (0 always belongs to the value set of
// a compactly supported function), with optional local refinement.
double oscillation(const TimeDependentHamiltonian& F, double t, const OscillationGrid& grid,
                   int jobs = 1);

// Hofer-type length: composite Simpson of t -> oscillation(F, t) over [0,1].
double hofer_length(const TimeDependentHamiltonian& F, const OscillationGrid& grid, int jobs = 1);
double hofer_length(const TimeDependentHamiltonian& F, int jobs = 1);

// --- Displacement ------------------------------------------------------------

struct SamplerSpec {
    int lattice_per_axis = 21;
    int halton_points = 1000;
    int shell_points = 128;      // extra near-boundary samples
    double shell_factor = 0.999;

    static SamplerSpec search_profile() { return {15, 128, 64, 0.999}; }
    static SamplerSpec verify_profile(int dim) {
        if (dim <= 2) return {101, 1000, 256, 0.999};
        if (dim == 3) return {31, 1000, 256, 0.999};
        return {9, 1000, 256, 0.999};
    }
};

struct DisplacedReport {
    bool displaced = false;
    bool margin_verified = false;  // margin at least one sampler cell
    double margin = 0.0;           // min signed distance of flowed samples to U
    double cell = 0.0;
    int samples = 0;
};

// Does the time-1 map of `iso` move U off itself?  Deterministic sampling:
// interior lattice + low-discrepancy fill + near-boundary shell.  The empty
// region is displaced by the identity (infinite margin).
DisplacedReport check_displaced(const Isotopy& iso, const Region& U,
                                const SamplerSpec& sampler = {}, int jobs = 1);

// --- Displacement energy upper bounds ---------------------------------------

struct CandidateFamilySpec {
    enum class Type { TranslationCutoff, RotationCutoff, Custom };
    Type type = Type::TranslationCutoff;
    std::vector<std::pair<double, double>> bounds;  // parameter box

    // TranslationCutoff: params (travel v >= 0, plateau margin w > 0);
    // translates along -axis inside a plateau wrapped around U's sweep.
    int translation_axis = 0;

    // Custom: expression over x1..xn, t, p1..pk, multiplied by a plateau on
    // `custom_inner` with ramp `custom_ramp`.
    std::string expression;
    Box custom_inner;
    double custom_ramp = 0.25;

    static CandidateFamilySpec translation(double max_travel, double min_margin,
                                           double max_margin, int axis = 0) {
        CandidateFamilySpec f;
        f.type = Type::TranslationCutoff;
        f.bounds = {{0.0, max_travel}, {min_margin, max_margin}};
        f.translation_axis = axis;
        return f;
    }
    static CandidateFamilySpec rotation(double max_rate, double min_margin, double max_margin) {
        CandidateFamilySpec f;
        f.type = Type::RotationCutoff;
        f.bounds = {{-max_rate, max_rate}, {min_margin, max_margin}};
        return f;
    }
};

struct SearchBudget {
    int coarse_per_axis = 8;
    int nm_starts = 8;
    int nm_max_evals = 500;
    double margin_floor = 0.02;  // required clearance of a feasible witness
};

struct DisplacementExperiment {
    Region U;
    CandidateFamilySpec family;
    SearchBudget budget;
    IntegratorSpec integrator = IntegratorSpec::adaptive(1e-9);
    std::vector<std::vector<double>> warm_starts;  // extra search seeds
};

struct HoferEstimate {
    double upper = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::vector<double> witness;
    DisplacedReport witness_check;
    int evaluations = 0;
    std::string notes;
};

// Best (smallest length) member of the candidate family whose time-1 map
// verifiably displaces U: an upper bound for the displacement energy.
// Infinity when no feasible candidate is found.
HoferEstimate displacement_upper_bound(const PoissonStructure& P,
                                       const DisplacementExperiment& experiment, int jobs = 1);

// Builds the Hamiltonian for a parameter vector of the candidate family.
TimeDependentHamiltonian instantiate_candidate(const PoissonStructure& P,
                                               const CandidateFamilySpec& family,
                                               const Region& U,
                                               const std::vector<double>& params);

// --- Capacities ---------------------------------------------------------------

// Lower bound for the Gromov width of a ball: pi r^2 on a standard symplectic
// chart, sigma-area of the sliced disk on a 2-dimensional leaf.
double gromov_width_lower(const PoissonStructure& P, const Region& U,
                          const std::optional<LeafChart>& leaf = std::nullopt);

// sup over leaves through U of the leafwise width lower bound.
double capacity_lower(const PoissonStructure& P, const Region& U);

struct CapacityReport {
    double capacity = 0;   // c(U) lower bound
    double half_capacity = 0;
    double upper = std::numeric_limits<double>::infinity();
    bool holds = false;    // half_capacity <= upper
};

CapacityReport energy_capacity_check(const PoissonStructure& P, const Region& U,
                                     const HoferEstimate& estimate);

// --- Leaf restriction ---------------------------------------------------------

struct LeafRestrictionReport {
    double leaf_length = 0;
    double ambient_length = 0;
    bool holds = false;  // leaf_length <= ambient_length + slack
    double slack = 1e-12;
};

// Compares the length of F restricted to the leaf through `base_point` with
// the ambient length.  The leaf lattice is the trace of the ambient lattice
// (the leaf plane is forced into the ambient grid and refinement is off), so
// the inequality is exact up to the stated slack.
LeafRestrictionReport leaf_restriction_check(const PoissonStructure& P,
                                             const TimeDependentHamiltonian& F,
                                             const Vec& base_point, int resolution = 16,
                                             int simpson_nodes = 33, int jobs = 1);

}  // namespace hoferlab
