#pragma once

#include "hoferlab/metric.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hoferlab {

// A symplectic-realization chart: total structure, realized base structure,
// and the structure maps in coordinates.  `source` is a Poisson morphism,
// `target` an anti-morphism, and `unit` a section of both.
struct GroupoidRealization {
    PoissonStructure total;
    PoissonStructure base;
    std::function<Vec(const Vec&)> source;
    std::function<Vec(const Vec&)> target;
    std::function<Vec(const Vec&)> unit;
    std::string name;
};

// (p, q) chart with blocks (-Lambda, +Lambda), source (p, q) -> q,
// target (p, q) -> p, unit x -> (x, x).
GroupoidRealization pair_groupoid(const PoissonStructure& base);

// Left-trivialized cotangent chart (a, b, c, mu1, mu2, mu3) over the
// three-dimensional Heisenberg structure; source is the momentum projection.
GroupoidRealization cotangent_heisenberg();

// s*F: the base Hamiltonian pulled up through the source map.  Constant along
// source fibers, so the handle is marked non-compact on the total chart.
TimeDependentHamiltonian lift_hamiltonian(const GroupoidRealization& G,
                                          const TimeDependentHamiltonian& F);

// --- Structural residuals (no flows) -----------------------------------------

// max |J_s Lambda_total J_s^T - Lambda_base(s(g))| over sampled g: zero iff the
// source pushes the total bivector onto the base one.
double source_morphism_residual(const GroupoidRealization& G, int samples = 200,
                                uint64_t seed = 17);

// Same with the target map against -Lambda_base(t(g)).
double target_antimorphism_residual(const GroupoidRealization& G, int samples = 200,
                                    uint64_t seed = 17);

// max over base samples of |s(u(x)) - x| and |t(u(x)) - x|.
double unit_section_residual(const GroupoidRealization& G, int samples = 200,
                             uint64_t seed = 29);

// --- Flow compatibility checks -------------------------------------------------

struct RealizationProbe {
    Box sample_box;  // groupoid points are drawn here
    int point_samples = 100;
    std::vector<double> times = {0.25, 0.5, 0.75, 1.0};
    IntegratorSpec lift_spec = IntegratorSpec::adaptive(1e-10);
    IntegratorSpec base_spec = IntegratorSpec::adaptive(1e-10);
    uint64_t seed = 5;
};

// max over samples and times of |s(phi_lift^t(g)) - phi_base^t(s(g))|: the
// lifted flow projects onto the base flow.
double check_projection(const GroupoidRealization& G, const TimeDependentHamiltonian& F,
                        const RealizationProbe& probe, int jobs = 1);

// max over samples and times of |t(phi_lift^t(g)) - t(g)|: the lifted flow
// moves along target fibers.
double check_target_fibers(const GroupoidRealization& G, const TimeDependentHamiltonian& F,
                           const RealizationProbe& probe, int jobs = 1);

// --- Cutoff ---------------------------------------------------------------------

// Controls for F_cut(t, x) = lambda(psi_t(x)) * F(t, s(x)) where psi_t is the
// inverse of the lifted flow and lambda is a plateau on the total chart.
// Along lifted trajectories out of {lambda == 1} the cutoff flow equals the
// lifted flow, and |F_cut| <= |F o s| pointwise since lambda takes [0, 1].
struct CutoffSpec {
    Box inner;                   // lambda == 1 on this box
    double ramp = 0.25;          // falls to 0 across this margin
    int table_nodes = 17;        // time nodes of the inverse-flow table
    int steps_per_interval = 2;  // backward RK4 steps per node interval
};

TimeDependentHamiltonian cutoff_hamiltonian(const GroupoidRealization& G,
                                            const TimeDependentHamiltonian& F,
                                            const CutoffSpec& cutoff,
                                            IntegratorSpec lift_spec = inner_flow_spec());

// Length estimate over an explicit point cloud (used for cutoff Hamiltonians,
// whose evaluation cost rules out full product lattices): composite Simpson of
// t -> max - min over the points with 0 adjoined.
double sampled_length(const TimeDependentHamiltonian& F, const std::vector<Vec>& points,
                      int simpson_nodes = 33, int jobs = 1);

// Deterministic cloud for sampled_length: corner points, a coarse lattice,
// and a low-discrepancy fill of the box.
std::vector<Vec> sample_cloud(const Box& box, int lattice_per_axis = 5, int halton_points = 256,
                              uint64_t seed = 37);

}  // namespace hoferlab
