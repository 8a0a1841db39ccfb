#include "hoferlab/groupoid.hpp"

#include "hoferlab/halton.hpp"
#include "hoferlab/parallel.hpp"

#include <doctest.h>

#include <cmath>

using namespace hoferlab;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec4(double a, double b, double c, double d) {
    Vec v(4);
    v << a, b, c, d;
    return v;
}

Vec vec6(double a, double b, double c, double d, double e, double f) {
    Vec v(6);
    v << a, b, c, d, e, f;
    return v;
}

Box cube4(double half) {
    return Box(vec4(-half, -half, -half, -half), vec4(half, half, half, half));
}

}  // namespace

TEST_CASE("pair groupoid structure maps and bivector blocks") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    CHECK(G.total.dim() == 4);
    CHECK(G.base.dim() == 2);

    Vec g = vec4(0.1, -0.2, 0.3, 0.4);  // (p, q)
    CHECK((G.source(g) - vec2(0.3, 0.4)).norm() == 0.0);
    CHECK((G.target(g) - vec2(0.1, -0.2)).norm() == 0.0);
    Vec u = G.unit(vec2(0.5, -0.6));
    CHECK((u - vec4(0.5, -0.6, 0.5, -0.6)).norm() == 0.0);

    // Block bivector: -Lambda on the first factor, +Lambda on the second.
    Mat L = G.total.bivector(g);
    CHECK(L(0, 1) == -1.0);
    CHECK(L(2, 3) == 1.0);
    CHECK(L(0, 2) == 0.0);
    CHECK(L(1, 3) == 0.0);
}

TEST_CASE("pair groupoid realization residuals vanish") {
    for (const char* label : {"symplectic2n:1", "heisenberg3"}) {
        GroupoidRealization G = pair_groupoid(structure_from_label(label));
        CHECK(source_morphism_residual(G) < 1e-6);
        CHECK(target_antimorphism_residual(G) < 1e-6);
        CHECK(unit_section_residual(G) < 1e-6);
    }
}

TEST_CASE("cotangent heisenberg realization") {
    GroupoidRealization G = cotangent_heisenberg();
    CHECK(G.total.dim() == 6);
    CHECK(G.base.dim() == 3);

    Vec g = vec6(0.2, -0.1, 0.3, 0.4, 0.5, 0.6);  // (a, b, c, mu)
    CHECK((G.source(g) - Vec(g.tail(3))).norm() == 0.0);
    Vec t = G.target(g);
    CHECK(t[0] == doctest::Approx(0.4 + (-0.1) * 0.6).epsilon(1e-15));
    CHECK(t[1] == doctest::Approx(0.5 - 0.2 * 0.6).epsilon(1e-15));
    CHECK(t[2] == doctest::Approx(0.6).epsilon(1e-15));

    Vec u = G.unit(Vec(g.tail(3)));
    CHECK(u.head(3).norm() == 0.0);
    CHECK((u.tail(3) - g.tail(3)).norm() == 0.0);

    CHECK(source_morphism_residual(G) < 1e-6);
    CHECK(target_antimorphism_residual(G) < 1e-6);
    CHECK(unit_section_residual(G) < 1e-6);

    // The total chart is itself Poisson and reproduces the base relation
    // {mu1, mu2} = mu3.
    auto mu1 = coordinate_field(6, 3);
    auto mu2 = coordinate_field(6, 4);
    CHECK(poisson_bracket(G.total, *mu1, *mu2, g) == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(jacobi_residual_coordinates(G.total, g) < 1e-9);
}

TEST_CASE("lifted hamiltonians are constant along source fibers") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.8);
    TimeDependentHamiltonian lifted = lift_hamiltonian(G, F);

    CHECK_FALSE(lifted.compact());
    CHECK(lifted.autonomous() == F.autonomous());

    Vec g = vec4(0.9, -0.7, 0.1, 0.2);
    Vec h = vec4(-0.3, 0.25, 0.1, 0.2);  // same source fiber
    CHECK(lifted.value(0.3, g) == F.value(0.3, vec2(0.1, 0.2)));
    CHECK(lifted.value(0.3, g) == lifted.value(0.3, h));
}

TEST_CASE("lifted flows project onto base flows and fix targets") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.8);

    RealizationProbe probe;
    probe.sample_box = cube4(0.6);
    probe.point_samples = 30;
    CHECK(check_projection(G, F, probe, default_jobs()) < 1e-6);
    CHECK(check_target_fibers(G, F, probe, default_jobs()) < 1e-6);
}

TEST_CASE("cutoff hamiltonian equals the lift where the plateau is flat") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.8);

    CutoffSpec cutoff;
    cutoff.inner = cube4(0.6);
    cutoff.ramp = 0.2;
    TimeDependentHamiltonian Fcut = cutoff_hamiltonian(G, F, cutoff);

    // psi_0 is the identity, so at t = 0 the cutoff is exactly lambda * F o s.
    Vec g = vec4(0.1, 0.05, 0.1, 0.05);
    CHECK(Fcut.value(0.0, g) == F.value(0.0, vec2(0.1, 0.05)));

    // The support contains the plateau footprint.
    for (int i = 0; i < 4; ++i) {
        CHECK(Fcut.support().lo[i] <= -0.8 + 1e-12);
        CHECK(Fcut.support().hi[i] >= 0.8 - 1e-12);
    }
}

TEST_CASE("cutoff values never exceed the lifted ones") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.8);

    CutoffSpec cutoff;
    cutoff.inner = cube4(0.6);
    cutoff.ramp = 0.2;
    TimeDependentHamiltonian Fcut = cutoff_hamiltonian(G, F, cutoff);

    Halton gen(4, 101);
    double excess = 0.0;
    for (int i = 0; i < 48; ++i) {
        Vec g = gen.next_in_box(Fcut.support());
        for (double t : {0.0, 0.3, 0.7, 1.0})
            excess = std::max(excess,
                              std::abs(Fcut.value(t, g)) -
                                  std::abs(F.value(t, G.source(g))));
    }
    CHECK(excess <= 0.0);
}

TEST_CASE("cutoff length is bounded by the base length") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.8);

    CutoffSpec cutoff;
    cutoff.inner = cube4(0.6);
    cutoff.ramp = 0.2;
    TimeDependentHamiltonian Fcut = cutoff_hamiltonian(G, F, cutoff);

    std::vector<Vec> cloud = sample_cloud(Fcut.support(), 3, 64);
    double cut_len = sampled_length(Fcut, cloud, 33, default_jobs());
    double base_len = hofer_length(F, default_grid(F.support()), default_jobs());
    CHECK(cut_len <= base_len + 1e-6);
    CHECK(cut_len > 0.0);
    CHECK(base_len == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("sample clouds are deterministic and stay inside the box") {
    Box box = cube4(0.5);
    std::vector<Vec> a = sample_cloud(box, 3, 32);
    std::vector<Vec> b = sample_cloud(box, 3, 32);
    REQUIRE(a.size() == b.size());
    CHECK(a.size() >= 16u + 81u + 32u);  // corners + lattice + fill
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i] - b[i]).norm() == 0.0);
        CHECK(box.contains(a[i].data()));
    }
}

TEST_CASE("sampled length agrees with the lattice length on a bump") {
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.0, 0.0), 0.4, 0.7);
    std::vector<Vec> cloud = sample_cloud(F.support(), 9, 256);
    double sampled = sampled_length(F, cloud, 33, default_jobs());
    double gridded = hofer_length(F, default_grid(F.support()), default_jobs());
    CHECK(sampled <= gridded + 1e-12);
    CHECK(sampled == doctest::Approx(gridded).epsilon(1e-2));
}

TEST_CASE("lifting requires matching base dimensions") {
    GroupoidRealization G = pair_groupoid(make_standard_symplectic(1));
    TimeDependentHamiltonian wrong = bump_hamiltonian(Vec(Vec::Zero(3)), 0.4, 0.8);
    CHECK_THROWS(lift_hamiltonian(G, wrong));
}
