#include "hoferlab/flows.hpp"

#include <doctest.h>

#include <cmath>

using namespace hoferlab;

namespace {

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

Plateau square_plateau(double lo, double hi, double ramp) {
    return Plateau(Box(vec2(lo, lo), vec2(hi, hi)), ramp);
}

}  // namespace

TEST_CASE("translation flow matches the straight line") {
    PoissonStructure P = make_standard_symplectic(1);
    Plateau plateau(Box(vec2(-0.3, -0.3), vec2(0.8, 0.3)), 0.25);
    TimeDependentHamiltonian F =
        translation_hamiltonian(P, vec2(0.5, 0.0), vec2(0.0, 0.0), plateau);
    Isotopy iso(P, F);

    Vec x0 = vec2(0.0, 0.0);
    for (double t : {0.25, 0.5, 1.0}) {
        Vec y = iso.evaluate(t, x0);
        CHECK((y - vec2(0.5 * t, 0.0)).cwiseAbs().maxCoeff() < 1e-8);
    }

    // phi^0 is the identity exactly, and so are points beyond the support.
    CHECK((iso.evaluate(0.0, vec2(0.1, 0.2)) - vec2(0.1, 0.2)).norm() == 0.0);
    Vec far = vec2(3.0, 0.0);
    CHECK((iso.evaluate(1.0, far) - far).norm() == 0.0);
}

TEST_CASE("rotation flow matches the circle") {
    PoissonStructure P = make_standard_symplectic(1);
    double omega = 0.8;
    TimeDependentHamiltonian F =
        rotation_hamiltonian(vec2(0.0, 0.0), omega, square_plateau(-0.4, 0.4, 0.2));
    Isotopy iso(P, F);

    Vec x0 = vec2(0.2, 0.1);
    for (double t : {0.3, 1.0}) {
        double a = omega * t;
        Vec want = vec2(x0[0] * std::cos(a) - x0[1] * std::sin(a),
                        x0[0] * std::sin(a) + x0[1] * std::cos(a));
        CHECK((iso.evaluate(t, x0) - want).cwiseAbs().maxCoeff() < 1e-8);
    }

    // The generator is conserved along its own flow.
    double before = F.value(0.0, x0);
    double after = F.value(0.0, iso.evaluate(1.0, x0));
    CHECK(std::abs(after - before) < 1e-9);
}

TEST_CASE("heisenberg shear flow and casimir conservation") {
    PoissonStructure P = make_heisenberg();
    Plateau plateau(Box(vec3(0.0, -0.5, 0.6), vec3(0.4, 0.7, 1.0)), 0.25);
    TimeDependentHamiltonian F = custom_hamiltonian(3, "x1", plateau);
    Isotopy iso(P, F);

    // X_{x1} = x3 d/dx2 inside the plateau: x2 drifts linearly, x3 is frozen.
    Vec x0 = vec3(0.2, -0.3, 0.8);
    Vec y = iso.evaluate(1.0, x0);
    CHECK((y - vec3(0.2, 0.5, 0.8)).cwiseAbs().maxCoeff() < 1e-8);

    // The casimir stays put even through the plateau ramp.
    Vec edge = vec3(0.45, 0.6, 0.95);
    Vec z = iso.evaluate(1.0, edge);
    CHECK(std::abs(z[2] - edge[2]) < 1e-10);
}

TEST_CASE("adaptive and fixed-step integrators agree") {
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F =
        rotation_hamiltonian(vec2(0.0, 0.0), 1.3, square_plateau(-0.4, 0.4, 0.2));
    Isotopy adaptive(P, F, IntegratorSpec::adaptive(1e-11));
    Isotopy fixed(P, F, IntegratorSpec::fixed(512));
    Vec x0 = vec2(0.15, -0.2);
    CHECK((adaptive.evaluate(1.0, x0) - fixed.evaluate(1.0, x0)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("flow roundtrips through the inverse map") {
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F =
        rotation_hamiltonian(vec2(0.05, 0.0), 0.9, square_plateau(-0.45, 0.45, 0.2));
    Isotopy iso(P, F);
    Vec x0 = vec2(0.2, -0.1);
    for (double t : {0.4, 1.0}) {
        Vec there = iso.evaluate(t, x0);
        CHECK((iso.evaluate_inverse(t, there) - x0).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("composition law phi_K = phi_F o phi_H") {
    PoissonStructure P = make_standard_symplectic(1);
    Plateau trans_plateau(Box(vec2(-0.3, -0.3), vec2(0.8, 0.3)), 0.25);
    TimeDependentHamiltonian F =
        translation_hamiltonian(P, vec2(0.5, 0.0), vec2(0.0, 0.0), trans_plateau);
    TimeDependentHamiltonian H =
        rotation_hamiltonian(vec2(0.0, 0.0), 0.6, square_plateau(-0.4, 0.4, 0.2));

    TimeDependentHamiltonian K = compose_hamiltonians(P, F, H);
    IntegratorSpec spec = IntegratorSpec::adaptive(1e-9);
    Vec x0 = vec2(0.1, -0.05);
    Vec via_product = Isotopy(P, K, spec).evaluate(1.0, x0);
    Vec via_chain =
        Isotopy(P, F, spec).evaluate(1.0, Isotopy(P, H, spec).evaluate(1.0, x0));
    CHECK((via_product - via_chain).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("inverse hamiltonian generates the inverse flow") {
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F =
        rotation_hamiltonian(vec2(0.0, 0.0), 0.7, square_plateau(-0.4, 0.4, 0.2));
    TimeDependentHamiltonian Fbar = inverse_hamiltonian(P, F);
    IntegratorSpec spec = IntegratorSpec::adaptive(1e-9);
    Vec x0 = vec2(0.15, 0.1);
    Vec forward = Isotopy(P, F, spec).evaluate(1.0, x0);
    Vec back = Isotopy(P, Fbar, spec).evaluate(1.0, forward);
    CHECK((back - x0).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pullback conjugates the flow") {
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F = bump_hamiltonian(vec2(0.1, 0.0), 0.5, 0.4);
    TimeDependentHamiltonian G =
        rotation_hamiltonian(vec2(0.0, 0.0), 0.5, square_plateau(-0.4, 0.4, 0.2));
    PoissonAutomorphism f = PoissonAutomorphism::time_one(Isotopy(P, G, inner_flow_spec()));

    TimeDependentHamiltonian K = pullback_hamiltonian(P, f, F);
    IntegratorSpec spec = IntegratorSpec::adaptive(1e-9);
    Vec x0 = vec2(0.12, -0.08);
    Vec via_pullback = Isotopy(P, K, spec).evaluate(1.0, x0);
    Vec via_conjugation = f.apply_inverse(Isotopy(P, F, spec).evaluate(1.0, f.apply(x0)));
    CHECK((via_pullback - via_conjugation).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("reparametrized flows share the endpoint") {
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F =
        rotation_hamiltonian(vec2(0.0, 0.0), 0.8, square_plateau(-0.4, 0.4, 0.2));
    IntegratorSpec spec = IntegratorSpec::adaptive(1e-9);
    Vec x0 = vec2(0.2, 0.05);
    Vec endpoint = Isotopy(P, F, spec).evaluate(1.0, x0);

    for (const TimeReparam& sigma : {TimeReparam::square(), TimeReparam::cosine_step(),
                                     TimeReparam::boundary_flat(0.1)}) {
        TimeDependentHamiltonian Fs = reparametrize(F, sigma);
        Vec y = Isotopy(P, Fs, spec).evaluate(1.0, x0);
        CHECK((y - endpoint).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("boundary flattening freezes the clock near the endpoints") {
    PoissonStructure P = make_standard_symplectic(1);
    TimeDependentHamiltonian F =
        rotation_hamiltonian(vec2(0.0, 0.0), 0.8, square_plateau(-0.4, 0.4, 0.2));
    TimeDependentHamiltonian Fs = flatten_boundary(F, 0.1);

    Vec probe = vec2(0.1, 0.1);
    for (double t : {0.0, 0.05, 0.1, 0.9, 0.95, 1.0})
        CHECK(Fs.value(t, probe) == 0.0);
    CHECK(Fs.value(0.5, probe) != 0.0);
}

TEST_CASE("reparametrizations validate their endpoint behavior") {
    CHECK_NOTHROW(TimeReparam::square().validate());
    CHECK_NOTHROW(TimeReparam::boundary_flat(0.2).validate());
    TimeReparam bad;
    bad.sigma = [](double t) { return 0.5 * t; };  // ends at 0.5, not 1
    bad.dsigma = [](double) { return 0.5; };
    bad.name = "half";
    CHECK_THROWS(bad.validate());
}

TEST_CASE("support transport bounds the translated box") {
    PoissonStructure P = make_standard_symplectic(1);
    Plateau plateau(Box(vec2(-0.3, -0.3), vec2(0.8, 0.3)), 0.25);
    TimeDependentHamiltonian F =
        translation_hamiltonian(P, vec2(0.5, 0.0), vec2(0.0, 0.0), plateau);
    Isotopy iso(P, F);

    Box cell(vec2(-0.1, -0.1), vec2(0.1, 0.1));
    double moved = estimate_max_displacement(iso, cell);
    CHECK(moved == doctest::Approx(0.5).epsilon(1e-3));

    Box transported = transported_support(iso, cell);
    CHECK(transported.lo[0] <= -0.1);
    CHECK(transported.hi[0] >= 0.6 - 1e-6);
    CHECK(transported.contains(vec2(0.55, 0.0).data()));
}
