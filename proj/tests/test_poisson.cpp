#include "hoferlab/poisson.hpp"

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

}  // namespace

TEST_CASE("standard symplectic bivector and sharp") {
    PoissonStructure P = make_standard_symplectic(1);
    Vec x = vec2(0.3, -0.2);
    Mat L = P.bivector(x);
    CHECK(L(0, 1) == 1.0);
    CHECK(L(1, 0) == -1.0);
    CHECK(L(0, 0) == 0.0);
    CHECK(L(1, 1) == 0.0);

    // v_j = sum_i alpha_i L_ij: alpha = (a, b) maps to (-b, a).
    Vec v = sharp(P, Covector{x, vec2(2.0, 5.0)});
    CHECK(v[0] == doctest::Approx(-5.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-15));

    // Energy of the harmonic oscillator rotates counterclockwise.
    auto F = expression_field(2, "(x1^2 + x2^2)/2");
    Vec X = hamiltonian_vector_field(P, *F, vec2(0.4, 0.1));
    CHECK(X[0] == doctest::Approx(-0.1).epsilon(1e-9));
    CHECK(X[1] == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("heisenberg bivector, casimir and sharp") {
    PoissonStructure P = make_heisenberg();
    Vec x = vec3(0.4, -0.3, 0.7);
    Mat L = P.bivector(x);
    CHECK(L(0, 1) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(L(1, 0) == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(L(0, 2) == 0.0);
    CHECK(L(1, 2) == 0.0);

    Vec v = sharp(P, Covector{x, vec3(1.0, 2.0, 5.0)});
    CHECK(v[0] == doctest::Approx(-2.0 * 0.7).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(1.0 * 0.7).epsilon(1e-15));
    CHECK(v[2] == 0.0);

    // The third coordinate is a Casimir: its field vanishes identically.
    REQUIRE(P.casimirs().size() == 1);
    Vec Xc = hamiltonian_vector_field(P, *P.casimirs()[0], x);
    CHECK(Xc.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bracket values and exact antisymmetry") {
    PoissonStructure P = make_standard_symplectic(2);
    auto f = expression_field(4, "x1*x3 + x2");
    auto h = expression_field(4, "x4^2 - x1");
    Vec x(4);
    x << 0.3, -0.2, 0.5, 0.1;

    double fh = poisson_bracket(P, *f, *h, x);
    double hf = poisson_bracket(P, *h, *f, x);
    CHECK(fh + hf == 0.0);  // upper-triangle accumulation cancels exactly

    // Hand value: with pairs (x1,x3), (x2,x4): {f,h} = df/dx1 dh/dx3 - df/dx3 dh/dx1
    //   + df/dx2 dh/dx4 - df/dx4 dh/dx2 = x3*0 - x1*(-1) + 1*(2 x4) - 0 = x1 + 2 x4.
    CHECK(fh == doctest::Approx(0.3 + 0.2).epsilon(1e-8));
}

TEST_CASE("bracket satisfies the Leibniz rule") {
    PoissonStructure P = make_heisenberg();
    auto f = expression_field(3, "x1 + x2*x3");
    auto g = expression_field(3, "sin(x1)");
    auto h = expression_field(3, "x2^2");
    auto gh = expression_field(3, "sin(x1)*x2^2");
    Vec x = vec3(0.4, -0.3, 0.7);

    double lhs = poisson_bracket(P, *f, *gh, x);
    double rhs = poisson_bracket(P, *f, *g, x) * h->value(x) +
                 g->value(x) * poisson_bracket(P, *f, *h, x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("jacobi residual vanishes on built-ins") {
    Vec x4(4);
    x4 << 0.3, -0.2, 0.5, 0.1;
    CHECK(jacobi_residual_coordinates(make_standard_symplectic(2), x4) < 1e-9);
    CHECK(jacobi_residual_coordinates(make_heisenberg(), vec3(0.4, -0.3, 0.7)) < 1e-9);
    CHECK(jacobi_residual_coordinates(make_product2x1(), vec3(0.1, 0.2, 0.7)) < 1e-9);

    PoissonStructure H = make_heisenberg();
    auto f = expression_field(3, "x1*x2");
    auto g = expression_field(3, "sin(x2)");
    auto h = expression_field(3, "x3^2");
    CHECK(jacobi_residual(H, *f, *g, *h, vec3(0.4, -0.3, 0.7)) < 1e-4);
}

TEST_CASE("twisted bivector fails the jacobi identity") {
    // Lambda = x2 d1^d2 + d2^d3 is antisymmetric but not Poisson: the cyclic
    // sum over (x1, x2, x3) equals 1 everywhere.
    PoissonStructure bad = make_custom(3, {{0, 1, "x2"}, {1, 2, "1"}}, "twisted-control");
    CHECK(jacobi_residual_coordinates(bad, vec3(0.2, 0.4, -0.3)) > 1e-3);
    CHECK(jacobi_residual_coordinates(bad, vec3(-0.7, 0.1, 0.9)) > 1e-3);
    CHECK(jacobi_residual_coordinates(bad, vec3(0.0, 0.0, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("custom structure matches its built-in twin") {
    PoissonStructure custom = make_custom(3, {{0, 1, "x3"}}, "heisenberg-custom", {"x3"});
    PoissonStructure builtin = make_heisenberg();
    Vec x = vec3(0.4, -0.3, 0.7);
    CHECK((custom.bivector(x) - builtin.bivector(x)).cwiseAbs().maxCoeff() < 1e-15);

    auto f = expression_field(3, "x1 + x2*x3");
    auto h = expression_field(3, "x2 - x1^2");
    CHECK(poisson_bracket(custom, *f, *h, x) ==
          doctest::Approx(poisson_bracket(builtin, *f, *h, x)).epsilon(1e-12));
}

TEST_CASE("sharp identity residual over random directions") {
    PoissonStructure P = make_heisenberg();
    Vec x = vec3(0.4, -0.3, 0.7);
    Vec alpha = vec3(1.0, -2.0, 0.5);
    for (int i = 0; i < 3; ++i) {
        Vec beta = Vec::Zero(3);
        beta[i] = 1.0;
        CHECK(sharp_identity_residual(P, x, alpha, beta) < 1e-12);
    }
    CHECK(sharp_identity_residual(P, x, alpha, vec3(0.3, 0.9, -1.1)) < 1e-12);
}

TEST_CASE("leaf charts of the heisenberg structure") {
    PoissonStructure P = make_heisenberg();

    LeafChart generic = leaf_at(P, vec3(0.1, 0.2, 0.9));
    CHECK(generic.dimension == 2);
    CHECK(generic.has_affine_chart);
    REQUIRE(generic.axes.size() == 2);
    CHECK(generic.axes[0] == 0);
    CHECK(generic.axes[1] == 1);
    // Leaf symplectic matrix is the inverse of the restricted bivector:
    // sigma = [[0, -1/x3], [1/x3, 0]] up to overall sign, so |sigma_01| = 1/0.9.
    CHECK(generic.area_factor() == doctest::Approx(1.0 / 0.9).epsilon(1e-9));

    // Points embed back into the plane x3 = 0.9.
    Vec u = vec2(0.25, -0.5);
    Vec p = generic.embed(u);
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.9).epsilon(1e-12));

    LeafChart origin = leaf_at(P, vec3(0.1, 0.2, 0.0));
    CHECK(origin.dimension == 0);
}

TEST_CASE("leaf charts of the product structure") {
    PoissonStructure P = make_product2x1();
    LeafChart L = leaf_at(P, vec3(0.1, 0.2, 0.7));
    CHECK(L.dimension == 2);
    CHECK(L.has_affine_chart);
    CHECK(L.area_factor() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(L.proper == P.leaves_proper());
}

TEST_CASE("labels round-trip through the registry") {
    CHECK(structure_from_label("symplectic2n:3").dim() == 6);
    CHECK(structure_from_label("heisenberg3").label() == "heisenberg3");
    CHECK(structure_from_label("product2x1").dim() == 3);
    CHECK_THROWS(structure_from_label("nonsense"));
}
