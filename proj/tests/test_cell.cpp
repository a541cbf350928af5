#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ltwave/coefficient.hpp"
#include "ltwave/elliptic.hpp"
#include "ltwave/grid.hpp"

using namespace ltwave;

namespace {

RealField sample(const CellGrid& g, double (*f)(double)) {
    RealField out(g.N);
    for (int j = 0; j < g.N; ++j) out[j] = f(g.node(j));
    return out;
}

// band-limited random field, fixed seed
RealField random_band_limited(const CellGrid& g, int kmax, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    RealField out(g.N, 0.0);
    for (int k = 1; k <= kmax; ++k) {
        double ac = unif(rng), as = unif(rng);
        for (int j = 0; j < g.N; ++j) {
            double x = g.node(j);
            out[j] += ac * std::cos(two_pi * k * x) + as * std::sin(two_pi * k * x);
        }
    }
    return out;
}

} // namespace

TEST_CASE("cell_mean basics") {
    CellGrid g(256);
    RealField ones(g.N, 1.0);
    REQUIRE(cell_mean(ones) == Catch::Approx(1.0).margin(1e-15));

    RealField s = sample(g, [](double x) { return std::sin(two_pi * x); });
    REQUIRE(std::abs(cell_mean(s)) < 1e-14);

    // closed form: int_0^1 dx / (2 + sin 2 pi x) = 1/sqrt(3)
    RealField f(g.N);
    for (int j = 0; j < g.N; ++j) f[j] = 1.0 / (2.0 + std::sin(two_pi * g.node(j)));
    REQUIRE(cell_mean(f) == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-12));
}

TEST_CASE("spectral differentiation") {
    CellGrid g(128);
    RealField s = sample(g, [](double x) { return std::sin(two_pi * x); });
    RealField ds = grad(s, g);
    for (int j = 0; j < g.N; ++j)
        REQUIRE(ds[j] == Catch::Approx(two_pi * std::cos(two_pi * g.node(j))).margin(1e-11));

    RealField c(g.N, 3.7);
    RealField dc = grad(c, g);
    for (int j = 0; j < g.N; ++j) REQUIRE(std::abs(dc[j]) < 1e-13);
}

TEST_CASE("product rule on band-limited fields") {
    CellGrid g(256);
    RealField f = random_band_limited(g, 10, 17);
    RealField h = random_band_limited(g, 10, 99);
    RealField fh = product(f, h, g);
    RealField lhs = grad(fh, g);
    RealField df = grad(f, g), dh = grad(h, g);
    RealField rhs1 = product(f, dh, g), rhs2 = product(h, df, g);
    double resid = 0;
    for (int j = 0; j < g.N; ++j) {
        double d = lhs[j] - rhs1[j] - rhs2[j];
        resid += d * d;
    }
    REQUIRE(std::sqrt(resid / g.N) < 1e-10);
}

TEST_CASE("dealiased product of constants") {
    CellGrid g(64);
    RealField u(g.N, 2.0), v(g.N, 3.0);
    RealField w = product(u, v, g);
    for (int j = 0; j < g.N; ++j) REQUIRE(w[j] == Catch::Approx(6.0).margin(1e-13));
}

TEST_CASE("solve_poisson exact cases") {
    CellGrid g(128);
    RealField rhs = sample(g, [](double x) { return two_pi * two_pi * std::cos(two_pi * x); });
    RealField u = solve_poisson(rhs, g, 0.0);
    for (int j = 0; j < g.N; ++j)
        REQUIRE(u[j] == Catch::Approx(std::cos(two_pi * g.node(j))).margin(1e-11));

    RealField zero(g.N, 0.0);
    RealField c = solve_poisson(zero, g, 0.25);
    for (int j = 0; j < g.N; ++j) REQUIRE(c[j] == Catch::Approx(0.25).margin(1e-14));
}

TEST_CASE("solve_elliptic with identity coefficient matches eigenfunction") {
    CellGrid g(128);
    RealField a(g.N, 1.0);
    RealField rhs = sample(g, [](double x) { return two_pi * two_pi * std::sin(two_pi * x); });
    RealField u = solve_elliptic(a, rhs, g, 0.0);
    for (int j = 0; j < g.N; ++j)
        REQUIRE(u[j] == Catch::Approx(std::sin(two_pi * g.node(j))).margin(1e-10));
}

TEST_CASE("solve_elliptic agrees with quadrature oracle and poisson path") {
    CellGrid g(256);
    CoefficientField cf = make_two_plus_sin_field();
    RealField a = cf.sample(g);
    RealField rhs = random_band_limited(g, 12, 4242);

    RealField u_cg = solve_elliptic(a, rhs, g, 0.3);
    RealField u_quad = solve_elliptic_quadrature(a, rhs, g, 0.3);
    double diff = 0;
    for (int j = 0; j < g.N; ++j) diff += (u_cg[j] - u_quad[j]) * (u_cg[j] - u_quad[j]);
    REQUIRE(std::sqrt(diff / g.N) < 1e-10);

    // plug back through the operator
    RealField du = grad(u_cg, g);
    RealField flux = product(a, du, g);
    RealField back = grad(flux, g);
    double resid = 0, nb = 0;
    for (int j = 0; j < g.N; ++j) {
        double d = -back[j] - rhs[j];
        resid += d * d;
        nb += rhs[j] * rhs[j];
    }
    REQUIRE(std::sqrt(resid / nb) < 1e-10);

    RealField ident(g.N, 1.0);
    RealField u_ell = solve_elliptic(ident, rhs, g, 0.0);
    RealField u_poi = solve_poisson(rhs, g, 0.0);
    for (int j = 0; j < g.N; ++j) REQUIRE(u_ell[j] == Catch::Approx(u_poi[j]).margin(1e-12));
}

TEST_CASE("solve_elliptic linearity") {
    CellGrid g(128);
    CoefficientField cf = make_two_plus_sin_field();
    RealField a = cf.sample(g);
    RealField f = random_band_limited(g, 8, 7);
    RealField h = random_band_limited(g, 8, 8);
    const double alpha = 1.7, beta = -0.4;
    RealField combo(g.N);
    for (int j = 0; j < g.N; ++j) combo[j] = alpha * f[j] + beta * h[j];
    RealField u_combo = solve_elliptic(a, combo, g, 0.0);
    RealField uf = solve_elliptic(a, f, g, 0.0);
    RealField uh = solve_elliptic(a, h, g, 0.0);
    for (int j = 0; j < g.N; ++j)
        REQUIRE(u_combo[j] == Catch::Approx(alpha * uf[j] + beta * uh[j]).margin(1e-11));
}

TEST_CASE("solve_elliptic rejects incompatible rhs") {
    CellGrid g(64);
    RealField a(g.N, 1.0);
    RealField rhs(g.N, 1.0);
    REQUIRE_THROWS_AS(solve_elliptic(a, rhs, g, 0.0), IncompatibleRHS);
    REQUIRE_THROWS_AS(solve_poisson(rhs, g, 0.0), IncompatibleRHS);
}

TEST_CASE("grid refinement stability of an elliptic solve") {
    CoefficientField cf = make_two_plus_sin_field();
    auto solve_at = [&](int N) {
        CellGrid g(N);
        RealField a = cf.sample(g);
        RealField rhs = sample(g, [](double x) { return std::cos(two_pi * x); });
        RealField u = solve_elliptic(a, rhs, g, 0.0);
        return u[0]; // same physical node x = -1/2 at every N
    };
    double u128 = solve_at(128), u256 = solve_at(256);
    REQUIRE(std::abs(u128 - u256) < 1e-10);
}

TEST_CASE("coefficient field validation") {
    CellGrid g(128);
    make_two_plus_sin_field().validate(g);
    make_inv_one_plus_sin_field().validate(g);
    make_constant_field(1.0).validate(g);
}
