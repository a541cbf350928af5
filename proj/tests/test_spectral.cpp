#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ltwave/coefficient.hpp"
#include "ltwave/spectral.hpp"
#include "ltwave/util.hpp"

using namespace ltwave;

namespace {
const CoefficientField kField = make_two_plus_sin_field();

SpectralCorrectors& test_correctors() {
    static SpectralCorrectors S = build_spectral(kField, 6, CellGrid(512));
    return S;
}
} // namespace

TEST_CASE("homogeneous medium collapses the hierarchy") {
    SpectralCorrectors S = build_spectral(make_constant_field(1.0), 4, CellGrid(128));
    REQUIRE(S.b[1] == Catch::Approx(1.0).margin(1e-12));
    for (int n = 1; n <= 4; ++n) {
        REQUIRE(l2_norm(S.psi[n]) < 1e-11);
        REQUIRE(l2_norm(S.sigma[n]) < 1e-11);
        if (n >= 2) {
            REQUIRE(std::abs(S.b[n]) < 1e-12);
            REQUIRE(l2_norm(S.rho[n]) < 1e-11);
        }
    }
    for (const auto& fam : S.zeta)
        for (const auto& z : fam) REQUIRE(l2_norm(z) < 1e-10);
    for (const auto& fam : S.tau)
        for (const auto& t : fam)
            if (!t.empty()) REQUIRE(l2_norm(t) < 1e-10);
    // gamma identically 1
    for (double xi : {0.0, 0.3, -0.8}) REQUIRE(S.gamma(xi) == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("homogenized coefficient is the harmonic mean") {
    const SpectralCorrectors& S = test_correctors();
    REQUIRE(S.b[1] == Catch::Approx(std::sqrt(3.0)).margin(1e-9));

    SpectralCorrectors S2 = build_psi_b(make_inv_one_plus_sin_field(), 2, CellGrid(256));
    REQUIRE(S2.b[1] == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("even-order homogenized tensors vanish") {
    const SpectralCorrectors& S = test_correctors();
    for (int n : {2, 4, 6}) REQUIRE(std::abs(S.b[n]) / std::abs(S.b[1]) < 1e-10);
}

TEST_CASE("correctors have vanishing average") {
    const SpectralCorrectors& S = test_correctors();
    for (int n = 1; n <= S.ell; ++n) REQUIRE(std::abs(cell_mean(S.psi[n])) < 1e-12);
    for (int m = 0; m < static_cast<int>(S.zeta.size()); ++m) {
        REQUIRE(std::abs(cell_mean(S.zeta[m][0])) < 1e-10); // E[zeta^{0,m}] = 0
    }
}

TEST_CASE("1D flux correctors sigma^0, sigma^1 vanish") {
    const SpectralCorrectors& S = test_correctors();
    REQUIRE(l2_norm(S.sigma[0]) < 1e-12);
    // a(1 + psi^1') is pointwise constant in one dimension
    REQUIRE(l2_norm(S.sigma[1]) < 1e-10);
}

TEST_CASE("rho agrees with an independent spectral division") {
    const SpectralCorrectors& S = test_correctors();
    const CellGrid& g = S.grid;
    for (int n = 2; n <= 4; ++n) {
        ComplexField hat = fft(ComplexField(S.psi[n - 1].begin(), S.psi[n - 1].end()));
        hat[0] = 0;
        for (int j = 1; j < g.N; ++j) {
            if (j == g.N / 2) {
                hat[j] = 0;
                continue;
            }
            double k = two_pi * g.freq(j);
            hat[j] /= k * k;            // Psi = (-Delta)^{-1} psi^{n-1}
            hat[j] *= cplx(0.0, k);     // rho = Psi'
        }
        ComplexField rho = ifft(hat);
        double diff = 0;
        for (int j = 0; j < g.N; ++j) diff += std::norm(rho[j] - S.rho[n][j]);
        REQUIRE(std::sqrt(diff / g.N) < 1e-11);
        REQUIRE(std::abs(cell_mean(S.rho[n])) < 1e-12);
    }
}

TEST_CASE("lambda taylor structure") {
    const SpectralCorrectors& S = test_correctors();
    // ell = 2 truncation is xi . abar xi
    double xi = 0.37;
    REQUIRE(S.lambda_taylor(xi, 2) == Catch::Approx(S.b[1] * xi * xi).margin(1e-13));
    // constant field: |xi|^2 for every ell
    SpectralCorrectors S1 = build_psi_b(make_constant_field(1.0), 5, CellGrid(128));
    for (int order : {2, 3, 4, 5})
        REQUIRE(S1.lambda_taylor(xi, order) == Catch::Approx(xi * xi).margin(1e-12));
}

TEST_CASE("gamma multiplier properties") {
    const SpectralCorrectors& S = test_correctors();
    REQUIRE(S.gamma(0.0) == Catch::Approx(1.0).margin(1e-12));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double xi = unif(rng);
        double gv = S.gamma(xi);
        REQUIRE(gv <= 1.0 + 1e-12);
        REQUIRE(gv > 0.0);
    }
}

TEST_CASE("gamma taylor coefficients") {
    const SpectralCorrectors& S = test_correctors();
    std::vector<double> coef = gamma_taylor(S, 8);
    REQUIRE(coef[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(coef[1]) < 1e-12);

    // pointwise evaluation agrees with the inverted series at small xi
    for (double xi : {1e-3, 3e-3, 1e-2, 3e-2}) {
        double series = 0;
        for (size_t k = 0; k < coef.size(); ++k) series += coef[k] * std::pow(xi, k);
        REQUIRE(std::abs(S.gamma(xi) - series) < 1e-9);
    }

    // truncation error bound: |gamma - trunc| <= (C xi)^{n+1};
    // points at the double-precision floor (gamma is O(1)) are excluded
    std::vector<double> xs, err4;
    for (double xi = 1e-2; xi <= 0.35; xi *= 1.5) {
        double trunc = coef[0] + coef[2] * xi * xi + coef[3] * xi * xi * xi +
                       coef[4] * std::pow(xi, 4);
        xs.push_back(xi);
        err4.push_back(std::abs(S.gamma(xi) - trunc));
    }
    SlopeFit fit = fit_loglog(xs, err4, 1e-15);
    REQUIRE(fit.points_used >= 3);
    REQUIRE(fit.slope > 4.5); // next nonzero coefficient is order 6

    // constant field: all higher coefficients vanish
    SpectralCorrectors S1 = build_psi_b(make_constant_field(1.0), 4, CellGrid(128));
    std::vector<double> c1 = gamma_taylor(S1, 6);
    for (size_t k = 1; k < c1.size(); ++k) REQUIRE(std::abs(c1[k]) < 1e-12);
}

TEST_CASE("dual path: tensor recursion vs complex-xi solves") {
    const SpectralCorrectors& S = test_correctors();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> xis = {0.3, 0.7};
    for (int i = 0; i < 18; ++i) {
        double xi = unif(rng);
        if (std::abs(xi) < 0.05) xi += 0.1;
        xis.push_back(xi);
    }
    for (double xi : xis) {
        SpectralAtXi X = build_spectral_at_xi(S, xi);
        REQUIRE(dual_path_deviation(S, X) < 1e-9);
    }
}

TEST_CASE("compatibility means stay below tolerance during builds") {
    const SpectralCorrectors& S = test_correctors();
    REQUIRE(S.stats.max_compat_ratio < 1e-9);
}

TEST_CASE("corrector growth is geometric") {
    const SpectralCorrectors& S = test_correctors();
    double C = corrector_growth_constant(S);
    REQUIRE(std::isfinite(C));
    REQUIRE(C < 64.0);
    // log H1 norms bounded by n log C + const: check the fitted slope exists
    std::vector<double> ns, vals;
    for (int n = 1; n <= S.ell; ++n) {
        ns.push_back(n);
        vals.push_back(S.h1_norm(S.psi[n]) + std::abs(S.b[n]));
    }
    SlopeFit fit = fit_loglog(ns, vals);
    REQUIRE(std::isfinite(fit.slope));
}

TEST_CASE("degenerate ell produces empty zeta and tau families") {
    SpectralCorrectors S = build_spectral(kField, 2, CellGrid(128));
    REQUIRE(S.zeta.empty());
    REQUIRE(S.tau.empty() == false); // ell = 2 has the m = 0 family slot
    // but no entries inside (n_top = -1 for m = 0 means empty)
    for (const auto& fam : S.tau) REQUIRE(fam.empty());
    SpectralCorrectors S1 = build_spectral(kField, 1, CellGrid(128));
    REQUIRE(S1.zeta.empty());
    REQUIRE(S1.tau.empty());
}

TEST_CASE("tau n = -1 slot exists when ell - 3 is odd") {
    SpectralCorrectors S = build_spectral(kField, 4, CellGrid(256));
    REQUIRE(S.tau.size() == 2);
    REQUIRE_NOTHROW(S.tau_at(-1, 1));
    REQUIRE(l2_norm(S.tau_at(-1, 1)) > 0);
    // Phi^{-1,1} solves -Phi'' = zeta^{0,0}
    const CellGrid& g = S.grid;
    RealField lhs = grad(S.tau_at(-1, 1), g);
    double diff = 0, den = 0;
    for (int j = 0; j < g.N; ++j) {
        double d = -lhs[j] - S.zeta_at(0, 0)[j];
        diff += d * d;
        den += S.zeta_at(0, 0)[j] * S.zeta_at(0, 0)[j];
    }
    REQUIRE(std::sqrt(diff / den) < 1e-10);
}

TEST_CASE("grid refinement leaves correctors unchanged") {
    SpectralCorrectors Sa = build_psi_b(kField, 3, CellGrid(128));
    SpectralCorrectors Sb = build_psi_b(kField, 3, CellGrid(256));
    REQUIRE(std::abs(Sa.b[1] - Sb.b[1]) < 1e-10);
    REQUIRE(std::abs(Sa.b[3] - Sb.b[3]) < 1e-10);
    // compare psi^3 at shared nodes (every second node of the finer grid)
    for (int j = 0; j < 128; j += 8)
        REQUIRE(Sa.psi[3][j] == Catch::Approx(Sb.psi[3][2 * j]).margin(1e-10));
}

TEST_CASE("tau flux correctors match a xi-level assembly") {
    const SpectralCorrectors& S = test_correctors();
    const CellGrid& g = S.grid;
    SolveStats stats;
    for (double xi : {0.3, 0.7}) {
        SpectralAtXi X = build_spectral_at_xi(S, xi);
        const cplx ix(0, xi);
        ComplexField ac(S.a.begin(), S.a.end());
        // m = 0, top level: -Delta Phi = a(grad zeta + i xi zeta_prev) - mean
        for (int n : {0, 1}) {
            ComplexField flux = product(ac, grad(X.zeta[0][n], g), g);
            if (n >= 1) {
                ComplexField az = product(ac, X.zeta[0][n - 1], g);
                for (int j = 0; j < g.N; ++j) flux[j] += ix * az[j];
            }
            cplx mu = cell_mean(flux);
            for (auto& v : flux) v -= mu;
            ComplexField Phi = solve_poisson(flux, g, cplx(0), &stats);
            ComplexField tau_xi = grad(Phi, g);
            cplx pw = std::pow(ix, n + 1);
            double diff = 0, den = 0;
            for (int j = 0; j < g.N; ++j) {
                diff += std::norm(S.tau_at(n, 0)[j] * pw - tau_xi[j]);
                den += std::norm(tau_xi[j]);
            }
            REQUIRE(std::sqrt(diff / std::max(den, 1e-30)) < 1e-9);
        }
        // m = 1, n = -1 slot: -Delta Phi = zeta^{0,0}
        {
            ComplexField Phi = solve_poisson(X.zeta[0][0], g, cplx(0), &stats);
            ComplexField tau_xi = grad(Phi, g);
            double diff = 0, den = 0;
            for (int j = 0; j < g.N; ++j) {
                diff += std::norm(S.tau_at(-1, 1)[j] * cplx(1.0) - tau_xi[j] / std::pow(ix, 1));
                den += std::norm(tau_xi[j] / std::pow(ix, 1));
            }
            REQUIRE(std::sqrt(diff / std::max(den, 1e-30)) < 1e-9);
        }
    }
}
