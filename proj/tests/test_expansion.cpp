#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ltwave/bloch.hpp"
#include "ltwave/coefficient.hpp"
#include "ltwave/expansion.hpp"
#include "ltwave/fine_solver.hpp"
#include "ltwave/util.hpp"

using namespace ltwave;

namespace {
const CoefficientField kField = make_two_plus_sin_field();
const CellGrid kGrid(512);

SpectralCorrectors& spec6() {
    static SpectralCorrectors S = build_spectral(kField, 6, kGrid);
    return S;
}

HyperbolicCorrectors& hyp6() {
    static HyperbolicCorrectors H = [] {
        HyperbolicCorrectors h = build_phi_a(kField, 6, kGrid);
        build_sigma_hyp(h);
        return h;
    }();
    return H;
}
} // namespace

TEST_CASE("homogeneous medium: the expansion is the effective solution") {
    CellGrid g(128);
    CoefficientField ones = make_constant_field(1.0);
    SpectralCorrectors S = build_spectral(ones, 4, g);
    Impulse f = make_impulse(4.0, 2.0, 3);
    const double eps = 1.0 / 8.0;
    EffectiveSymbolSpec spec = make_effective_spec(S.b, 4, eps, EffectiveVariant::Base, 1.0, 2.0);
    ModeSolution sol = solve_effective(spec, f, {1.3});
    TwoScaleField Sf = assemble_S(S, sol, f, eps, 4, 0);
    for (size_t i = 0; i < Sf.modes.size(); ++i)
        for (int j = 0; j < g.N; j += 13)
            REQUIRE(std::abs(Sf.modes[i].W[j] - sol.modes[i].u[0]) < 1e-11);

    SpectralResidualReport rep = residual_spectral(S, sol, f, eps, 4, 0);
    REQUIRE(rep.residual_norm < 1e-9);
}

TEST_CASE("first-order expansion matches a hand assembly") {
    const SpectralCorrectors& S = spec6();
    Impulse f = make_impulse(4.0, 2.0, 5);
    const double eps = 1.0 / 16.0;
    EffectiveSymbolSpec spec =
        make_effective_spec(S.b, 1, eps, EffectiveVariant::Base, kField.lambda, 2.0);
    ModeSolution sol = solve_effective(spec, f, {0.9});
    TwoScaleField Sf = assemble_S(S, sol, f, eps, 1, 0);
    for (size_t i = 0; i < Sf.modes.size(); ++i) {
        double xi = sol.modes[i].xi;
        double g1 = gamma_at_order(S, eps * xi, 1);
        for (int j = 0; j < kGrid.N; j += 29) {
            cplx hand = g1 * sol.modes[i].u[0] *
                        (1.0 + eps * S.psi[1][j] * cplx(0, xi));
            REQUIRE(std::abs(Sf.modes[i].W[j] - hand) < 1e-12);
        }
    }
}

TEST_CASE("second sum vanishes after the impulse support clears") {
    const SpectralCorrectors& S = spec6();
    Impulse f = make_impulse(4.0, 2.0, 5);
    const double eps = 1.0 / 16.0;
    EffectiveSymbolSpec spec =
        make_effective_spec(S.b, 4, eps, EffectiveVariant::Base, kField.lambda, 2.0);
    ModeSolution sol = solve_effective(spec, f, {2.5}); // past t1 = 1
    TwoScaleField with_zeta = assemble_S(S, sol, f, eps, 4, 0);
    // hand-assembled first sum only
    TwoScaleField first_only = with_zeta;
    for (size_t i = 0; i < first_only.modes.size(); ++i) {
        double xi = sol.modes[i].xi;
        double g4 = gamma_at_order(S, eps * xi, 4);
        for (int j = 0; j < kGrid.N; ++j) {
            cplx acc = 0, pw = 1.0;
            for (int n = 0; n <= 4; ++n) {
                acc += S.psi[n][j] * g4 * pw;
                pw *= eps * cplx(0, xi);
            }
            first_only.modes[i].W[j] = acc * sol.modes[i].u[0];
        }
    }
    for (size_t i = 0; i < with_zeta.modes.size(); ++i)
        for (int j = 0; j < kGrid.N; j += 31)
            REQUIRE(std::abs(with_zeta.modes[i].W[j] - first_only.modes[i].W[j]) < 1e-15);
}

TEST_CASE("spectral residual decomposition is exact") {
    const SpectralCorrectors& S = spec6();
    Impulse f = make_impulse(4.0, 2.0, 7);
    for (int ell : {1, 2, 3, 4}) {
        for (double t : {0.6, 1.7}) { // inside and past the impulse support
            const double eps = 1.0 / 16.0;
            EffectiveSymbolSpec spec =
                make_effective_spec(S.b, ell, eps, EffectiveVariant::Base, kField.lambda, 2.0);
            ModeSolution sol = solve_effective(spec, f, {t});
            SpectralResidualReport rep = residual_spectral(S, sol, f, eps, ell, 0);
            CAPTURE(ell, t, rep.residual_norm, rep.identity_gap);
            // the gap floor is the corrector-solve tolerance amplified by 1/eps^2
            REQUIRE(rep.identity_gap < 3e-7);
            if (ell <= 3) REQUIRE(rep.identity_gap < 0.01 * rep.residual_norm);
        }
    }
}

TEST_CASE("spectral residual measure scales at order ell") {
    const SpectralCorrectors& S = spec6();
    Impulse f = make_impulse(4.0, 2.0, 7);
    std::vector<double> eps_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    for (int ell : {1, 3}) {
        std::vector<double> vals;
        for (double eps : eps_list) {
            EffectiveSymbolSpec spec =
                make_effective_spec(S.b, ell, eps, EffectiveVariant::Base, kField.lambda, 2.0);
            ModeSolution sol = solve_effective(spec, f, {1.7});
            vals.push_back(residual_spectral(S, sol, f, eps, ell, 0).duhamel_measure);
        }
        SlopeFit fit = fit_loglog(eps_list, vals, 1e-12);
        CAPTURE(ell, vals);
        REQUIRE(fit.slope >= ell - 0.2);
    }
}

TEST_CASE("hyperbolic residual identity for plane-wave data") {
    const HyperbolicCorrectors& H = hyp6();
    for (int ell : {1, 2, 3, 4}) {
        for (auto [xi, om, eps] : {std::tuple{1.3, 0.9, 1.0 / 8}, std::tuple{0.7, 1.4, 1.0 / 16}}) {
            HyperbolicResidualReport rep = residual_hyperbolic(H, eps, ell, xi, om);
            CAPTURE(ell, xi, om, eps, rep.residual_norm, rep.identity_gap);
            REQUIRE(rep.identity_gap < 3e-7);
            if (ell <= 3) REQUIRE(rep.identity_gap < 0.01 * rep.residual_norm);
        }
    }
}

TEST_CASE("hyperbolic expansion: hand assembly at order two") {
    const HyperbolicCorrectors& H = hyp6();
    SpectralCorrectors S = build_psi_b(kField, 3, kGrid);
    Impulse f = make_impulse(4.0, 2.0, 9);
    const double eps = 1.0 / 16.0;
    std::vector<double> rb = revamp_b(H, 2);
    EffectiveSymbolSpec spec =
        make_effective_spec(rb, 2, eps, EffectiveVariant::Base, kField.lambda, 2.0);
    ModeSolution sol = solve_effective(spec, f, {0.8});
    TwoScaleField Hf = assemble_H(H, sol, f.L, eps, 2, 0);
    for (size_t i = 0; i < Hf.modes.size(); ++i) {
        double xi = sol.modes[i].xi;
        for (int j = 0; j < kGrid.N; j += 37) {
            // n+m <= 2 with m even: (0,0), (1,0), (2,0), (0,2)
            cplx hand = sol.modes[i].u[0];
            hand += eps * cplx(0, xi) * H.phi_at(1, 0)[j] * sol.modes[i].u[0];
            hand += eps * eps * std::pow(cplx(0, xi), 2) * H.phi_at(2, 0)[j] * sol.modes[i].u[0];
            hand += eps * eps * H.phi_at(0, 2)[j] * sol.time_derivative((int)i, 2, 0);
            REQUIRE(std::abs(Hf.modes[i].W[j] - hand) < 1e-12);
        }
    }
}

TEST_CASE("two-scale norms are Parseval-consistent with grid evaluation") {
    const SpectralCorrectors& S = spec6();
    LineDomain dom{4, 16, 32};
    Impulse f = make_impulse(dom.L, 2.0, 13);
    EffectiveSymbolSpec spec =
        make_effective_spec(S.b, 3, dom.eps(), EffectiveVariant::Base, kField.lambda, 2.0);
    ModeSolution sol = solve_effective(spec, f, {1.1});
    TwoScaleField Sf = assemble_S(S, sol, f, dom.eps(), 3, 0);

    RealField u, ut;
    Sf.evaluate(dom, u, ut);
    double grid_l2 = 0;
    for (double v : u) grid_l2 += v * v;
    grid_l2 = std::sqrt(grid_l2 * dom.dx());
    REQUIRE(grid_l2 == Catch::Approx(Sf.l2_norm()).epsilon(1e-12));
}

TEST_CASE("error norms against the Floquet reference") {
    const SpectralCorrectors& S = spec6();
    LineDomain dom{4, 16, 32};
    Impulse f = make_impulse(dom.L, 2.0, 17);
    const double eps = dom.eps(), t = 1.5;
    BlochDuhamelResult ref = bloch_duhamel(S.a, kGrid, eps, f, t, 12, 32);

    EffectiveSymbolSpec spec =
        make_effective_spec(S.b, 2, eps, EffectiveVariant::Base, kField.lambda, 2.0);
    ModeSolution sol = solve_effective(spec, f, {t});
    TwoScaleField Sf = assemble_S(S, sol, f, eps, 2, 0);

    ErrorNorms errs = error_norms(ref.field, Sf);
    REQUIRE(errs.l2 > 0);
    REQUIRE(errs.energy > errs.l2 * 0.1);
    REQUIRE(errs.energy < 0.1 * ref.field.energy_norm()); // order-two expansion is close

    ErrorNorms self = error_norms(ref.field, ref.field);
    REQUIRE(self.l2 == 0.0);
    REQUIRE(self.energy == 0.0);

    // mismatched mode sets are rejected
    TwoScaleField trunc = ref.field;
    trunc.modes.pop_back();
    REQUIRE_THROWS_AS(error_norms(trunc, Sf), GridMismatch);
}

TEST_CASE("expansion error decreases linearly at first order") {
    const SpectralCorrectors& S = spec6();
    Impulse f = make_impulse(4.0, 2.0, 19);
    const double t = 1.2;
    std::vector<double> eps_list = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::vector<double> errs;
    for (double eps : eps_list) {
        BlochDuhamelResult ref = bloch_duhamel(S.a, kGrid, eps, f, t, 12, 32);
        EffectiveSymbolSpec spec =
            make_effective_spec(S.b, 1, eps, EffectiveVariant::Base, kField.lambda, 2.0);
        ModeSolution sol = solve_effective(spec, f, {t});
        TwoScaleField Sf = assemble_S(S, sol, f, eps, 1, 0);
        errs.push_back(error_norms(ref.field, Sf).l2);
    }
    SlopeFit fit = fit_loglog(eps_list, errs, 1e-12);
    CAPTURE(errs);
    REQUIRE(fit.slope > 0.8);
}

TEST_CASE("expansion error is stable under cell-grid refinement") {
    Impulse f = make_impulse(4.0, 2.0, 23);
    const double eps = 1.0 / 32.0, t = 2.0;
    auto err_at = [&](int N) {
        CellGrid g(N);
        SpectralCorrectors S = build_spectral(kField, 3, g);
        BlochDuhamelResult ref = bloch_duhamel(S.a, g, eps, f, t, 12, 32);
        EffectiveSymbolSpec spec =
            make_effective_spec(S.b, 1, eps, EffectiveVariant::Base, kField.lambda, 2.0);
        ModeSolution sol = solve_effective(spec, f, {t});
        TwoScaleField Sf = assemble_S(S, sol, f, eps, 1, 0);
        return error_norms(ref.field, Sf);
    };
    ErrorNorms lo = err_at(256), hi = err_at(512);
    REQUIRE(std::abs(lo.l2 - hi.l2) <= 0.02 * hi.l2);
    REQUIRE(std::abs(lo.energy - hi.energy) <= 0.02 * hi.energy);
}
