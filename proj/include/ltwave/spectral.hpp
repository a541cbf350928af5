#pragma once

// Spectral corrector hierarchy on the cell: the corrector fields psi^n and
// homogenized tensors b^n, flux correctors sigma^n, auxiliary correctors
// rho^n, the ill-preparedness correctors zeta^{n,m} with their flux
// correctors tau^{n,m}, and the Fourier multiplier gamma_ell.
//
// Everything is built twice: once as real tensor components on the cell
// (powers of (i xi) stripped, with the sign bookkeeping that stripping
// introduces), and once as a complex-valued hierarchy at sampled xi. The two
// paths must agree; the complex path is the unambiguous oracle.
//
// Integration constants of the zeta hierarchy are never taken from a printed
// formula: the constant of zeta^{n-2,m} is pinned by requiring the level-n
// solve to be Fredholm-compatible, which is the operational criterion.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ltwave/coefficient.hpp"
#include "ltwave/elliptic.hpp"
#include "ltwave/errors.hpp"
#include "ltwave/grid.hpp"

namespace ltwave {

struct SpectralCorrectors {
    CellGrid grid{512};
    CoefficientField field;
    RealField a;
    int ell = 0;
    bool dealias = true;

    std::vector<RealField> psi;   // psi[n], n = 0..ell; psi[0] = 1
    std::vector<double> b;        // b[n], n = 1..ell; b[0] = 0 by convention
    std::vector<RealField> sigma; // sigma[n], n = 0..ell
    std::vector<RealField> rho;   // rho[n], n = 2..ell (rho[0], rho[1] empty)

    // zeta[m][n], full fields (constants pinned), n = 0..(ell-3-2m)
    std::vector<std::vector<RealField>> zeta;
    // tau[m][k] stores tau^{n,m} at k = n+1, so the n = -1 slot (m >= 1,
    // present when ell-3 is odd) sits at k = 0.
    std::vector<std::vector<RealField>> tau;

    SolveStats stats;

    int zeta_max_n(int m) const { return ell - 3 - 2 * m; }
    int zeta_families() const { return ell >= 3 ? (ell - 3) / 2 + 1 : 0; }
    int tau_families() const { return ell >= 2 ? (ell - 2) / 2 + 1 : 0; }

    const RealField& zeta_at(int n, int m) const {
        if (m < 0 || m >= static_cast<int>(zeta.size()) || n < 0 ||
            n >= static_cast<int>(zeta[m].size()))
            throw MissingCorrector("zeta(" + std::to_string(n) + "," + std::to_string(m) + ")");
        return zeta[m][n];
    }

    const RealField& tau_at(int n, int m) const {
        if (m < 0 || m >= static_cast<int>(tau.size()) || n + 1 < 0 ||
            n + 1 >= static_cast<int>(tau[m].size()))
            throw MissingCorrector("tau(" + std::to_string(n) + "," + std::to_string(m) + ")");
        return tau[m][n + 1];
    }

    /// gamma_ell(xi) = E[|sum_n psi^n (i xi)^n|^2]^{-1}, real, in (0, 1].
    double gamma(double xi) const {
        const int N = grid.N;
        double acc = 0;
        for (int j = 0; j < N; ++j) {
            cplx s = 0;
            cplx pw = 1.0;
            for (int n = 0; n <= ell; ++n) {
                s += psi[n][j] * pw;
                pw *= cplx(0.0, xi);
            }
            acc += std::norm(s);
        }
        return static_cast<double>(N) / acc;
    }

    /// Taylor sum sum_{n<=order} lambda_xi^n = sum b^{n-1} * (-(i xi)^n);
    /// odd n contribute nothing since even-order b vanish.
    double lambda_taylor(double xi, int order) const {
        double s = 0;
        for (int n = 2; n <= order; ++n) {
            if (n % 2 != 0) continue; // lambda^n = 0 for n odd
            double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0; // -(i xi)^n
            s += -sign * b[n - 1] * std::pow(xi, n);
        }
        return s;
    }

    double h1_norm(const RealField& f) const {
        RealField df = grad(f, grid);
        return std::sqrt(l2_norm(f) * l2_norm(f) + l2_norm(df) * l2_norm(df));
    }
};

namespace detail {

inline RealField scaled(const RealField& f, double c) {
    RealField out(f.size());
    for (size_t i = 0; i < f.size(); ++i) out[i] = c * f[i];
    return out;
}

inline void axpy(RealField& y, double alpha, const RealField& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline void add(RealField& y, const RealField& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

} // namespace detail

/// Build psi[0..ell] and b[1..ell] by the real recursion
///   -(a psi^n')' = (a psi^{n-1})' + a(psi^{n-1}' + psi^{n-2})
///                  - sum_{k=2}^{n} b^{k-1} psi^{n-k},
///   b^{n} = E[a(psi^n' + psi^{n-1})].
inline SpectralCorrectors build_psi_b(const CoefficientField& field, int ell,
                                      const CellGrid& grid = CellGrid(512), bool dealias = true) {
    if (ell < 1) throw std::invalid_argument("build_psi_b: ell >= 1 required");
    SpectralCorrectors S;
    S.grid = grid;
    S.field = field;
    S.a = field.sample(grid);
    S.ell = ell;
    S.dealias = dealias;
    const int N = grid.N;

    S.psi.assign(ell + 1, RealField());
    S.b.assign(ell + 1, 0.0);
    S.psi[0].assign(N, 1.0);

    for (int n = 1; n <= ell; ++n) {
        const RealField& pm1 = S.psi[n - 1];
        RealField dpm1 = grad(pm1, grid);

        // flux average b^{n-1} (enters the recursion as the k = n term)
        if (n >= 2) {
            RealField adp = product(S.a, dpm1, grid, dealias);
            RealField apm2 = product(S.a, S.psi[n - 2], grid, dealias);
            S.b[n - 1] = cell_mean(adp) + cell_mean(apm2);
        }

        RealField apm1 = product(S.a, pm1, grid, dealias);
        RealField rhs = grad(apm1, grid);                       // (a psi^{n-1})'
        detail::add(rhs, product(S.a, dpm1, grid, dealias));    // a psi^{n-1}'
        if (n >= 2) detail::add(rhs, product(S.a, S.psi[n - 2], grid, dealias));
        for (int k = 2; k <= n; ++k)
            detail::axpy(rhs, -S.b[k - 1], S.psi[n - k]);

        S.psi[n] = solve_elliptic(S.a, rhs, grid, 0.0, &S.stats, dealias);
    }
    {
        RealField dp = grad(S.psi[ell], grid);
        RealField adp = product(S.a, dp, grid, dealias);
        RealField apm1 = product(S.a, S.psi[ell - 1], grid, dealias);
        S.b[ell] = cell_mean(adp) + cell_mean(apm1);
    }
    return S;
}

/// Flux correctors sigma^n = Phi^n' with
/// -Phi^n'' = a(psi^n' + psi^{n-1}) - sum_{k=2}^{n+1} b^{k-1} psi^{n+1-k}.
inline void build_flux_sigma(SpectralCorrectors& S) {
    const CellGrid& g = S.grid;
    S.sigma.assign(S.ell + 1, RealField());
    for (int n = 0; n <= S.ell; ++n) {
        RealField rhs = product(S.a, grad(S.psi[n], g), g, S.dealias);
        if (n >= 1) detail::add(rhs, product(S.a, S.psi[n - 1], g, S.dealias));
        for (int k = 2; k <= n + 1; ++k)
            detail::axpy(rhs, -S.b[k - 1], S.psi[n + 1 - k]);
        RealField Phi = solve_poisson(rhs, g, 0.0, &S.stats);
        S.sigma[n] = grad(Phi, g);
    }
}

/// Auxiliary correctors rho^n = Psi^n' with -Psi^n'' = psi^{n-1}, n >= 2.
inline void build_rho(SpectralCorrectors& S) {
    const CellGrid& g = S.grid;
    S.rho.assign(S.ell + 1, RealField());
    for (int n = 2; n <= S.ell; ++n) {
        RealField Psi = solve_poisson(S.psi[n - 1], g, 0.0, &S.stats);
        S.rho[n] = grad(Psi, g);
    }
}

namespace detail {

// One zeta family (fixed m) built with deferred integration constants: the
// constant of level n-2 is the unique value making the level-n right-hand
// side mean-free. Returns full fields for n = 0..n_need.
//
// src(n) supplies the family-specific source term: for m = 0 it is
// -psi^{n+1} + sum_k (-1)^{n+1-k} E[psi^{n+1-k} psi^k]; for m >= 1 it is the
// full field zeta^{n,m-1}. src_mean(n) must return its exact mean.
template <class Src, class SrcMean>
std::vector<RealField> build_zeta_family(SpectralCorrectors& S, int n_need, Src&& src,
                                         SrcMean&& src_mean) {
    const CellGrid& g = S.grid;
    const int N = g.N;
    if (n_need < 0) return {};

    // response of the solution to a unit constant on the previous level
    RealField da = grad(S.a, g);
    RealField w1 = solve_elliptic(S.a, da, g, 0.0, &S.stats, S.dealias);
    RealField dw1 = grad(w1, g);
    const double Ea = cell_mean(S.a);
    const double Eaw1p = cell_mean(product(S.a, dw1, g, S.dealias));

    const int n_solve = n_need + 1; // compat at n_need+2 pins the last constant
    std::vector<RealField> z0(n_solve + 1);          // zero-mean parts
    std::vector<double> c(n_need + 1, 0.0);          // pinned constants
    std::vector<bool> have_c(n_need + 1, false);

    auto full_field = [&](int n) -> RealField {
        RealField f = z0[n];
        if (n >= 1 && have_c[n - 1]) detail::axpy(f, c[n - 1], w1); // pending w1 response
        if (n <= n_need && have_c[n]) {
            for (auto& v : f) v += c[n];
        }
        return f;
    };

    // rhs of level n assembled from zero-mean data only (previous-level
    // constant handled separately through w1 / direct constant)
    auto rhs_zero = [&](int n) -> RealField {
        RealField rhs = src(n);
        if (n >= 1) {
            RealField zprev = z0[n - 1];
            if (n - 2 >= 0 && have_c[n - 2]) detail::axpy(zprev, c[n - 2], w1);
            RealField az = product(S.a, zprev, g, S.dealias);
            detail::add(rhs, grad(az, g));
            detail::add(rhs, product(S.a, grad(zprev, g), g, S.dealias));
        }
        if (n >= 2) {
            RealField z2 = z0[n - 2];
            if (n - 3 >= 0 && have_c[n - 3]) detail::axpy(z2, c[n - 3], w1);
            if (have_c[n - 2]) {
                for (auto& v : z2) v += c[n - 2];
            }
            detail::add(rhs, product(S.a, z2, g, S.dealias));
        }
        return rhs;
    };

    for (int n = 0; n <= n_solve + 1; ++n) {
        // Pin c[n-2] from the compatibility of level n: the rhs mean with
        // c[n-2] = 0, divided by the constant's responsivity.
        if (n >= 2 && n - 2 <= n_need) {
            // z0[n-1] carries the pending response c[n-2] * w1, which the
            // denominator accounts for; z0[n-2] is completed with the known
            // c[n-3] response before averaging.
            double mean0 = src_mean(n);
            mean0 += cell_mean(product(S.a, grad(z0[n - 1], g), g, S.dealias));
            RealField z2 = z0[n - 2];
            if (n - 3 >= 0 && have_c[n - 3]) detail::axpy(z2, c[n - 3], w1);
            mean0 += cell_mean(product(S.a, z2, g, S.dealias));
            c[n - 2] = -mean0 / (Ea + Eaw1p);
            have_c[n - 2] = true;
        }
        if (n > n_solve) break;
        RealField rhs = rhs_zero(n);
        const double rn = l2_norm(rhs);
        if (rn > 0) S.stats.note_compat(std::abs(cell_mean(rhs)) / rn);
        z0[n] = solve_elliptic(S.a, rhs, g, 0.0, &S.stats, S.dealias);
    }

    std::vector<RealField> out(n_need + 1, RealField(N, 0.0));
    for (int n = 0; n <= n_need; ++n) out[n] = full_field(n);
    return out;
}

} // namespace detail

/// Build the zeta families for n + 2m <= ell - 3. Means are pinned by the
/// next-level compatibility identities; by construction E[zeta^{0,m}] = 0.
inline void build_zeta(SpectralCorrectors& S) {
    const CellGrid& g = S.grid;
    const int N = g.N;
    S.zeta.clear();
    if (S.ell < 3) return;
    const int mfam = S.zeta_families();
    S.zeta.resize(mfam);

    // E[psi^p psi^q] table used in the m = 0 source
    std::vector<std::vector<double>> Epp(S.ell + 2, std::vector<double>(S.ell + 2, 0.0));
    for (int p = 0; p <= S.ell; ++p)
        for (int q = 0; q <= S.ell; ++q)
            Epp[p][q] = cell_mean(product(S.psi[p], S.psi[q], g, S.dealias));

    for (int m = 0; m < mfam; ++m) {
        const int n_need = S.zeta_max_n(m);
        if (m == 0) {
            auto src = [&](int n) -> RealField {
                RealField r(N, 0.0);
                if (n + 1 <= S.ell) {
                    for (int j = 0; j < N; ++j) r[j] = -S.psi[n + 1][j];
                }
                double consts = 0;
                for (int k = 0; k <= n + 1 && k <= S.ell; ++k) {
                    int p = n + 1 - k;
                    if (p > S.ell) continue;
                    double sgn = (p % 2 == 0) ? 1.0 : -1.0; // conjugation of (i xi)^p
                    consts += sgn * Epp[p][k];
                }
                for (auto& v : r) v += consts;
                return r;
            };
            auto src_mean = [&](int n) -> double {
                double consts = 0;
                for (int k = 0; k <= n + 1 && k <= S.ell; ++k) {
                    int p = n + 1 - k;
                    if (p > S.ell) continue;
                    double sgn = (p % 2 == 0) ? 1.0 : -1.0;
                    consts += sgn * Epp[p][k];
                }
                return consts; // E[psi^{n+1}] = 0
            };
            S.zeta[m] = detail::build_zeta_family(S, n_need, src, src_mean);
        } else {
            const auto& prev = S.zeta[m - 1];
            auto src = [&](int n) -> RealField {
                if (n < static_cast<int>(prev.size())) return prev[n];
                return RealField(N, 0.0);
            };
            auto src_mean = [&](int n) -> double {
                if (n < static_cast<int>(prev.size())) return cell_mean(prev[n]);
                return 0.0;
            };
            S.zeta[m] = detail::build_zeta_family(S, n_need, src, src_mean);
        }
    }
}

/// Flux correctors tau^{n,m} = Phi' with
///   m = 0:  -Phi'' = a(zeta^{n,0}' + zeta^{n-1,0}) - E[same]
///   m >= 1: -Phi'' = a(zeta^{n,m}' + zeta^{n-1,m}) + zeta^{n+1,m-1}
/// including the n = -1 slot for m >= 1 (present when ell-3 is odd).
inline void build_tau(SpectralCorrectors& S) {
    const CellGrid& g = S.grid;
    const int N = g.N;
    S.tau.clear();
    if (S.ell < 2) return;
    const int mfam = S.tau_families();
    S.tau.resize(mfam);

    auto zeta_or_zero = [&](int n, int m) -> RealField {
        if (m < 0 || n < 0) return RealField(N, 0.0);
        if (m < static_cast<int>(S.zeta.size()) && n < static_cast<int>(S.zeta[m].size()))
            return S.zeta[m][n];
        return RealField(N, 0.0);
    };

    for (int m = 0; m < mfam; ++m) {
        const int n_top = S.ell - 3 - 2 * m;
        const int n_lo = (m == 0) ? 0 : -1;
        if (n_top < n_lo) {
            S.tau[m].clear();
            continue;
        }
        S.tau[m].assign(n_top + 2, RealField(N, 0.0)); // unset slots are zero by convention
        for (int n = n_lo; n <= n_top; ++n) {
            RealField rhs(N, 0.0);
            RealField zn = zeta_or_zero(n, m);
            detail::add(rhs, product(S.a, grad(zn, g), g, S.dealias));
            detail::add(rhs, product(S.a, zeta_or_zero(n - 1, m), g, S.dealias));
            if (m == 0) {
                const double mu = cell_mean(rhs);
                for (auto& v : rhs) v -= mu;
            } else {
                detail::add(rhs, zeta_or_zero(n + 1, m - 1));
            }
            RealField Phi = solve_poisson(rhs, g, 0.0, &S.stats);
            S.tau[m][n + 1] = grad(Phi, g);
        }
    }
}

/// Convenience: full spectral build (psi, b, sigma, rho, zeta, tau).
inline SpectralCorrectors build_spectral(const CoefficientField& field, int ell,
                                         const CellGrid& grid = CellGrid(512),
                                         bool dealias = true) {
    SpectralCorrectors S = build_psi_b(field, ell, grid, dealias);
    build_flux_sigma(S);
    build_rho(S);
    build_zeta(S);
    build_tau(S);
    return S;
}

/// Coefficients gamma_ell^k of gamma_ell(xi) = 1 + sum_{k>=2} gamma^k xi^k,
/// obtained by power-series inversion of E[|sum psi^n (i xi)^n|^2].
inline std::vector<double> gamma_taylor(const SpectralCorrectors& S, int order) {
    const CellGrid& g = S.grid;
    std::vector<double> cp(order + 1, 0.0);
    for (int n = 0; n <= S.ell; ++n) {
        for (int k = 0; k <= S.ell; ++k) {
            int p = n + k;
            if (p > order) continue;
            cplx ip = std::pow(cplx(0, 1), n) * std::pow(cplx(0, -1), k);
            double E = cell_mean(product(S.psi[n], S.psi[k], g, S.dealias));
            cp[p] += (ip * E).real();
        }
    }
    std::vector<double> inv(order + 1, 0.0);
    inv[0] = 1.0 / cp[0];
    for (int q = 1; q <= order; ++q) {
        double s = 0;
        for (int r = 1; r <= q; ++r) s += cp[r] * inv[q - r];
        inv[q] = -s / cp[0];
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Complex-xi oracle path: the same hierarchy solved in complex arithmetic at
// one sampled wave number, exactly as the xi-level equations read.
// ---------------------------------------------------------------------------

struct SpectralAtXi {
    double xi = 0;
    std::vector<ComplexField> psi; // psi_xi^n
    std::vector<cplx> lambda;      // lambda_xi^n
    std::vector<std::vector<ComplexField>> zeta; // zeta_xi^{n,m}, full fields
};

/// Solve the xi-level hierarchy (psi and zeta families) at a sampled xi.
inline SpectralAtXi build_spectral_at_xi(const SpectralCorrectors& S, double xi) {
    const CellGrid& g = S.grid;
    const int N = g.N;
    const cplx ix(0.0, xi);
    SpectralAtXi R;
    R.xi = xi;
    R.psi.assign(S.ell + 1, ComplexField(N, 0.0));
    R.lambda.assign(S.ell + 2, cplx(0.0));
    for (int j = 0; j < N; ++j) R.psi[0][j] = 1.0;

    SolveStats stats;
    ComplexField ac(S.a.begin(), S.a.end());

    auto cgrad = [&](const ComplexField& f) { return grad(f, g); };
    auto cprod = [&](const ComplexField& u, const ComplexField& v) {
        return product(u, v, g, S.dealias);
    };

    for (int n = 1; n <= S.ell; ++n) {
        ComplexField dpm1 = cgrad(R.psi[n - 1]);
        ComplexField flux = cprod(ac, dpm1); // a psi^{n-1}'
        ComplexField apm2(N, 0.0);
        if (n >= 2) apm2 = cprod(ac, R.psi[n - 2]);
        // lambda^n = -E[i xi a (psi^{n-1}' + i xi psi^{n-2})]
        R.lambda[n] = -(ix * cell_mean(flux) + ix * ix * cell_mean(apm2));

        ComplexField apm1 = cprod(ac, R.psi[n - 1]);
        ComplexField rhs = cgrad(apm1);
        for (int j = 0; j < N; ++j)
            rhs[j] = ix * rhs[j] + ix * (flux[j] + ix * apm2[j]);
        for (int k = 2; k <= n; ++k)
            for (int j = 0; j < N; ++j) rhs[j] += R.lambda[k] * R.psi[n - k][j];
        R.psi[n] = solve_elliptic(S.a, rhs, g, cplx(0.0), &stats, S.dealias);
    }
    {
        ComplexField flux = cprod(ac, cgrad(R.psi[S.ell]));
        ComplexField apm = cprod(ac, R.psi[S.ell - 1]);
        R.lambda[S.ell + 1] = -(ix * cell_mean(flux) + ix * ix * cell_mean(apm));
    }

    // zeta families with deferred constants, complex arithmetic
    if (S.ell >= 3) {
        const int mfam = S.zeta_families();
        R.zeta.resize(mfam);

        RealField da = grad(S.a, g);
        ComplexField dac(da.begin(), da.end());
        RealField w1 = solve_elliptic(S.a, da, g, 0.0, &stats, S.dealias);
        RealField dw1 = grad(w1, g);
        const double Ea = cell_mean(S.a);
        const double Eaw1p = cell_mean(product(S.a, dw1, g, S.dealias));
        ComplexField w1c(w1.begin(), w1.end());

        for (int m = 0; m < mfam; ++m) {
            const int n_need = S.zeta_max_n(m);
            const int n_solve = n_need + 1;
            std::vector<ComplexField> z0(n_solve + 1);
            std::vector<cplx> c(n_need + 1, cplx(0.0));
            std::vector<bool> have_c(n_need + 1, false);

            auto src = [&](int n) -> ComplexField {
                ComplexField r(N, cplx(0.0));
                if (m == 0) {
                    if (n + 1 <= S.ell)
                        for (int j = 0; j < N; ++j) r[j] = -R.psi[n + 1][j];
                    cplx consts = 0; // sum_k E[conj(psi^{n+1-k}) psi^k]
                    for (int k = 0; k <= n + 1 && k <= S.ell; ++k) {
                        int p = n + 1 - k;
                        if (p > S.ell) continue;
                        ComplexField cp_field(N);
                        for (int j = 0; j < N; ++j) cp_field[j] = std::conj(R.psi[p][j]);
                        consts += cell_mean(cprod(cp_field, R.psi[k]));
                    }
                    for (auto& v : r) v += consts;
                } else {
                    if (n < static_cast<int>(R.zeta[m - 1].size())) r = R.zeta[m - 1][n];
                }
                return r;
            };
            auto src_mean = [&](int n) -> cplx { return cell_mean(src(n)); };

            for (int n = 0; n <= n_solve + 1; ++n) {
                if (n >= 2 && n - 2 <= n_need) {
                    cplx mean0 = src_mean(n);
                    mean0 += ix * cell_mean(cprod(ac, cgrad(z0[n - 1])));
                    ComplexField z2 = z0[n - 2];
                    if (n - 3 >= 0 && have_c[n - 3])
                        for (int j = 0; j < N; ++j) z2[j] += c[n - 3] * w1c[j] * ix;
                    mean0 += ix * ix * cell_mean(cprod(ac, z2));
                    c[n - 2] = -mean0 / (ix * ix * (Ea + Eaw1p));
                    have_c[n - 2] = true;
                }
                if (n > n_solve) break;

                ComplexField rhs = src(n);
                if (n >= 1) {
                    ComplexField zprev = z0[n - 1];
                    if (n - 2 >= 0 && have_c[n - 2])
                        for (int j = 0; j < N; ++j) zprev[j] += c[n - 2] * w1c[j] * ix;
                    ComplexField az = cprod(ac, zprev);
                    ComplexField dak = cgrad(az);
                    ComplexField fl = cprod(ac, cgrad(zprev));
                    for (int j = 0; j < N; ++j) rhs[j] += ix * dak[j] + ix * fl[j];
                }
                if (n >= 2) {
                    ComplexField z2 = z0[n - 2];
                    if (n - 3 >= 0 && have_c[n - 3])
                        for (int j = 0; j < N; ++j) z2[j] += c[n - 3] * w1c[j] * ix;
                    if (have_c[n - 2])
                        for (auto& v : z2) v += c[n - 2];
                    ComplexField az2 = cprod(ac, z2);
                    for (int j = 0; j < N; ++j) rhs[j] += ix * ix * az2[j];
                }
                z0[n] = solve_elliptic(S.a, rhs, g, cplx(0.0), &stats, S.dealias);
            }

            R.zeta[m].assign(n_need + 1, ComplexField(N, cplx(0.0)));
            for (int n = 0; n <= n_need; ++n) {
                ComplexField f = z0[n];
                if (n >= 1 && have_c[n - 1])
                    for (int j = 0; j < N; ++j) f[j] += c[n - 1] * w1c[j] * ix;
                if (have_c[n])
                    for (auto& v : f) v += c[n];
                R.zeta[m][n] = f;
            }
        }
    }
    return R;
}

/// Max relative deviation between the tensor-assembled and complex-path
/// hierarchies at one xi: psi contractions, lambda values, zeta contractions.
inline double dual_path_deviation(const SpectralCorrectors& S, const SpectralAtXi& X) {
    const cplx ix(0.0, X.xi);
    const int N = S.grid.N;
    double worst = 0;
    // psi^n (i xi)^n vs complex psi
    for (int n = 1; n <= S.ell; ++n) {
        cplx pw = std::pow(ix, n);
        double num = 0, den = 0;
        for (int j = 0; j < N; ++j) {
            num += std::norm(S.psi[n][j] * pw - X.psi[n][j]);
            den += std::norm(X.psi[n][j]);
        }
        double rel = den > 1e-300 ? std::sqrt(num / den) : std::sqrt(num);
        worst = std::max(worst, rel);
    }
    // lambda^{n} = -b^{n-1} (i xi)^n
    for (int n = 2; n <= S.ell + 1; ++n) {
        cplx expect = -S.b[n - 1] * std::pow(ix, n);
        double scale = std::max(1e-14, std::abs(X.lambda[2]));
        worst = std::max(worst, std::abs(expect - X.lambda[n]) / scale);
    }
    // zeta^{n,m} (i xi)^{n+1} vs complex zeta
    for (int m = 0; m < static_cast<int>(S.zeta.size()); ++m) {
        for (int n = 0; n < static_cast<int>(S.zeta[m].size()); ++n) {
            cplx pw = std::pow(ix, n + 1);
            double num = 0, den = 0;
            for (int j = 0; j < N; ++j) {
                num += std::norm(S.zeta[m][n][j] * pw - X.zeta[m][n][j]);
                den += std::norm(X.zeta[m][n][j]);
            }
            double rel = den > 1e-300 ? std::sqrt(num / den) : std::sqrt(num);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

/// Smallest C with ||psi^n||_H1 + |b^n| <= C^n over 1 <= n <= ell.
inline double corrector_growth_constant(const SpectralCorrectors& S) {
    double log_c = -1e300;
    for (int n = 1; n <= S.ell; ++n) {
        double v = S.h1_norm(S.psi[n]) + std::abs(S.b[n]);
        log_c = std::max(log_c, std::log(std::max(v, 1e-300)) / n);
    }
    return std::exp(log_c);
}

} // namespace ltwave
