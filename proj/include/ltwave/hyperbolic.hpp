#pragma once

// Hyperbolic corrector hierarchy: the corrector fields phi^{n,m}, homogenized
// tensors abar^{n,m} and fluxes q^{n,m}, the flux correctors sigma^{n,m}, the
// symmetry check on the homogenized tensors, and the revamped coefficients
// b^p, c^p obtained by eliminating mixed space-time derivatives through the
// index-set combinatorics I_k / J_k.
//
// Families are built over the triangle n + m <= order so the (m-2)-coupling
// term phi^{n+1,m-2} in the flux is always available.

#include <cmath>
#include <string>
#include <vector>

#include "ltwave/coefficient.hpp"
#include "ltwave/elliptic.hpp"
#include "ltwave/errors.hpp"
#include "ltwave/grid.hpp"

namespace ltwave {

struct HyperbolicCorrectors {
    CellGrid grid{512};
    CoefficientField field;
    RealField a;
    int order = 0; // triangle bound: families built for n + m <= order
    bool dealias = true;

    // phi[n][m] (phi[0][0] = 1, phi[0][m] = 0 for m >= 1, zero for m odd)
    std::vector<std::vector<RealField>> phi;
    std::vector<std::vector<double>> abar; // abar[n][m], n >= 1
    std::vector<std::vector<RealField>> q; // q[n][m]
    // sigma_h[n][m] for m >= 1 (gradient-potential type); the m = 0 flux
    // correctors are skew-symmetric matrices and vanish identically at d=1.
    std::vector<std::vector<RealField>> sigma_h;

    SolveStats stats;

    bool in_triangle(int n, int m) const { return n >= 0 && m >= 0 && n + m <= order; }

    const RealField& phi_at(int n, int m) const {
        if (!in_triangle(n, m))
            throw MissingCorrector("phi(" + std::to_string(n) + "," + std::to_string(m) + ")");
        return phi[n][m];
    }

    double abar_at(int n, int m) const {
        if (n < 1 || !in_triangle(n, m))
            throw MissingCorrector("abar(" + std::to_string(n) + "," + std::to_string(m) + ")");
        return abar[n][m];
    }

    const RealField& sigma_at(int n, int m) const {
        if (m < 1 || !in_triangle(n, m))
            throw MissingCorrector("sigma_h(" + std::to_string(n) + "," + std::to_string(m) + ")");
        return sigma_h[n][m];
    }
};

/// Build phi^{n,m}, abar^{n,m}, q^{n,m} over the triangle n + m <= order:
///   -(a phi^{n,m}')' = (a phi^{n-1,m})' + q^{n-1,m},   E[phi^{n,m}] = 0,
///   abar^{n,m}       = E[a(phi^{n,m}' + phi^{n-1,m})],
///   q^{n,m}          = a(phi^{n,m}' + phi^{n-1,m}) - phi^{n+1,m-2} - abar^{n,m}.
/// Odd-m families vanish identically and are stored as exact zeros.
inline HyperbolicCorrectors build_phi_a(const CoefficientField& field, int order,
                                        const CellGrid& grid = CellGrid(512),
                                        bool dealias = true) {
    if (order < 1) throw std::invalid_argument("build_phi_a: order >= 1 required");
    HyperbolicCorrectors H;
    H.grid = grid;
    H.field = field;
    H.a = field.sample(grid);
    H.order = order;
    H.dealias = dealias;
    const int N = grid.N;

    H.phi.assign(order + 2, std::vector<RealField>(order + 2));
    H.abar.assign(order + 2, std::vector<double>(order + 2, 0.0));
    H.q.assign(order + 2, std::vector<RealField>(order + 2));

    auto phi_or_zero = [&](int n, int m) -> RealField {
        if (n < 0 || m < 0 || n + m > order) return RealField(N, 0.0);
        return H.phi[n][m];
    };

    for (int m = 0; m <= order; ++m) {
        // phi^{0,m}
        H.phi[0][m] = RealField(N, m == 0 ? 1.0 : 0.0);
        // q^{0,m} = a phi^{0,m}' - phi^{1,m-2}
        {
            RealField qv = product(H.a, grad(H.phi[0][m], grid), grid, dealias);
            RealField coup = phi_or_zero(1, m - 2);
            for (int j = 0; j < N; ++j) qv[j] -= coup[j];
            H.q[0][m] = qv;
        }
        if (m % 2 == 1) {
            // odd-m families are identically zero; the recursion below would
            // reproduce that, but we pin exact zeros
            for (int n = 1; n + m <= order; ++n) {
                H.phi[n][m] = RealField(N, 0.0);
                H.abar[n][m] = 0.0;
                H.q[n][m] = RealField(N, 0.0);
            }
            continue;
        }
        for (int n = 1; n + m <= order; ++n) {
            RealField apm = product(H.a, H.phi[n - 1][m], grid, dealias);
            RealField rhs = grad(apm, grid);
            for (int j = 0; j < N; ++j) rhs[j] += H.q[n - 1][m][j];
            H.phi[n][m] = solve_elliptic(H.a, rhs, grid, 0.0, &H.stats, dealias);

            RealField flux = product(H.a, grad(H.phi[n][m], grid), grid, dealias);
            RealField apf = product(H.a, H.phi[n - 1][m], grid, dealias);
            for (int j = 0; j < N; ++j) flux[j] += apf[j];
            H.abar[n][m] = cell_mean(flux);

            RealField qv = flux;
            RealField coup = phi_or_zero(n + 1, m - 2);
            for (int j = 0; j < N; ++j) qv[j] -= coup[j] + H.abar[n][m];
            H.q[n][m] = qv;
        }
    }
    return H;
}

/// Modified elliptic (m = 0) hierarchy of flux-corrector form; at d=1 the
/// skew-symmetric flux correctors vanish, so the modified flux is
///   qtilde^{n,0} = a(phi^{n,0}' + phi^{n-1,0}) - abar^{n,0},
/// which in one dimension is pointwise zero (constant-flux identity).
struct TildeElliptic {
    std::vector<RealField> phi;  // tilde phi^{n,0}
    std::vector<double> abar;    // tilde abar^{n,0}
    std::vector<RealField> qt;   // tilde q^{n,0}
};

inline TildeElliptic build_tilde_elliptic(const CoefficientField& field, int nmax,
                                          const CellGrid& grid, bool dealias = true,
                                          double div_tol = 1e-8) {
    TildeElliptic T;
    RealField a = field.sample(grid);
    const int N = grid.N;
    T.phi.assign(nmax + 1, RealField());
    T.abar.assign(nmax + 1, 0.0);
    T.qt.assign(nmax + 1, RealField());
    T.phi[0] = RealField(N, 1.0);
    T.qt[0] = product(a, grad(T.phi[0], grid), grid, dealias);
    SolveStats stats;
    for (int n = 1; n <= nmax; ++n) {
        RealField apm = product(a, T.phi[n - 1], grid, dealias);
        RealField rhs = grad(apm, grid);
        for (int j = 0; j < N; ++j) rhs[j] += T.qt[n - 1][j];
        T.phi[n] = solve_elliptic(a, rhs, grid, 0.0, &stats, dealias);
        RealField flux = product(a, grad(T.phi[n], grid), grid, dealias);
        RealField apf = product(a, T.phi[n - 1], grid, dealias);
        for (int j = 0; j < N; ++j) flux[j] += apf[j];
        T.abar[n] = cell_mean(flux);
        RealField qt = flux;
        for (auto& v : qt) v -= T.abar[n]; // minus sigma^{n-1,0}, zero at d=1
        // the modified flux must be divergence-free and mean-zero
        RealField dq = grad(qt, grid);
        if (l2_norm(dq) > div_tol * std::max(1.0, l2_norm(flux)))
            throw NonDivergenceFree("tilde flux q^{" + std::to_string(n) + ",0}");
        T.qt[n] = qt;
    }
    return T;
}

/// Flux correctors: m >= 1 gradient-potential branch sigma^{n,m} = Phi' with
/// -Phi'' = q^{n,m}; the m = 0 branch is the skew-symmetric construction,
/// identically zero at d=1 (verified through the divergence-free check).
inline void build_sigma_hyp(HyperbolicCorrectors& H) {
    const CellGrid& g = H.grid;
    const int N = g.N;
    H.sigma_h.assign(H.order + 2, std::vector<RealField>(H.order + 2));
    // m = 0: verify the 1D degeneration via the modified hierarchy
    build_tilde_elliptic(H.field, H.order, g, H.dealias);
    for (int n = 0; n <= H.order; ++n) H.sigma_h[n][0] = RealField(N, 0.0);
    for (int m = 1; m <= H.order; ++m) {
        for (int n = 0; n + m <= H.order; ++n) {
            if (m % 2 == 1) {
                H.sigma_h[n][m] = RealField(N, 0.0);
                continue;
            }
            RealField Phi = solve_poisson(H.q[n][m], g, 0.0, &H.stats);
            H.sigma_h[n][m] = grad(Phi, g);
        }
    }
}

struct SymmetryReport {
    double max_residual = 0.0; // relative to |abar^{1,0}|
    int worst_n = 0, worst_m = 0;
};

/// Symmetry of homogenized tensors: the index-reversed transpose relation,
/// which at d=1 degenerates to abar^{n,m} = (-1)^{n+1} abar^{n,m}; the
/// quadratic form must vanish for n even.
inline SymmetryReport check_symmetry(const HyperbolicCorrectors& H, int nmax, int mmax,
                                     double tol = 1e-9) {
    SymmetryReport rep;
    const double scale = std::abs(H.abar_at(1, 0));
    for (int n = 1; n <= nmax; ++n) {
        for (int m = 0; m <= mmax; ++m) {
            if (n + m > H.order) continue;
            double lhs = H.abar[n][m];
            double rhs = (n % 2 == 0 ? -1.0 : 1.0) * H.abar[n][m]; // (-1)^{n+1}, indices reversed
            double resid = std::abs(lhs - rhs) / scale;
            if (resid > rep.max_residual) {
                rep.max_residual = resid;
                rep.worst_n = n;
                rep.worst_m = m;
            }
        }
    }
    if (rep.max_residual > tol)
        throw SymmetryViolation("abar symmetry residual " + std::to_string(rep.max_residual) +
                                " at n=" + std::to_string(rep.worst_n) +
                                " m=" + std::to_string(rep.worst_m));
    return rep;
}

// ---------------------------------------------------------------------------
// Index sets and revamped coefficients
// ---------------------------------------------------------------------------

namespace detail {

inline void compositions_rec(int remaining, int slots, std::vector<int>& cur,
                             std::vector<std::vector<int>>& out) {
    if (slots == 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        cur.push_back(v);
        compositions_rec(remaining - v, slots - 1, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<int>> compositions(int total, int slots) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    if (slots >= 1 && total >= 0) compositions_rec(total, slots, cur, out);
    return out;
}

inline bool partial_sums_ok(const std::vector<int>& m, int k, bool strict_last) {
    int acc = 0;
    for (int s = 1; s <= k; ++s) {
        acc += m[s - 1];
        if (s < k || strict_last) {
            if (acc < 2 * s) return false;
        }
    }
    return true;
}

} // namespace detail

/// I_k = { m >= 0 : sum_{j<=s} m_j >= 2s for s < k, |m| = 2(k-1) }.
inline std::vector<std::vector<int>> enumerate_I(int k) {
    std::vector<std::vector<int>> out;
    for (auto& m : detail::compositions(2 * (k - 1), k))
        if (detail::partial_sums_ok(m, k, false)) out.push_back(m);
    return out;
}

/// J_k with every slot capped by `cap`: sum_{j<=s} m_j >= 2s for all s <= k.
/// Odd slots are omitted: they multiply abar^{n,m} with odd m, which vanish.
inline std::vector<std::vector<int>> enumerate_J(int k, int cap) {
    std::vector<std::vector<int>> out;
    std::vector<std::vector<int>> all;
    for (int total = 2 * k; total <= cap * k; ++total)
        for (auto& m : detail::compositions(total, k)) {
            bool capped = true, even = true;
            for (int v : m) {
                if (v > cap) capped = false;
                if (v % 2 != 0) even = false;
            }
            if (capped && even && detail::partial_sums_ok(m, k, true)) all.push_back(m);
        }
    return all;
}

/// Revamped coefficients b^p (quadratic-form values at d=1):
///   b^p = sum_k sum_{m in I_k} sum_{|n| = p+1-k, n_j >= 1} prod_j abar^{n_j, m_j}.
inline std::vector<double> revamp_b(const HyperbolicCorrectors& H, int pmax) {
    std::vector<double> b(pmax + 1, 0.0);
    for (int p = 1; p <= pmax; ++p) {
        double acc = 0.0;
        for (int k = 1; 2 * k <= p + 1; ++k) {
            auto I = enumerate_I(k);
            const int ntot = p + 1 - k;
            for (auto& m : I) {
                for (auto& nshift : detail::compositions(ntot - k, k)) {
                    double prod = 1.0;
                    bool ok = true;
                    for (int j = 0; j < k; ++j) {
                        int nj = nshift[j] + 1;
                        if (!H.in_triangle(nj, m[j])) {
                            ok = false;
                            break;
                        }
                        prod *= H.abar[nj][m[j]];
                    }
                    if (!ok)
                        throw MissingCorrector("revamp_b: abar out of built range at p=" +
                                               std::to_string(p));
                    acc += prod;
                }
            }
        }
        b[p] = acc;
    }
    return b;
}

/// Revamped source coefficients c^p as polynomials in the time frequency:
/// c[p][r] multiplies xi_0^r xi^{p+1-r} in xi.(c^p (.) xihat^{p-1}) xi.
inline std::vector<std::vector<double>> revamp_c(const HyperbolicCorrectors& H, int pmax) {
    std::vector<std::vector<double>> c(pmax + 1);
    for (int p = 1; p <= pmax; ++p) {
        c[p].assign(p + 2, 0.0);
        for (int k = 1; 2 * k <= p + 1; ++k) {
            for (int M = 2 * k; M <= p + 1; ++M) { // |m| = M, |n| = p+k+1-M >= k
                const int ntot = p + k + 1 - M;
                if (ntot < k) continue;
                for (auto& m : detail::compositions(M, k)) {
                    bool even = true;
                    for (int v : m)
                        if (v % 2 != 0) even = false;
                    if (!even || !detail::partial_sums_ok(m, k, true)) continue;
                    const int r = M - 2 * k;
                    if (r > p + 1) continue;
                    for (auto& nshift : detail::compositions(ntot - k, k)) {
                        double prod = 1.0;
                        bool ok = true;
                        for (int j = 0; j < k; ++j) {
                            int nj = nshift[j] + 1;
                            if (!H.in_triangle(nj, m[j])) {
                                ok = false;
                                break;
                            }
                            prod *= H.abar[nj][m[j]];
                        }
                        if (!ok)
                            throw MissingCorrector("revamp_c: abar out of built range at p=" +
                                                   std::to_string(p));
                        c[p][r] += prod;
                    }
                }
            }
        }
    }
    return c;
}

struct CrosscheckReport {
    double max_rel_diff = 0.0;
    int worst_p = 0;
    std::vector<double> per_p;
};

/// Per-order relative difference between spectral and revamped b^p.
inline CrosscheckReport crosscheck_b(const std::vector<double>& spectral_b,
                                     const std::vector<double>& revamped_b, int pmax) {
    CrosscheckReport rep;
    rep.per_p.assign(pmax + 1, 0.0);
    const double scale = std::abs(spectral_b.at(1));
    for (int p = 1; p <= pmax; ++p) {
        double sp = spectral_b.at(p), rv = revamped_b.at(p);
        double denom = std::max(std::abs(sp), std::abs(rv));
        double rel;
        if (denom < 1e-12 * scale)
            rel = 0.0; // both vanish (even p)
        else
            rel = std::abs(sp - rv) / denom;
        rep.per_p[p] = rel;
        if (rel > rep.max_rel_diff) {
            rep.max_rel_diff = rel;
            rep.worst_p = p;
        }
    }
    return rep;
}

} // namespace ltwave
