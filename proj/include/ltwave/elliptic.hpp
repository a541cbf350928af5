#pragma once

// Periodic elliptic solvers on the cell: preconditioned conjugate gradients in
// Fourier variables for -(a u')' = rhs, exact Fourier division for the
// Laplacian, and the 1D two-quadrature closed form kept as an independent
// oracle path.

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "ltwave/coefficient.hpp"
#include "ltwave/errors.hpp"
#include "ltwave/grid.hpp"

namespace ltwave {

inline constexpr double tol_fredholm = 1e-9;
inline constexpr double tol_solver = 1e-13;
inline constexpr double tol_residual = 1e-11;
// below this absolute norm an assembled rhs is round-off noise and the
// Fredholm ratio test is meaningless (fields in this library are O(1)-scaled)
inline constexpr double tol_assembly_noise = 1e-12;
// absolute residual floor: right-hand sides assembled from O(1)-magnitude
// ingredients carry ~1e-14 absolute noise that no solve can remove
inline constexpr double tol_residual_abs = 1e-13;

/// Running record of compatibility means and solver effort across a build.
struct SolveStats {
    double max_compat_ratio = 0.0; // max |mean(rhs)| / ||rhs|| seen
    int max_iterations = 0;
    int solves = 0;

    void note_compat(double ratio) {
        if (ratio > max_compat_ratio) max_compat_ratio = ratio;
    }
    void note_iters(int it) {
        ++solves;
        if (it > max_iterations) max_iterations = it;
    }
};

namespace detail {

// -d/dx ( P(a du/dx) ); symmetric positive semidefinite on mean-zero fields.
inline RealField apply_elliptic(const RealField& a, const RealField& u, const CellGrid& g,
                                bool dealias) {
    RealField du = grad(u, g);
    RealField flux = product(a, du, g, dealias);
    RealField out = grad(flux, g);
    for (auto& v : out) v = -v;
    return out;
}

inline RealField precondition_inv_laplacian(const RealField& r, const CellGrid& g) {
    ComplexField hat = fft(ComplexField(r.begin(), r.end()));
    hat[0] = 0;
    hat[g.N / 2] = 0; // Nyquist lies in the kernel of the discrete derivative
    for (int j = 1; j < g.N; ++j) {
        if (j == g.N / 2) continue;
        double k = two_pi * g.freq(j);
        hat[j] /= k * k;
    }
    ComplexField z = ifft(hat);
    RealField out(g.N);
    for (int j = 0; j < g.N; ++j) out[j] = z[j].real();
    return out;
}

// Remove the mean and Nyquist bins, the kernel directions of the discrete
// operator; returns the removed mean.
inline double project_solvable(RealField& b, const CellGrid& g) {
    ComplexField hat = fft(ComplexField(b.begin(), b.end()));
    const double mean = hat[0].real() / g.N;
    hat[0] = 0;
    hat[g.N / 2] = 0;
    ComplexField z = ifft(hat);
    for (int j = 0; j < g.N; ++j) b[j] = z[j].real();
    return mean;
}

inline double dot(const RealField& x, const RealField& y) {
    double s = 0;
    for (size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
    return s / static_cast<double>(x.size());
}

} // namespace detail

/// Solve -(a u')' = rhs on the cell with cell_mean(u) = mean_target.
/// Preconditioned CG on the mean-zero subspace. Throws IncompatibleRHS when
/// the rhs mean exceeds tol_fredholm relative to its norm, NoConvergence if
/// CG stalls. `rhs_scale` names the magnitude of the ingredients the rhs was
/// assembled from when that exceeds ||rhs|| (a part of a complex system, a
/// difference of large terms); noise gates and the residual contract are
/// measured against it.
inline RealField solve_elliptic(const RealField& a, const RealField& rhs, const CellGrid& g,
                                double mean_target = 0.0, SolveStats* stats = nullptr,
                                bool dealias = true, double rhs_scale = 0.0) {
    const double rhs_norm = l2_norm(rhs);
    if (rhs_norm <= std::max(tol_assembly_noise, 1e-13 * rhs_scale))
        return RealField(g.N, mean_target);
    const double mean_ratio = std::abs(cell_mean(rhs)) / rhs_norm;
    if (stats) stats->note_compat(mean_ratio);
    if (mean_ratio > tol_fredholm)
        throw IncompatibleRHS("solve_elliptic: rhs mean ratio " + std::to_string(mean_ratio));

    RealField b = rhs;
    detail::project_solvable(b, g);

    auto cg_solve = [&](const RealField& rhs_vec, double target) {
        RealField x(g.N, 0.0), r = rhs_vec;
        RealField z = detail::precondition_inv_laplacian(r, g);
        RealField p = z;
        double rz = detail::dot(r, z);
        const int maxit = 4 * g.N;
        int it = 0;
        for (; it < maxit; ++it) {
            RealField Ap = detail::apply_elliptic(a, p, g, dealias);
            double pAp = detail::dot(p, Ap);
            if (pAp <= 0) throw NoConvergence("solve_elliptic: lost positivity in CG");
            double alpha = rz / pAp;
            for (int j = 0; j < g.N; ++j) {
                x[j] += alpha * p[j];
                r[j] -= alpha * Ap[j];
            }
            if (l2_norm(r) <= target) break;
            z = detail::precondition_inv_laplacian(r, g);
            double rz_new = detail::dot(r, z);
            double beta = rz_new / rz;
            rz = rz_new;
            for (int j = 0; j < g.N; ++j) p[j] = z[j] + beta * p[j];
        }
        if (stats) stats->note_iters(it + 1);
        if (it == maxit) throw NoConvergence("solve_elliptic: CG did not converge");
        return x;
    };

    RealField x = cg_solve(b, tol_solver * rhs_norm);

    // refinement passes absorb the drift between the CG recurrence residual
    // and the true applied-operator residual, down to the application floor
    RealField Ax = detail::apply_elliptic(a, x, g, dealias);
    auto true_res = [&]() {
        double s = 0;
        for (int j = 0; j < g.N; ++j) {
            double d = Ax[j] - b[j];
            s += d * d;
        }
        return std::sqrt(s / g.N);
    };
    double res = true_res();
    RealField best_x = x;
    double best_res = res;
    for (int pass = 0; pass < 3 && res > 0.25 * tol_residual * rhs_norm; ++pass) {
        RealField r_true(g.N);
        for (int j = 0; j < g.N; ++j) r_true[j] = b[j] - Ax[j];
        detail::project_solvable(r_true, g);
        RealField dx = cg_solve(r_true, std::min(tol_solver * rhs_norm, 0.05 * res));
        for (int j = 0; j < g.N; ++j) x[j] += dx[j];
        Ax = detail::apply_elliptic(a, x, g, dealias);
        res = true_res();
        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
    }
    x = best_x;
    res = best_res;

    const double xm = cell_mean(x);
    for (auto& v : x) v += mean_target - xm;

    // the plug-back certificate saturates at the double-precision floor
    // eps * ||A|| * ||x||: applying the operator amplifies the solution's own
    // representation rounding by sup|a| k_max^2. The contract is enforced up
    // to that explicitly estimated measurement floor.
    double amax = 0;
    for (double v : a) amax = std::max(amax, std::abs(v));
    const double meas_floor = std::numeric_limits<double>::epsilon() * amax *
                              std::pow(M_PI * g.N, 2) * l2_norm(x);
    const double scale = std::max(rhs_norm, rhs_scale);
    if (res > std::max({tol_residual * scale, 4.0 * meas_floor, tol_residual_abs})) {
        char msg[64];
        std::snprintf(msg, sizeof(msg), "%.3e", res / rhs_norm);
        throw NoConvergence(std::string("solve_elliptic: residual ") + msg);
    }
    return x;
}

inline ComplexField solve_elliptic(const RealField& a, const ComplexField& rhs, const CellGrid& g,
                                   cplx mean_target = 0.0, SolveStats* stats = nullptr,
                                   bool dealias = true) {
    RealField re(g.N), im(g.N);
    for (int j = 0; j < g.N; ++j) {
        re[j] = rhs[j].real();
        im[j] = rhs[j].imag();
    }
    const double rhs_norm = l2_norm(rhs);
    if (rhs_norm > tol_assembly_noise) {
        const double mean_ratio = std::abs(cell_mean(rhs)) / rhs_norm;
        if (stats) stats->note_compat(mean_ratio);
        if (mean_ratio > tol_fredholm)
            throw IncompatibleRHS("solve_elliptic(complex): rhs mean ratio " +
                                  std::to_string(mean_ratio));
        double mr = cell_mean(re), mi = cell_mean(im);
        for (int j = 0; j < g.N; ++j) {
            re[j] -= mr;
            im[j] -= mi;
        }
    }
    // complex arithmetic couples the parts: the noise floor of the small
    // part is set by the joint magnitude
    RealField xr = solve_elliptic(a, re, g, 0.0, stats, dealias, rhs_norm);
    RealField xi = solve_elliptic(a, im, g, 0.0, stats, dealias, rhs_norm);
    ComplexField x(g.N);
    for (int j = 0; j < g.N; ++j) x[j] = cplx(xr[j], xi[j]) + mean_target;
    return x;
}

/// Solve -u'' = rhs exactly by Fourier division, cell_mean(u) = mean_target.
inline RealField solve_poisson(const RealField& rhs, const CellGrid& g, double mean_target = 0.0,
                               SolveStats* stats = nullptr) {
    const double rhs_norm = l2_norm(rhs);
    if (rhs_norm > tol_assembly_noise) {
        const double mean_ratio = std::abs(cell_mean(rhs)) / rhs_norm;
        if (stats) stats->note_compat(mean_ratio);
        if (mean_ratio > tol_fredholm)
            throw IncompatibleRHS("solve_poisson: rhs mean ratio " + std::to_string(mean_ratio));
    }
    ComplexField hat = fft(ComplexField(rhs.begin(), rhs.end()));
    hat[0] = 0;
    for (int j = 1; j < g.N; ++j) {
        double k = two_pi * g.freq(j);
        if (j == g.N / 2) k = two_pi * (g.N / 2);
        hat[j] /= k * k;
    }
    ComplexField u = ifft(hat);
    RealField out(g.N);
    for (int j = 0; j < g.N; ++j) out[j] = u[j].real() + mean_target;
    if (stats) stats->note_iters(1);
    return out;
}

inline ComplexField solve_poisson(const ComplexField& rhs, const CellGrid& g,
                                  cplx mean_target = 0.0, SolveStats* stats = nullptr) {
    const double rhs_norm = l2_norm(rhs);
    if (rhs_norm > tol_assembly_noise) {
        const double mean_ratio = std::abs(cell_mean(rhs)) / rhs_norm;
        if (stats) stats->note_compat(mean_ratio);
        if (mean_ratio > tol_fredholm)
            throw IncompatibleRHS("solve_poisson: rhs mean ratio " + std::to_string(mean_ratio));
    }
    ComplexField hat = fft(rhs);
    hat[0] = 0;
    for (int j = 1; j < g.N; ++j) {
        double k = two_pi * g.freq(j);
        if (j == g.N / 2) k = two_pi * (g.N / 2);
        hat[j] /= k * k;
    }
    ComplexField u = ifft(hat);
    for (auto& v : u) v += mean_target;
    if (stats) stats->note_iters(1);
    return u;
}

/// Independent 1D oracle: -(a u')' = rhs via two quadratures,
/// u' = (c - F)/a with F an antiderivative of rhs and c fixing periodicity.
inline RealField solve_elliptic_quadrature(const RealField& a, const RealField& rhs,
                                           const CellGrid& g, double mean_target = 0.0) {
    RealField r = rhs;
    const double m = cell_mean(r);
    for (auto& v : r) v -= m;
    RealField F = antiderivative(r, g);
    RealField inv_a(g.N), F_over_a(g.N);
    for (int j = 0; j < g.N; ++j) {
        inv_a[j] = 1.0 / a[j];
        F_over_a[j] = F[j] / a[j];
    }
    const double c = cell_mean(F_over_a) / cell_mean(inv_a);
    RealField du(g.N);
    for (int j = 0; j < g.N; ++j) du[j] = (c - F[j]) / a[j];
    const double dm = cell_mean(du);
    for (auto& v : du) v -= dm; // exactly zero in the continuum; round-off here
    RealField u = antiderivative(du, g);
    const double um = cell_mean(u);
    for (auto& v : u) v += mean_target - um;
    return u;
}

} // namespace ltwave
