#pragma once

// Floquet-Bloch machinery: Galerkin assembly of the fibered operators
// L_xi = -(d/dx + i xi) a (d/dx + i xi) over the trigonometric basis, dense
// Hermitian eigensolves, the Taylor expansion test of the ground eigenvalue
// against the spectral coefficients, and the Duhamel-by-Bloch reference
// solution of the heterogeneous wave equation.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "ltwave/coefficient.hpp"
#include "ltwave/grid.hpp"
#include "ltwave/impulse.hpp"
#include "ltwave/spectral.hpp"
#include "ltwave/two_scale.hpp"
#include "ltwave/util.hpp"

namespace ltwave {

struct FiberedOperator {
    double xi = 0.0;
    int K = 32; // modes |k| <= K, dimension 2K+1
    Eigen::MatrixXcd matrix;

    int dim() const { return 2 * K + 1; }

    double hermiticity_residual() const {
        return (matrix - matrix.adjoint()).norm() / std::max(1.0, matrix.norm());
    }
};

/// Galerkin matrix M_{kl} = (2 pi k + xi)(2 pi l + xi) a_hat(k - l); the
/// coefficient Fourier modes come from the cell samples (offset-corrected).
inline FiberedOperator assemble(const RealField& a, const CellGrid& g, double xi, int K) {
    FiberedOperator op;
    op.xi = xi;
    op.K = K;
    const int dim = 2 * K + 1;
    op.matrix.resize(dim, dim);
    ComplexField ah = fft(ComplexField(a.begin(), a.end()));
    auto a_hat = [&](int m) -> cplx {
        int idx = m >= 0 ? m : g.N + m;
        double sign = (m % 2 == 0) ? 1.0 : -1.0; // nodes start at x = -1/2
        return sign * ah[idx] / static_cast<double>(g.N);
    };
    for (int k = -K; k <= K; ++k) {
        for (int l = -K; l <= K; ++l) {
            op.matrix(k + K, l + K) = (two_pi * k + xi) * (two_pi * l + xi) * a_hat(k - l);
        }
    }
    return op;
}

inline FiberedOperator assemble(const CoefficientField& field, const CellGrid& g, double xi,
                                int K) {
    return assemble(field.sample(g), g, xi, K);
}

struct BlochMode {
    double lambda = 0.0;
    Eigen::VectorXcd coeffs; // trigonometric coefficients, unit L^2(Q) norm
    cplx mean = 0.0;         // E[w] = zeroth coefficient

    /// Samples on the cell grid.
    ComplexField on_cell(const CellGrid& g, int K) const {
        ComplexField w(g.N, cplx(0));
        for (int k = -K; k <= K; ++k) {
            cplx ck = coeffs(k + K);
            if (ck == cplx(0)) continue;
            for (int j = 0; j < g.N; ++j)
                w[j] += ck * std::exp(cplx(0, two_pi * k * g.node(j)));
        }
        return w;
    }
};

struct BlochEigensystem {
    double xi = 0.0;
    int K = 32;
    std::vector<BlochMode> modes; // ascending eigenvalues
    double gap() const { return modes.size() > 1 ? modes[1].lambda - modes[0].lambda : 0.0; }
};

/// Lowest `count` eigenpairs of L_xi by a dense Hermitian solve.
inline BlochEigensystem eigensystem(const FiberedOperator& op, int count) {
    BlochEigensystem sys;
    sys.xi = op.xi;
    sys.K = op.K;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix);
    const int dim = op.dim();
    count = std::min(count, dim);
    sys.modes.resize(count);
    for (int m = 0; m < count; ++m) {
        sys.modes[m].lambda = es.eigenvalues()(m);
        sys.modes[m].coeffs = es.eigenvectors().col(m);
        sys.modes[m].mean = sys.modes[m].coeffs(op.K); // k = 0 entry
    }
    return sys;
}

/// Ground eigenpair with a spectral-gap guard.
inline BlochMode ground_state(const RealField& a, const CellGrid& g, double xi, int K,
                              double gap_threshold = 1e-6) {
    FiberedOperator op = assemble(a, g, xi, K);
    BlochEigensystem sys = eigensystem(op, 2);
    if (sys.modes.size() > 1 && sys.gap() < gap_threshold)
        throw DegenerateGroundState("ground_state: gap " + std::to_string(sys.gap()) + " at xi " +
                                    std::to_string(xi));
    BlochMode mode = sys.modes[0];
    // fix the phase so that E[w] is real positive (eigenvectors have a free phase)
    if (std::abs(mode.mean) > 0) {
        cplx ph = std::conj(mode.mean) / std::abs(mode.mean);
        mode.coeffs *= ph;
        mode.mean *= ph;
    }
    return mode;
}

/// Rayleigh-quotient refinement of the ground eigenvalue in extended
/// precision; removes the O(eps ||A||) error of the dense double solver,
/// which would otherwise drown the high-order Taylor residuals.
inline long double refine_ground_lambda(const FiberedOperator& op, const Eigen::VectorXcd& v0) {
    using LC = std::complex<long double>;
    using MatL = Eigen::Matrix<LC, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<LC, Eigen::Dynamic, 1>;
    const int n = op.dim();
    MatL A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A(i, j) = LC(op.matrix(i, j).real(), op.matrix(i, j).imag());
    VecL x(n);
    for (int i = 0; i < n; ++i) x(i) = LC(v0(i).real(), v0(i).imag());
    x /= std::sqrt((long double)std::real((x.adjoint() * x)(0, 0)));
    long double lambda = std::real((x.adjoint() * A * x)(0, 0));
    for (int it = 0; it < 3; ++it) {
        MatL shifted = A;
        for (int i = 0; i < n; ++i) shifted(i, i) -= LC(lambda, 0.0L);
        Eigen::PartialPivLU<MatL> lu(shifted);
        VecL y = lu.solve(x);
        long double ny = std::sqrt((long double)std::real((y.adjoint() * y)(0, 0)));
        if (!(ny > 0) || !std::isfinite((double)ny)) break; // exactly converged shift
        x = y / ny;
        lambda = std::real((x.adjoint() * A * x)(0, 0));
    }
    return lambda;
}

struct TaylorResidualReport {
    std::vector<double> xis;
    std::vector<double> residuals;
    double floor = 0.0;
    SlopeFit fit;
};

/// r(xi) = |lambda_xi - sum_{n<=order} lambda^n_xi| over a log-spaced xi
/// ladder. The numerical floor is measured at a tiny probe xi where the true
/// residual is far below round-off; fit points within 10x of it are dropped.
inline TaylorResidualReport taylor_residual(const SpectralCorrectors& S, int order, int K = 32,
                                            double xi_lo = 1e-3, double xi_hi = 1e-1,
                                            int samples = 25) {
    TaylorResidualReport rep;
    auto residual_at = [&](double xi, int ord) {
        FiberedOperator op = assemble(S.a, S.grid, xi, K);
        BlochEigensystem sys = eigensystem(op, 1);
        long double lam = refine_ground_lambda(op, sys.modes[0].coeffs);
        long double taylor = 0.0L;
        for (int n = 2; n <= ord; n += 2) {
            long double sign = (n / 2) % 2 == 0 ? 1.0L : -1.0L;
            taylor += -sign * (long double)S.b[n - 1] * std::pow((long double)xi, n);
        }
        return (double)std::abs(lam - taylor);
    };
    // probe: residual of the longest available expansion at a small xi is
    // pure numerical noise
    rep.floor = std::max(residual_at(2e-3, S.ell - (S.ell % 2)), 1e-18);
    const double ratio = std::pow(xi_hi / xi_lo, 1.0 / (samples - 1));
    double xi = xi_lo;
    for (int i = 0; i < samples; ++i, xi *= ratio) {
        rep.xis.push_back(xi);
        rep.residuals.push_back(residual_at(xi, order));
    }
    rep.fit = fit_loglog(rep.xis, rep.residuals, rep.floor);
    return rep;
}

struct BlochDuhamelResult {
    TwoScaleField field;
    double tail_estimate = 0.0; // crude bound on the truncated-mode content
};

/// Duhamel-by-Bloch reference solution of the heterogeneous wave equation at
/// time t for a band-limited separable impulse: per macroscopic mode xi_j,
/// expand the constant function over the lowest eigenmodes of L_{eps xi_j}
/// and integrate each against the impulse profile.
///
/// Time integrals use oscillatory Gauss quadrature on supp f1; past the
/// support they collapse to two frozen Fourier coefficients of f1 per mode.
inline BlochDuhamelResult bloch_duhamel(const RealField& a, const CellGrid& g, double eps,
                                        const Impulse& f, double t, int M_modes = 12, int K = 32,
                                        int threads = 0) {
    BlochDuhamelResult out;
    out.field.L = f.L;
    out.field.eps = eps;
    out.field.t = t;
    out.field.cell = g;
    out.field.modes.resize(f.mode_count());

    const double t_lo = f.f1.t0;
    const double t_hi = std::min(t, f.f1.t1());
    std::vector<double> tails(f.mode_count(), 0.0);

    parallel_for(0, f.mode_count(), [&](int idx) {
        const double xi = f.xi(idx);
        FiberedOperator op = assemble(a, g, eps * xi, K);
        BlochEigensystem sys = eigensystem(op, M_modes);

        TwoScaleMode mode;
        mode.j = f.js[idx];
        mode.xi = xi;
        mode.W.assign(g.N, cplx(0));
        mode.Wt.assign(g.N, cplx(0));

        double tail = 0.0;
        for (int m = 0; m < static_cast<int>(sys.modes.size()); ++m) {
            const BlochMode& bm = sys.modes[m];
            const cplx comp = std::conj(bm.mean); // <w_m, 1>
            if (std::abs(comp) < 1e-16 && m > 0) continue;
            const double nu = std::max(bm.lambda, 0.0);
            const double omega = std::sqrt(nu) / eps;

            // T(t) = int f1(s) sin(omega (t-s))/omega ds and its t-derivative
            double T = 0, Tt = 0;
            if (t_hi > t_lo) {
                if (omega < 1e-9) {
                    T = gauss_panels([&](double s) { return (t - s) * f.f1.value(s); }, t_lo, t_hi,
                                     32);
                    Tt = gauss_panels([&](double s) { return f.f1.value(s); }, t_lo, t_hi, 32);
                } else {
                    auto cosint = [&](double w) {
                        return adaptive_gauss(
                            [&](double s) { return std::cos(w * s) * f.f1.value(s); }, t_lo, t_hi,
                            w, 1e-13);
                    };
                    auto sinint = [&](double w) {
                        return adaptive_gauss(
                            [&](double s) { return std::sin(w * s) * f.f1.value(s); }, t_lo, t_hi,
                            w, 1e-13);
                    };
                    const double Cc = cosint(omega), Cs = sinint(omega);
                    T = (std::sin(omega * t) * Cc - std::cos(omega * t) * Cs) / omega;
                    Tt = std::cos(omega * t) * Cc + std::sin(omega * t) * Cs;
                }
            }

            ComplexField w = bm.on_cell(g, K);
            const cplx amp = comp * f.c[idx];
            for (int jj = 0; jj < g.N; ++jj) {
                mode.W[jj] += amp * T * w[jj];
                mode.Wt[jj] += amp * Tt * w[jj];
            }
            if (m == static_cast<int>(sys.modes.size()) - 1 && m >= 1) {
                // tail proxy: last included component scaled by the eigenvalue gap decay
                tail = std::abs(comp) * std::abs(f.c[idx]) *
                       (std::abs(T) + std::abs(Tt) / std::max(omega, 1.0));
            }
        }
        out.field.modes[idx] = std::move(mode);
        tails[idx] = tail;
    }, threads);

    for (double v : tails) out.tail_estimate += v * v;
    out.tail_estimate = std::sqrt(out.tail_estimate * 4.0 * f.L);
    return out;
}

} // namespace ltwave
