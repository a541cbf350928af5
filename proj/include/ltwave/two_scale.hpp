#pragma once

// Two-scale representation of fields on the line domain: a band of macroscopic
// Fourier modes xi_j = pi j / L (j > 0, conjugate mirror implied), each
// carrying a periodic cell profile W_j(x/eps) and its time derivative. Both
// the Floquet reference solution and the two-scale expansions live in this
// form, so L^2 and energy norms reduce to per-mode cell averages (the cross
// terms vanish because |xi_j| stays far below the microscale band).

#include <cmath>
#include <complex>
#include <vector>

#include "ltwave/domain.hpp"
#include "ltwave/errors.hpp"
#include "ltwave/grid.hpp"

namespace ltwave {

struct TwoScaleMode {
    int j = 0;       // positive mode number, xi = pi j / L
    double xi = 0.0;
    ComplexField W;  // cell profile
    ComplexField Wt; // time derivative of the profile
};

struct TwoScaleField {
    double L = 8.0;
    double eps = 1.0 / 16.0;
    double t = 0.0;
    CellGrid cell{512};
    std::vector<TwoScaleMode> modes;

    /// || u ||_{L^2(-L,L)} = sqrt(4 L sum_j E[|W_j|^2])
    double l2_norm() const {
        double s = 0;
        for (const auto& m : modes) {
            double acc = 0;
            for (const cplx& v : m.W) acc += std::norm(v);
            s += acc / m.W.size();
        }
        return std::sqrt(4.0 * L * s);
    }

    /// || D u ||_{L^2} with D = (dt, dx); dx acts per mode as i xi + (1/eps) d/dy.
    double energy_norm() const {
        double s = 0;
        for (const auto& m : modes) {
            ComplexField dW = grad(m.W, cell);
            double acc = 0;
            for (size_t k = 0; k < m.W.size(); ++k) {
                cplx dxu = cplx(0, m.xi) * m.W[k] + dW[k] / eps;
                acc += std::norm(m.Wt[k]) + std::norm(dxu);
            }
            s += acc / m.W.size();
        }
        return std::sqrt(4.0 * L * s);
    }

    /// Difference on a shared mode set (mode-by-mode, same j order).
    TwoScaleField& operator-=(const TwoScaleField& o) {
        if (modes.size() != o.modes.size()) throw GridMismatch("TwoScaleField: mode sets differ");
        for (size_t i = 0; i < modes.size(); ++i) {
            if (modes[i].j != o.modes[i].j) throw GridMismatch("TwoScaleField: mode order differs");
            for (size_t k = 0; k < modes[i].W.size(); ++k) {
                modes[i].W[k] -= o.modes[i].W[k];
                modes[i].Wt[k] -= o.modes[i].Wt[k];
            }
        }
        return *this;
    }

    /// Real-space samples on the fine grid of `dom` (u and its time derivative).
    void evaluate(const LineDomain& dom, RealField& u, RealField& ut) const {
        const int M = dom.M();
        u.assign(M, 0.0);
        ut.assign(M, 0.0);
        for (const auto& m : modes) {
            for (int i = 0; i < M; ++i) {
                const int ci = dom.cell_index(i, cell);
                cplx ph = std::exp(cplx(0, m.xi * dom.node(i)));
                u[i] += 2.0 * (ph * m.W[ci]).real();
                ut[i] += 2.0 * (ph * m.Wt[ci]).real();
            }
        }
    }
};

struct ErrorNorms {
    double l2 = 0.0;
    double energy = 0.0;
};

/// Norms of the difference of two two-scale fields on a shared mode set.
inline ErrorNorms error_norms(const TwoScaleField& a, const TwoScaleField& b) {
    TwoScaleField d = a;
    d -= b;
    return {d.l2_norm(), d.energy_norm()};
}

} // namespace ltwave
