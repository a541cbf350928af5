#pragma once

// Periodic line domain (-L, L) hosting the fine-scale problem. The microscale
// eps = 1/K makes a(./eps) exactly periodic on the domain; commensurability
// ties the fine grid to the unit-cell grid so corrector sampling lands on
// exact cell nodes.

#include <cmath>
#include <string>

#include "ltwave/errors.hpp"
#include "ltwave/grid.hpp"

namespace ltwave {

struct LineDomain {
    int L = 8;              // half length (integer)
    int K = 16;             // 1/eps
    int points_per_cell = 32;

    int M() const { return 2 * L * K * points_per_cell; }
    double eps() const { return 1.0 / K; }
    double dx() const { return 2.0 * static_cast<double>(L) / M(); }
    double node(int i) const { return -static_cast<double>(L) + i * dx(); }

    void validate() const {
        if (L < 1 || K < 1) throw NonCommensurate("LineDomain: L, K >= 1 required");
        if (points_per_cell < 32)
            throw NonCommensurate("LineDomain: points_per_cell >= 32 required");
        if (M() != 2 * L * K * points_per_cell)
            throw NonCommensurate("LineDomain: M = 2 L K ppc violated");
    }

    /// Cell-grid node index of x_i / eps mod 1 (exact when ppc divides N).
    int cell_index(int i, const CellGrid& cell) const {
        if (cell.N % points_per_cell != 0)
            throw NonCommensurate("LineDomain: cell N not a multiple of points_per_cell");
        const int stride = cell.N / points_per_cell;
        int r = i % points_per_cell;
        if (r < 0) r += points_per_cell;
        return (r * stride + cell.N / 2) % cell.N;
    }

    /// Guard against wrap-around: waves from supp f2 = (-L_f, L_f) must not
    /// cross the periodic seam before time T at speed c_max.
    bool wrap_safe(double L_f, double T, double c_max, double margin = 1.0) const {
        return static_cast<double>(L) >= L_f + c_max * T + margin;
    }
};

} // namespace ltwave
