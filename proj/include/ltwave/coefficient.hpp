#pragma once

// Periodic coefficient fields on the unit cell. The data model carries the
// dimension, but the solvers and acceptance scope are one-dimensional, so the
// evaluator maps a cell point to a scalar.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltwave/grid.hpp"

namespace ltwave {

struct CoefficientField {
    int dim = 1;
    std::string name;
    std::vector<double> params;
    std::function<double(double)> eval;
    double lambda = 1.0;   // ellipticity lower bound: xi.a xi >= lambda |xi|^2
    double upper = 1.0;    // |a xi| <= upper |xi|

    RealField sample(const CellGrid& g) const {
        RealField a(g.N);
        for (int j = 0; j < g.N; ++j) a[j] = eval(g.node(j));
        return a;
    }

    bool is_constant_one() const { return name == "constant" && params.size() == 1 && params[0] == 1.0; }

    /// Checks symmetry (trivial at d=1) and the two-sided bounds against
    /// random test vectors at all grid nodes.
    void validate(const CellGrid& g, unsigned seed = 12345) const {
        if (dim != 1) throw std::invalid_argument("CoefficientField: only d=1 is supported");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        RealField a = sample(g);
        for (int j = 0; j < g.N; ++j) {
            for (int trial = 0; trial < 4; ++trial) {
                double xi = unif(rng);
                if (a[j] * xi * xi < lambda * xi * xi - 1e-12)
                    throw std::invalid_argument("CoefficientField: ellipticity bound violated");
                if (std::abs(a[j] * xi) > upper * std::abs(xi) + 1e-12)
                    throw std::invalid_argument("CoefficientField: upper bound violated");
            }
        }
    }
};

inline CoefficientField make_constant_field(double c = 1.0) {
    CoefficientField f;
    f.name = "constant";
    f.params = {c};
    f.eval = [c](double) { return c; };
    f.lambda = c;
    f.upper = c;
    return f;
}

/// a(x) = c + A sin(2 pi x); the workhorse test field is c=2, A=1 with
/// harmonic mean sqrt(c^2 - A^2) = sqrt(3).
inline CoefficientField make_two_plus_sin_field(double c = 2.0, double amp = 1.0) {
    CoefficientField f;
    f.name = "two_plus_sin";
    f.params = {c, amp};
    f.eval = [c, amp](double x) { return c + amp * std::sin(two_pi * x); };
    f.lambda = c - std::abs(amp);
    f.upper = c + std::abs(amp);
    if (f.lambda <= 0) throw std::invalid_argument("two_plus_sin: not elliptic");
    return f;
}

/// a(x) = (1 + A sin(2 pi x))^{-1}; harmonic mean is exactly 1.
inline CoefficientField make_inv_one_plus_sin_field(double amp = 0.5) {
    if (std::abs(amp) >= 1) throw std::invalid_argument("inv_one_plus_sin: |amp| < 1 required");
    CoefficientField f;
    f.name = "inv_one_plus_sin";
    f.params = {amp};
    f.eval = [amp](double x) { return 1.0 / (1.0 + amp * std::sin(two_pi * x)); };
    f.lambda = 1.0 / (1.0 + std::abs(amp));
    f.upper = 1.0 / (1.0 - std::abs(amp));
    return f;
}

inline CoefficientField make_field(const std::string& name, const std::vector<double>& params) {
    if (name == "constant") return make_constant_field(params.empty() ? 1.0 : params[0]);
    if (name == "two_plus_sin")
        return make_two_plus_sin_field(params.size() > 0 ? params[0] : 2.0,
                                       params.size() > 1 ? params[1] : 1.0);
    if (name == "inv_one_plus_sin")
        return make_inv_one_plus_sin_field(params.empty() ? 0.5 : params[0]);
    throw std::invalid_argument("unknown coefficient field: " + name);
}

} // namespace ltwave
