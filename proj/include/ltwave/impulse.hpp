#pragma once

// Separable space-time impulse f(t,x) = f1(t) f2(x): a compactly supported
// smooth bump in time with analytic derivatives, and a band-limited
// random-phase spatial spectrum on the Fourier grid of a periodic line
// domain of half-length L (modes xi_j = pi j / L, |xi_j| <= R, DC excluded).

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "ltwave/errors.hpp"
#include "ltwave/grid.hpp"
#include "ltwave/util.hpp"

namespace ltwave {

/// f1(t) = amp * exp(-1/(s(1-s))) on s = (t-t0)/width in (0,1), zero outside.
/// Derivatives follow the recursion f^{(k)} = sum_i C(k-1,i) f^{(i)} g^{(k-i)}
/// with g = -1/s - 1/(1-s), evaluated pointwise.
struct BumpProfile {
    double t0 = 0.0;
    double width = 1.0;
    double amp = 1.0;
    int max_derivatives = 16;

    double t1() const { return t0 + width; }

    double value(double t) const { return derivative(0, t); }

    double derivative(int k, double t) const {
        if (k > max_derivatives)
            throw InsufficientTimeDerivatives("BumpProfile: order " + std::to_string(k));
        const double s = (t - t0) / width;
        if (s <= 0.0 || s >= 1.0) return 0.0;
        // g^{(j)}(s) = -(-1)^j j!/s^{j+1} - j!/(1-s)^{j+1}
        std::vector<double> gder(k + 1, 0.0);
        double fact = 1.0;
        for (int j = 1; j <= k; ++j) {
            fact *= j; // j!
            double sgn = (j % 2 == 0) ? -1.0 : 1.0; // -(-1)^j
            gder[j] = sgn * fact / std::pow(s, j + 1) - fact / std::pow(1.0 - s, j + 1);
        }
        std::vector<double> F(k + 1, 0.0);
        F[0] = amp * std::exp(-1.0 / s - 1.0 / (1.0 - s));
        for (int q = 1; q <= k; ++q) {
            double acc = 0.0;
            double binom = 1.0; // C(q-1, i)
            for (int i = 0; i <= q - 1; ++i) {
                acc += binom * F[i] * gder[q - i];
                binom = binom * (q - 1 - i) / (i + 1);
            }
            F[q] = acc;
        }
        return F[k] / std::pow(width, k);
    }

    /// integral of f1 over its support (smooth integrand, fixed panels)
    double integral() const {
        return gauss_panels([this](double t) { return value(t); }, t0, t1(), 64);
    }
};

/// Band-limited impulse on a line domain of half-length L. The spatial
/// profile is f2(x) = 2 Re sum_{j>0} c_j e^{i xi_j x}; the mirror modes are
/// implied by realness and the DC coefficient is zero.
struct Impulse {
    BumpProfile f1;
    double L = 8.0;
    double R = 4.0;
    unsigned seed = 2027;
    std::vector<int> js;    // positive mode numbers with xi_j <= R
    std::vector<cplx> c;    // spatial coefficients, one per entry of js

    double xi(int idx) const { return M_PI * js[idx] / L; }
    int mode_count() const { return static_cast<int>(js.size()); }

    /// || f2 ||_{L^2(-L,L)}
    double f2_l2() const {
        double s = 0;
        for (const cplx& v : c) s += std::norm(v);
        return std::sqrt(4.0 * L * s);
    }

    /// || f ||_{L^1((0,t); L^2)} = (int_0^t f1) * ||f2||
    double l1l2_norm(double t) const {
        double upto = std::min(t, f1.t1());
        if (upto <= f1.t0) return 0.0;
        double i1 = gauss_panels([this](double s) { return f1.value(s); }, f1.t0, upto, 64);
        return i1 * f2_l2();
    }

    double f2_value(double x) const {
        cplx s = 0;
        for (int i = 0; i < mode_count(); ++i) s += c[i] * std::exp(cplx(0, xi(i) * x));
        return 2.0 * s.real();
    }
};

/// Random-phase band-limited impulse, normalized so ||f2||_{L^2(-L,L)} = amp
/// and (by default) int f1 dt = 1.
inline Impulse make_impulse(double L, double R, unsigned seed, double t0 = 0.0,
                            double width = 1.0, double amp = 1.0, bool normalize_f1 = true) {
    Impulse f;
    f.L = L;
    f.R = R;
    f.seed = seed;
    f.f1 = BumpProfile{t0, width, 1.0};
    if (normalize_f1) {
        double I = f.f1.integral();
        f.f1.amp = 1.0 / I;
    }
    const int jmax = static_cast<int>(std::floor(R * L / M_PI));
    if (jmax < 1) throw std::invalid_argument("make_impulse: band holds no modes");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    const double mag = amp / std::sqrt(4.0 * L * jmax);
    for (int j = 1; j <= jmax; ++j) {
        f.js.push_back(j);
        f.c.push_back(mag * std::exp(cplx(0, phase(rng))));
    }
    return f;
}

} // namespace ltwave
