#pragma once

// Discretized periodic unit cell Q = (-1/2, 1/2) with trigonometric
// collocation: nodes x_j = -1/2 + j/N, spectral differentiation, exact node
// averages, and 3/2-rule de-aliased products.

#include <cassert>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ltwave/fft.hpp"

namespace ltwave {

using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct CellGrid {
    int N = 512;

    explicit CellGrid(int n = 512) : N(n) {
        assert(N >= 4 && (N & (N - 1)) == 0 && "N must be a power of two");
    }

    double node(int j) const { return -0.5 + static_cast<double>(j) / N; }

    std::vector<double> nodes() const {
        std::vector<double> x(N);
        for (int j = 0; j < N; ++j) x[j] = node(j);
        return x;
    }

    // Signed integer frequency of FFT bin j (wavenumber is 2*pi*freq).
    int freq(int j) const { return j < N / 2 ? j : j - N; }

    bool operator==(const CellGrid& o) const { return N == o.N; }
};

/// Node average; spectrally exact for trigonometric data.
inline double cell_mean(const RealField& f) {
    double s = 0;
    for (double v : f) s += v;
    return s / static_cast<double>(f.size());
}

inline cplx cell_mean(const ComplexField& f) {
    cplx s = 0;
    for (const cplx& v : f) s += v;
    return s / static_cast<double>(f.size());
}

inline double l2_norm(const RealField& f) {
    double s = 0;
    for (double v : f) s += v * v;
    return std::sqrt(s / static_cast<double>(f.size()));
}

inline double l2_norm(const ComplexField& f) {
    double s = 0;
    for (const cplx& v : f) s += std::norm(v);
    return std::sqrt(s / static_cast<double>(f.size()));
}

namespace detail {

// Multiply spectrum by (i 2 pi m)^order; the Nyquist bin is zeroed for odd
// orders so differentiation stays skew-adjoint on the grid.
inline void apply_deriv_symbol(ComplexField& hat, const CellGrid& g, int order) {
    for (int j = 0; j < g.N; ++j) {
        int m = g.freq(j);
        if (order % 2 != 0 && j == g.N / 2) {
            hat[j] = 0;
            continue;
        }
        cplx sym = std::pow(cplx(0.0, two_pi * m), order);
        hat[j] *= sym;
    }
}

} // namespace detail

inline ComplexField grad(const ComplexField& f, const CellGrid& g) {
    ComplexField hat = fft(f);
    detail::apply_deriv_symbol(hat, g, 1);
    return ifft(hat);
}

inline RealField grad(const RealField& f, const CellGrid& g) {
    ComplexField tmp(f.begin(), f.end());
    ComplexField d = grad(tmp, g);
    RealField out(f.size());
    for (size_t j = 0; j < f.size(); ++j) out[j] = d[j].real();
    return out;
}

// One space dimension: div of a "vector" field is the plain derivative.
inline ComplexField div(const ComplexField& f, const CellGrid& g) { return grad(f, g); }
inline RealField div(const RealField& f, const CellGrid& g) { return grad(f, g); }

/// Antiderivative with vanishing mean; requires a mean-zero input.
inline ComplexField antiderivative(const ComplexField& f, const CellGrid& g) {
    ComplexField hat = fft(f);
    hat[0] = 0;
    for (int j = 1; j < g.N; ++j) {
        if (j == g.N / 2) {
            hat[j] = 0;
            continue;
        }
        hat[j] /= cplx(0.0, two_pi * g.freq(j));
    }
    return ifft(hat);
}

inline RealField antiderivative(const RealField& f, const CellGrid& g) {
    ComplexField tmp(f.begin(), f.end());
    ComplexField a = antiderivative(tmp, g);
    RealField out(f.size());
    for (size_t j = 0; j < f.size(); ++j) out[j] = a[j].real();
    return out;
}

namespace detail {

inline ComplexField pad_spectrum(const ComplexField& hat, int N, int M) {
    ComplexField big(M, cplx(0));
    for (int j = 0; j < N; ++j) {
        int m = j < N / 2 ? j : j - N;
        int idx = m >= 0 ? m : M + m;
        big[idx] = hat[j];
    }
    return big;
}

inline ComplexField truncate_spectrum(const ComplexField& bighat, int M, int N) {
    ComplexField hat(N, cplx(0));
    for (int j = 0; j < N; ++j) {
        int m = j < N / 2 ? j : j - N;
        int idx = m >= 0 ? m : M + m;
        hat[j] = bighat[idx];
    }
    return hat;
}

} // namespace detail

/// Pointwise product with 3/2-rule de-aliasing: exact Galerkin projection of
/// the product of two grid trigonometric polynomials.
inline ComplexField product(const ComplexField& u, const ComplexField& v, const CellGrid& g,
                            bool dealias = true) {
    const int N = g.N;
    if (!dealias) {
        ComplexField out(N);
        for (int j = 0; j < N; ++j) out[j] = u[j] * v[j];
        return out;
    }
    const int M = 3 * N / 2;
    ComplexField uh = fft(u), vh = fft(v);
    ComplexField ub = ifft(detail::pad_spectrum(uh, N, M));
    ComplexField vb = ifft(detail::pad_spectrum(vh, N, M));
    ComplexField wb(M);
    for (int j = 0; j < M; ++j) wb[j] = ub[j] * vb[j];
    ComplexField wh = detail::truncate_spectrum(fft(wb), M, N);
    ComplexField out = ifft(wh);
    const double scale = static_cast<double>(M) / N; // padding rescales grid sums
    for (auto& c : out) c *= scale;
    return out;
}

inline RealField product(const RealField& u, const RealField& v, const CellGrid& g,
                         bool dealias = true) {
    ComplexField uc(u.begin(), u.end()), vc(v.begin(), v.end());
    ComplexField w = product(uc, vc, g, dealias);
    RealField out(u.size());
    for (size_t j = 0; j < u.size(); ++j) out[j] = w[j].real();
    return out;
}

/// Shifted gradient (d/dx + i xi) acting on a periodic cell field.
inline ComplexField grad_shifted(const ComplexField& f, const CellGrid& g, double xi) {
    ComplexField hat = fft(f);
    for (int j = 0; j < g.N; ++j) {
        double k = two_pi * g.freq(j);
        if (j == g.N / 2) k = 0;
        hat[j] *= cplx(0.0, k + xi);
    }
    return ifft(hat);
}

/// L_xi f = -(d/dx + i xi) . a (d/dx + i xi) f, the fibered cell operator,
/// applied pseudo-spectrally with de-aliased coefficient product.
inline ComplexField apply_fibered(const RealField& a, const ComplexField& f, const CellGrid& g,
                                  double xi, bool dealias = true) {
    ComplexField ac(a.begin(), a.end());
    ComplexField flux = product(ac, grad_shifted(f, g, xi), g, dealias);
    ComplexField out = grad_shifted(flux, g, xi);
    for (auto& v : out) v = -v;
    return out;
}

} // namespace ltwave
