#pragma once

// Small numeric utilities shared across modules: Gauss-Legendre panels,
// adaptive oscillatory quadrature, log-log slope fits with floor exclusion,
// a deterministic config hash, and a chunked parallel_for.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace ltwave {

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline const GaussRule& gauss_legendre(int n = 16) {
    static thread_local std::vector<GaussRule> cache;
    if (static_cast<int>(cache.size()) <= n) cache.resize(n + 1);
    GaussRule& rule = cache[n];
    if (!rule.nodes.empty()) return rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// Composite 16-point Gauss quadrature over [a,b] with a fixed panel count;
/// works for real- or complex-valued integrands.
template <class F>
auto gauss_panels(F&& f, double a, double b, int panels) -> decltype(f(a) * 1.0) {
    using R = decltype(f(a) * 1.0);
    if (b <= a) return R{};
    const GaussRule& rule = gauss_legendre(16);
    R total{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        double mid = lo + 0.5 * h, half = 0.5 * h;
        R acc{};
        for (size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += acc * half;
    }
    return total;
}

/// Panel-doubling quadrature: doubles until successive results differ by
/// less than tol (absolute), starting from a frequency-informed count.
template <class F>
auto adaptive_gauss(F&& f, double a, double b, double freq_hint, double tol = 1e-12,
                    int max_doublings = 12, bool* converged = nullptr) -> decltype(f(a) * 1.0) {
    using R = decltype(f(a) * 1.0);
    if (converged) *converged = true;
    if (b <= a) return R{};
    int panels = std::max(4, static_cast<int>(std::ceil((b - a) * (std::abs(freq_hint) + 1.0) / 4.0)));
    R prev = gauss_panels(f, a, b, panels);
    for (int d = 0; d < max_doublings; ++d) {
        panels *= 2;
        R next = gauss_panels(f, a, b, panels);
        if (std::abs(next - prev) <= tol * (1.0 + std::abs(next))) return next;
        prev = next;
    }
    if (converged) *converged = false;
    return prev;
}

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    int points_used = 0;
};

/// Least-squares fit of log(y) vs log(x), excluding points within
/// `floor_factor` times `floor` of the numerical floor.
inline SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                           double floor = 0.0, double floor_factor = 10.0) {
    SlopeFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) continue;
        if (floor > 0 && y[i] < floor_factor * floor) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    fit.points_used = n;
    if (n < 2) return fit;
    double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

/// FNV-1a hash of a string, used to stamp CSV rows with the config identity.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Chunked parallel loop; results must be written to disjoint slots.
inline void parallel_for(int begin, int end, const std::function<void(int)>& body,
                         int max_threads = 0) {
    int n = end - begin;
    if (n <= 0) return;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int threads = max_threads > 0 ? max_threads : std::min(hw > 0 ? hw : 1, 8);
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([=, &body]() {
            for (int i = begin + t; i < end; i += threads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace ltwave
