#pragma once

// Thin RAII cache around FFTW complex 1D plans. Plan creation is guarded by a
// mutex (the FFTW planner is not thread-safe); execution on caller-owned
// buffers is safe from concurrent threads.

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace ltwave {

using cplx = std::complex<double>;

namespace detail {

class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    // Unnormalized forward transform, sum_j x_j e^{-2pi i jk/N}.
    void forward(const cplx* in, cplx* out, int n) { exec(n, FFTW_FORWARD, in, out); }
    // Unnormalized backward transform.
    void backward(const cplx* in, cplx* out, int n) { exec(n, FFTW_BACKWARD, in, out); }

    FftPlanCache(const FftPlanCache&) = delete;
    FftPlanCache& operator=(const FftPlanCache&) = delete;

private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    void exec(int n, int sign, const cplx* in, cplx* out) {
        fftw_plan plan = get_plan(n, sign);
        fftw_execute_dft(plan,
                         reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    fftw_plan get_plan(int n, int sign) {
        std::scoped_lock lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<cplx> tmp_in(n), tmp_out(n);
        fftw_plan plan = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(tmp_in.data()),
            reinterpret_cast<fftw_complex*>(tmp_out.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

} // namespace detail

/// Forward DFT of a complex sequence (unnormalized).
inline std::vector<cplx> fft(const std::vector<cplx>& x) {
    std::vector<cplx> out(x.size());
    detail::FftPlanCache::instance().forward(x.data(), out.data(), static_cast<int>(x.size()));
    return out;
}

/// Inverse DFT, normalized by 1/N.
inline std::vector<cplx> ifft(const std::vector<cplx>& x) {
    std::vector<cplx> out(x.size());
    detail::FftPlanCache::instance().backward(x.data(), out.data(), static_cast<int>(x.size()));
    const double inv = 1.0 / static_cast<double>(x.size());
    for (auto& v : out) v *= inv;
    return out;
}

inline std::vector<cplx> fft(const std::vector<double>& x) {
    std::vector<cplx> tmp(x.begin(), x.end());
    return fft(tmp);
}

} // namespace ltwave
