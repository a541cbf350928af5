#pragma once

// Reference heterogeneous solver on the periodic line domain: Stormer-Verlet
// time stepping with the stiffness -d/dx(a(./eps) d/dx .) applied
// pseudo-spectrally. The domain is sized to prevent wrap-around; energy is
// tracked both as the physical quantity and as the exactly conserved discrete
// leapfrog invariant.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ltwave/coefficient.hpp"
#include "ltwave/domain.hpp"
#include "ltwave/errors.hpp"
#include "ltwave/fft.hpp"
#include "ltwave/impulse.hpp"

namespace ltwave {

struct WaveState {
    double t = 0.0;
    RealField u; // displacement on the domain grid
    RealField v; // time derivative
};

struct EnergySample {
    double t = 0.0;
    double physical = 0.0;  // (1/2) int v^2 + a_eps (u')^2
    double invariant = 0.0; // discrete leapfrog invariant
};

struct FineTrajectory {
    LineDomain domain;
    double dt = 0.0;
    std::vector<WaveState> snapshots;
    std::vector<EnergySample> energy_log;
};

namespace detail {

struct LineSpectral {
    int M;
    std::vector<double> k; // wavenumbers, Nyquist zeroed

    explicit LineSpectral(const LineDomain& dom) : M(dom.M()), k(M, 0.0) {
        const double base = M_PI / dom.L; // 2 pi / (2L)
        for (int j = 0; j < M; ++j) {
            int m = j < M / 2 ? j : j - M;
            k[j] = (j == M / 2) ? 0.0 : base * m;
        }
    }

    RealField deriv(const RealField& f) const {
        ComplexField hat = fft(ComplexField(f.begin(), f.end()));
        for (int j = 0; j < M; ++j) hat[j] *= cplx(0.0, k[j]);
        ComplexField d = ifft(hat);
        RealField out(M);
        for (int j = 0; j < M; ++j) out[j] = d[j].real();
        return out;
    }
};

} // namespace detail

/// E = (1/2) int (v^2 + a_eps |u'|^2) by spectral quadrature.
inline double energy(const WaveState& state, const RealField& a_eps, const LineDomain& dom) {
    detail::LineSpectral sp(dom);
    RealField du = sp.deriv(state.u);
    double acc = 0;
    for (int j = 0; j < dom.M(); ++j)
        acc += state.v[j] * state.v[j] + a_eps[j] * du[j] * du[j];
    return 0.5 * acc * dom.dx();
}

/// Integrate the heterogeneous wave equation from rest at the opening of the
/// impulse support, storing snapshots at the requested times (snapped onto
/// the step grid; snapshot times are exact multiples of dt from t0).
inline FineTrajectory integrate(const CoefficientField& field, const LineDomain& dom,
                                const Impulse& f, double T, double dt_request,
                                const std::vector<double>& snapshot_times = {},
                                int energy_stride = 64) {
    dom.validate();
    const int M = dom.M();
    const double eps = dom.eps();

    RealField a_eps(M);
    for (int j = 0; j < M; ++j) a_eps[j] = field.eval(dom.node(j) / eps);
    double sup_a = 0;
    for (double v : a_eps) sup_a = std::max(sup_a, v);

    const double cfl = 0.2 * dom.dx() / std::sqrt(sup_a);
    if (dt_request > cfl)
        throw CFLViolation("integrate: dt " + std::to_string(dt_request) + " exceeds " +
                           std::to_string(cfl));

    const double t0 = f.f1.t0;
    const int steps = static_cast<int>(std::ceil((T - t0) / dt_request));
    const double dt = (T - t0) / steps;

    detail::LineSpectral sp(dom);
    auto apply_L = [&](const RealField& u) {
        RealField du = sp.deriv(u);
        for (int j = 0; j < M; ++j) du[j] *= a_eps[j];
        return sp.deriv(du);
    };
    RealField f2(M);
    for (int j = 0; j < M; ++j) f2[j] = f.f2_value(dom.node(j));

    FineTrajectory traj;
    traj.domain = dom;
    traj.dt = dt;

    // map snapshot times onto step indices
    std::vector<long> snap_steps;
    for (double ts : snapshot_times)
        snap_steps.push_back(std::lround((ts - t0) / dt));

    RealField u(M, 0.0), uprev(M, 0.0), unew(M, 0.0);
    // first step from rest: u(t0 + dt) = (dt^2/2)(L u + f(t0)) with u = 0
    {
        double f1v = f.f1.value(t0);
        for (int j = 0; j < M; ++j) unew[j] = 0.5 * dt * dt * f1v * f2[j];
    }

    auto record = [&](long step, const RealField& ucur, const RealField& uprv,
                      const RealField& unxt) {
        double t = t0 + step * dt;
        for (auto target : snap_steps) {
            if (target == step) {
                WaveState s;
                s.t = t;
                s.u = ucur;
                s.v.resize(M);
                for (int j = 0; j < M; ++j) s.v[j] = (unxt[j] - uprv[j]) / (2.0 * dt);
                traj.snapshots.push_back(std::move(s));
                break;
            }
        }
    };

    // energy log uses the exactly conserved discrete bilinear form
    auto log_energy = [&](long step, const RealField& ucur, const RealField& unxt) {
        if (step % energy_stride != 0) return;
        EnergySample es;
        es.t = t0 + (step + 0.5) * dt;
        RealField Lu = apply_L(ucur);
        RealField du = sp.deriv(ucur);
        RealField dn = sp.deriv(unxt);
        double inv = 0, phys = 0;
        for (int j = 0; j < M; ++j) {
            double vel = (unxt[j] - ucur[j]) / dt;
            inv += vel * vel - Lu[j] * unxt[j];
            phys += vel * vel + a_eps[j] * du[j] * dn[j];
        }
        es.invariant = 0.5 * inv * dom.dx();
        es.physical = 0.5 * phys * dom.dx();
        traj.energy_log.push_back(es);
    };

    uprev = RealField(M, 0.0);
    u = unew; // state at step 1
    record(0, uprev, uprev, uprev);
    for (long step = 1; step <= steps; ++step) {
        double t = t0 + step * dt;
        RealField Lu = apply_L(u);
        double f1v = f.f1.value(t);
        for (int j = 0; j < M; ++j)
            unew[j] = 2.0 * u[j] - uprev[j] + dt * dt * (Lu[j] + f1v * f2[j]);
        record(step, u, uprev, unew);
        log_energy(step, u, unew);
        std::swap(uprev, u);
        std::swap(u, unew);
    }
    return traj;
}

struct AprioriReport {
    bool active = false;
    double max_energy_ratio = 0.0; // ||Du(t)|| / ||f||_{L1 L2}
    double max_l2_ratio = 0.0;     // ||u(t)|| / (t ||f||_{L1 L2})
    bool bounded = true;
};

/// A priori ratios along a trajectory (energy vs impulse budget); flags growth in t.
inline AprioriReport apriori_check(const FineTrajectory& traj, const CoefficientField& field,
                                   const Impulse& f) {
    AprioriReport rep;
    const LineDomain& dom = traj.domain;
    RealField a_eps(dom.M());
    for (int j = 0; j < dom.M(); ++j) a_eps[j] = field.eval(dom.node(j) / dom.eps());
    detail::LineSpectral sp(dom);
    std::vector<double> ratios;
    for (const WaveState& s : traj.snapshots) {
        double fnorm = f.l1l2_norm(s.t);
        if (fnorm <= 0) continue;
        rep.active = true;
        RealField du = sp.deriv(s.u);
        double dsq = 0, usq = 0;
        for (int j = 0; j < dom.M(); ++j) {
            dsq += s.v[j] * s.v[j] + du[j] * du[j];
            usq += s.u[j] * s.u[j];
        }
        double denergy = std::sqrt(dsq * dom.dx());
        double l2 = std::sqrt(usq * dom.dx());
        rep.max_energy_ratio = std::max(rep.max_energy_ratio, denergy / fnorm);
        rep.max_l2_ratio = std::max(rep.max_l2_ratio, l2 / (std::max(s.t, 1.0) * fnorm));
        ratios.push_back(denergy / fnorm);
    }
    // bounded: the tail of the ratio sequence must not keep climbing
    if (ratios.size() >= 4) {
        double early = *std::max_element(ratios.begin(), ratios.begin() + ratios.size() / 2);
        double late = *std::max_element(ratios.begin() + ratios.size() / 2, ratios.end());
        rep.bounded = late <= 2.0 * std::max(early, 1e-12);
    }
    return rep;
}

} // namespace ltwave
