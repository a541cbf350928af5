#pragma once

// Serialization: corrector sets go to a JSON container (arrays with explicit
// order/index metadata); fine-solver snapshots go to a small tagged binary
// format (magic, grid metadata, then u and v as raw doubles).

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "ltwave/fine_solver.hpp"
#include "ltwave/hyperbolic.hpp"
#include "ltwave/spectral.hpp"

namespace ltwave {

inline nlohmann::json to_json(const SpectralCorrectors& S) {
    nlohmann::json j;
    j["type"] = "spectral";
    j["N"] = S.grid.N;
    j["ell"] = S.ell;
    j["field"] = {{"name", S.field.name}, {"params", S.field.params}};
    for (int n = 0; n <= S.ell; ++n) j["psi"].push_back({{"n", n}, {"values", S.psi[n]}});
    for (int n = 1; n <= S.ell; ++n) j["b"].push_back({{"n", n}, {"value", S.b[n]}});
    for (int n = 0; n < static_cast<int>(S.sigma.size()); ++n)
        if (!S.sigma[n].empty()) j["sigma"].push_back({{"n", n}, {"values", S.sigma[n]}});
    for (int n = 2; n < static_cast<int>(S.rho.size()); ++n)
        if (!S.rho[n].empty()) j["rho"].push_back({{"n", n}, {"values", S.rho[n]}});
    for (int m = 0; m < static_cast<int>(S.zeta.size()); ++m)
        for (int n = 0; n < static_cast<int>(S.zeta[m].size()); ++n)
            j["zeta"].push_back({{"n", n}, {"m", m}, {"values", S.zeta[m][n]}});
    for (int m = 0; m < static_cast<int>(S.tau.size()); ++m)
        for (int k = 0; k < static_cast<int>(S.tau[m].size()); ++k)
            if (!S.tau[m][k].empty())
                j["tau"].push_back({{"n", k - 1}, {"m", m}, {"values", S.tau[m][k]}});
    return j;
}

inline nlohmann::json to_json(const HyperbolicCorrectors& H) {
    nlohmann::json j;
    j["type"] = "hyperbolic";
    j["N"] = H.grid.N;
    j["order"] = H.order;
    j["field"] = {{"name", H.field.name}, {"params", H.field.params}};
    for (int n = 0; n <= H.order; ++n)
        for (int m = 0; n + m <= H.order; ++m) {
            j["phi"].push_back({{"n", n}, {"m", m}, {"values", H.phi[n][m]}});
            if (n >= 1) j["abar"].push_back({{"n", n}, {"m", m}, {"value", H.abar[n][m]}});
            if (m >= 1 && !H.sigma_h[n][m].empty())
                j["sigma"].push_back({{"n", n}, {"m", m}, {"values", H.sigma_h[n][m]}});
        }
    return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(1) << "\n";
}

/// Binary snapshot container: "LTWSNAP1", i32 M, i32 L, i32 K, i32 ppc,
/// then per snapshot f64 t followed by M f64 u values and M f64 v values.
inline void write_snapshots(const FineTrajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const char magic[8] = {'L', 'T', 'W', 'S', 'N', 'A', 'P', '1'};
    out.write(magic, 8);
    auto w32 = [&](int v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    w32(traj.domain.M());
    w32(traj.domain.L);
    w32(traj.domain.K);
    w32(traj.domain.points_per_cell);
    int count = static_cast<int>(traj.snapshots.size());
    w32(count);
    for (const WaveState& s : traj.snapshots) {
        out.write(reinterpret_cast<const char*>(&s.t), 8);
        out.write(reinterpret_cast<const char*>(s.u.data()), 8 * s.u.size());
        out.write(reinterpret_cast<const char*>(s.v.data()), 8 * s.v.size());
    }
}

} // namespace ltwave
