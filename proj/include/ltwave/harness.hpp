#pragma once

// Experiment orchestration: configuration parsing, deterministic CSV output
// stamped with the config hash, convergence / time-growth / summability
// sweeps, the naive-cascade secular-growth exhibit, and the aggregated
// crosscheck suite.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ltwave/bloch.hpp"
#include "ltwave/coefficient.hpp"
#include "ltwave/effective.hpp"
#include "ltwave/expansion.hpp"
#include "ltwave/fine_solver.hpp"
#include "ltwave/hyperbolic.hpp"
#include "ltwave/impulse.hpp"
#include "ltwave/spectral.hpp"
#include "ltwave/util.hpp"

namespace ltwave {

struct ExperimentConfig {
    std::string field_name = "two_plus_sin";
    std::vector<double> field_params = {2.0, 1.0};
    std::vector<int> ell_list = {1, 2, 3};
    std::vector<double> eps_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    std::vector<double> t_list = {2.0};
    std::string variant = "base";
    int grid_N = 512;
    int grid_M = 0;     // fine grid points; 0 = derived from L, K, ppc
    double grid_dt = 0; // 0 = auto CFL fraction
    int grid_L = 0;     // 0 = auto from the final time
    int grid_ppc = 32;
    double impulse_R = 4.0;
    double impulse_t0 = 0.0;
    double impulse_width = 1.0;
    double impulse_amp = 1.0;
    unsigned impulse_seed = 2027;
    int bloch_K = 32;
    int bloch_modes = 12;
    std::string out_dir = ".";
    int threads = 0;

    CoefficientField field() const { return make_field(field_name, field_params); }

    EffectiveVariant variant_enum() const {
        if (variant == "base") return EffectiveVariant::Base;
        if (variant == "filter") return EffectiveVariant::Filtered;
        if (variant == "reg") return EffectiveVariant::Regularized;
        if (variant == "bsq") return EffectiveVariant::Boussinesq;
        throw std::invalid_argument("unknown variant: " + variant);
    }

    /// Domain half-length preventing wrap-around up to time T.
    int auto_L(double T) const {
        if (grid_L > 0) return grid_L;
        double cmax = std::sqrt(field().upper);
        return std::max(4, static_cast<int>(std::ceil(cmax * T + 2.0)));
    }

    std::string canonical() const {
        std::ostringstream os;
        os << "field.name=" << field_name << "\nfield.params=";
        for (double v : field_params) os << v << ",";
        os << "\nell=";
        for (int v : ell_list) os << v << ",";
        os << "\neps_list=";
        for (double v : eps_list) os << v << ",";
        os << "\nt_list=";
        for (double v : t_list) os << v << ",";
        os << "\nvariant=" << variant << "\ngrid.N=" << grid_N << "\ngrid.M=" << grid_M
           << "\ngrid.dt=" << grid_dt << "\ngrid.L=" << grid_L << "\ngrid.ppc=" << grid_ppc
           << "\nimpulse.R=" << impulse_R << "\nimpulse.t0=" << impulse_t0
           << "\nimpulse.width=" << impulse_width << "\nimpulse.amp=" << impulse_amp
           << "\nimpulse.seed=" << impulse_seed << "\nbloch.K=" << bloch_K
           << "\nbloch.modes=" << bloch_modes << "\n";
        return os.str();
    }

    std::string hash() const {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(canonical())));
        return buf;
    }

    Impulse impulse(double L) const {
        return make_impulse(L, impulse_R, impulse_seed, impulse_t0, impulse_width, impulse_amp);
    }
};

namespace detail {

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
    return out;
}

} // namespace detail

/// Parse a key=value config file ('#' starts a comment).
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        auto hashpos = line.find('#');
        if (hashpos != std::string::npos) line = line.substr(0, hashpos);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string v) {
            v.erase(0, v.find_first_not_of(" \t"));
            auto last = v.find_last_not_of(" \t\r");
            v.erase(last == std::string::npos ? 0 : last + 1);
            return v;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) continue;
        if (key == "field.name") cfg.field_name = val;
        else if (key == "field.params") cfg.field_params = detail::parse_double_list(val);
        else if (key == "ell") cfg.ell_list = detail::parse_int_list(val);
        else if (key == "eps_list") cfg.eps_list = detail::parse_double_list(val);
        else if (key == "t_list") cfg.t_list = detail::parse_double_list(val);
        else if (key == "variant") cfg.variant = val;
        else if (key == "grid.N") cfg.grid_N = std::stoi(val);
        else if (key == "grid.M") cfg.grid_M = std::stoi(val);
        else if (key == "grid.dt") cfg.grid_dt = std::stod(val);
        else if (key == "grid.L") cfg.grid_L = std::stoi(val);
        else if (key == "grid.ppc") cfg.grid_ppc = std::stoi(val);
        else if (key == "impulse.R") cfg.impulse_R = std::stod(val);
        else if (key == "impulse.t0") cfg.impulse_t0 = std::stod(val);
        else if (key == "impulse.width") cfg.impulse_width = std::stod(val);
        else if (key == "impulse.amp") cfg.impulse_amp = std::stod(val);
        else if (key == "impulse.seed") cfg.impulse_seed = static_cast<unsigned>(std::stoul(val));
        else if (key == "bloch.K") cfg.bloch_K = std::stoi(val);
        else if (key == "bloch.modes") cfg.bloch_modes = std::stoi(val);
        else if (key == "out.dir") cfg.out_dir = val;
        else if (key == "threads") cfg.threads = std::stoi(val);
        else throw std::invalid_argument("unknown config key: " + key);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return parse_config(in);
}

/// Deterministic CSV writer; every row carries the config hash.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& header, const std::string& hash)
        : out_(path), hash_(hash) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        out_ << header << ",config\n";
    }

    template <class... Args>
    void row(Args... args) {
        bool first = true;
        ((write_cell(args, first), first = false), ...);
        out_ << "," << hash_ << "\n";
    }

private:
    void write_cell(double v, bool first) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (!first) out_ << ",";
        out_ << buf;
    }
    void write_cell(int v, bool first) {
        if (!first) out_ << ",";
        out_ << v;
    }
    void write_cell(const std::string& v, bool first) {
        if (!first) out_ << ",";
        out_ << v;
    }
    void write_cell(const char* v, bool first) {
        if (!first) out_ << ",";
        out_ << v;
    }

    std::ofstream out_;
    std::string hash_;
};

// ---------------------------------------------------------------------------
// Shared experiment machinery
// ---------------------------------------------------------------------------

enum class ExpansionKind { Spectral, Hyperbolic };

struct SweepCell {
    double eps = 0.0;
    int ell = 0;
    double t = 0.0;
    double err_l2 = 0.0;
    double err_energy = 0.0;
};

/// Errors of the order-ell expansion against the Floquet reference at one
/// (eps, t); correctors and coefficient data are shared across calls.
struct ExpansionLab {
    CoefficientField field;
    CellGrid grid{512};
    SpectralCorrectors S;
    HyperbolicCorrectors H;
    std::vector<double> revamped_b;
    std::vector<std::vector<double>> revamped_c;
    int bloch_K = 32;
    int bloch_modes = 12;
    int threads = 0;

    ExpansionLab(const CoefficientField& f, int max_ell, const CellGrid& g, int K, int modes,
                 int nthreads = 0)
        : field(f), grid(g), S(build_spectral(f, std::max(max_ell, 3), g)),
          H(build_phi_a(f, std::max(max_ell + 2, 5), g)), bloch_K(K), bloch_modes(modes),
          threads(nthreads) {
        build_sigma_hyp(H);
        revamped_b = revamp_b(H, std::max(max_ell, 3));
        revamped_c = revamp_c(H, std::max(max_ell, 1));
    }

    /// Reference solution cache per (eps, t) pair is the caller's concern;
    /// this just runs the Floquet sum.
    BlochDuhamelResult reference(double eps, const Impulse& f, double t) const {
        return bloch_duhamel(S.a, grid, eps, f, t, bloch_modes, bloch_K, threads);
    }

    SweepCell cell(ExpansionKind kind, int ell, double eps, const Impulse& f, double t,
                   EffectiveVariant variant, const BlochDuhamelResult* ref = nullptr) const {
        BlochDuhamelResult local;
        if (!ref) {
            local = reference(eps, f, t);
            ref = &local;
        }
        TwoScaleField approx;
        if (kind == ExpansionKind::Spectral) {
            EffectiveSymbolSpec spec =
                make_effective_spec(S.b, ell, eps, variant, field.lambda, f.R);
            ModeSolution sol = solve_effective(spec, f, {t}, threads);
            approx = assemble_S(S, sol, f, eps, ell, 0);
        } else {
            EffectiveSymbolSpec spec =
                make_effective_spec(revamped_b, ell, eps, variant, field.lambda, f.R);
            spec.geometric = true;
            spec.cbar = revamped_c;
            ModeSolution sol = solve_effective(spec, f, {t}, threads);
            approx = assemble_H(H, sol, f.L, eps, ell, 0);
        }
        ErrorNorms errs = error_norms(ref->field, approx);
        return SweepCell{eps, ell, t, errs.l2, errs.energy};
    }
};

struct ConvergenceResult {
    std::vector<SweepCell> cells;
    std::map<int, SlopeFit> slopes; // per ell: err_energy vs eps
};

/// Energy-norm error versus eps for each requested order. Cells already
/// present in `known` (matched on eps, ell, t) are reused, which makes
/// interrupted sweeps resumable from their CSV output.
inline ConvergenceResult run_convergence(const ExperimentConfig& cfg,
                                         ExpansionKind kind = ExpansionKind::Spectral,
                                         CsvWriter* csv = nullptr,
                                         const std::vector<SweepCell>* known = nullptr) {
    const double t = cfg.t_list.front();
    int max_ell = *std::max_element(cfg.ell_list.begin(), cfg.ell_list.end());
    ExpansionLab lab(cfg.field(), max_ell, CellGrid(cfg.grid_N), cfg.bloch_K, cfg.bloch_modes,
                     cfg.threads);
    const int L = cfg.auto_L(t);
    Impulse f = cfg.impulse(L);

    auto lookup = [&](double eps, int ell) -> const SweepCell* {
        if (!known) return nullptr;
        for (const SweepCell& c : *known)
            if (c.ell == ell && std::abs(c.eps - eps) < 1e-15 && std::abs(c.t - t) < 1e-12)
                return &c;
        return nullptr;
    };

    ConvergenceResult res;
    for (double eps : cfg.eps_list) {
        bool all_known = true;
        for (int ell : cfg.ell_list)
            if (!lookup(eps, ell)) all_known = false;
        BlochDuhamelResult ref;
        if (!all_known) ref = lab.reference(eps, f, t);
        for (int ell : cfg.ell_list) {
            SweepCell c;
            if (const SweepCell* prev = lookup(eps, ell))
                c = *prev;
            else
                c = lab.cell(kind, ell, eps, f, t, cfg.variant_enum(), &ref);
            res.cells.push_back(c);
            if (csv) csv->row(c.eps, c.ell, c.t, c.err_l2, c.err_energy);
        }
    }
    for (int ell : cfg.ell_list) {
        std::vector<double> xs, ys;
        for (const SweepCell& c : res.cells)
            if (c.ell == ell) {
                xs.push_back(c.eps);
                ys.push_back(c.err_energy);
            }
        res.slopes[ell] = fit_loglog(xs, ys, 1e-11);
    }
    return res;
}

struct TimeGrowthResult {
    std::vector<SweepCell> cells;
    SlopeFit exponent; // err_energy vs t (log-log)
};

/// Error growth in time at fixed (eps, ell); the <t> law gives exponent <= 1.
inline TimeGrowthResult run_time_growth(const ExperimentConfig& cfg,
                                        CsvWriter* csv = nullptr) {
    const double eps = cfg.eps_list.front();
    const int ell = cfg.ell_list.front();
    const double t_max = *std::max_element(cfg.t_list.begin(), cfg.t_list.end());
    ExpansionLab lab(cfg.field(), ell, CellGrid(cfg.grid_N), cfg.bloch_K, cfg.bloch_modes,
                     cfg.threads);
    const int L = cfg.auto_L(t_max);
    Impulse f = cfg.impulse(L);

    TimeGrowthResult res;
    for (double t : cfg.t_list) {
        SweepCell c = lab.cell(ExpansionKind::Spectral, ell, eps, f, t, cfg.variant_enum());
        res.cells.push_back(c);
        if (csv) csv->row(c.t, c.eps, c.ell, c.err_l2, c.err_energy);
    }
    std::vector<double> ts, errs;
    for (const SweepCell& c : res.cells) {
        if (c.t < 1.0) continue;
        ts.push_back(c.t);
        errs.push_back(c.err_energy);
    }
    res.exponent = fit_loglog(ts, errs, 1e-12);
    return res;
}

struct SummabilityResult {
    std::vector<std::pair<int, double>> sup_err; // (ell, sup_t err_energy)
    bool monotone = true;                         // ratio <= 0.5 per unit ell
    int floor_ell = 0;                            // first ell at the numerical floor
};

/// sup_{t <= T} energy error against ell at fixed eps.
inline SummabilityResult run_summability(const ExperimentConfig& cfg, CsvWriter* csv = nullptr,
                                         double floor = 1e-9) {
    const double eps = cfg.eps_list.front();
    const double t_max = *std::max_element(cfg.t_list.begin(), cfg.t_list.end());
    int max_ell = *std::max_element(cfg.ell_list.begin(), cfg.ell_list.end());
    ExpansionLab lab(cfg.field(), max_ell, CellGrid(cfg.grid_N), cfg.bloch_K, cfg.bloch_modes,
                     cfg.threads);
    const int L = cfg.auto_L(t_max);
    Impulse f = cfg.impulse(L);

    // cache references per t
    std::vector<BlochDuhamelResult> refs;
    for (double t : cfg.t_list) refs.push_back(lab.reference(eps, f, t));

    SummabilityResult res;
    for (int ell : cfg.ell_list) {
        double sup = 0;
        for (size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
            SweepCell c = lab.cell(ExpansionKind::Spectral, ell, eps, f, cfg.t_list[ti],
                                   cfg.variant_enum(), &refs[ti]);
            sup = std::max(sup, c.err_energy);
        }
        res.sup_err.emplace_back(ell, sup);
        if (csv) csv->row(ell, eps, sup);
    }
    for (size_t i = 1; i < res.sup_err.size(); ++i) {
        double prev = res.sup_err[i - 1].second, cur = res.sup_err[i].second;
        if (cur < floor) {
            if (!res.floor_ell) res.floor_ell = res.sup_err[i].first;
            continue;
        }
        if (cur > 0.5 * prev) res.monotone = false;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Naive inductive cascade (secular-growth exhibit)
// ---------------------------------------------------------------------------

struct CascadeResult {
    // per eps: || grad w_eps^ell (t) || and the revamped-energy contrast
    std::vector<double> eps_list;
    std::vector<double> cascade_norm;
    std::vector<double> revamped_norm;
    SlopeFit fit_vs_eps_t; // log cascade_norm vs log(eps*t) at fixed t
};

namespace detail {

// One oscillator level represented as sum_j t^j (a_j e^{i w t} + b_j e^{-i w t});
// exact past the impulse support, where the cascade forcing chain consists of
// such exponential polynomials.
struct ExpPoly {
    double omega = 1.0;
    std::vector<cplx> a, b; // ascending powers of t

    cplx eval(double t) const {
        cplx ep = std::exp(cplx(0, omega * t)), em = std::conj(ep);
        cplx sa = 0, sb = 0, pw = 1.0;
        for (size_t j = 0; j < std::max(a.size(), b.size()); ++j) {
            if (j < a.size()) sa += a[j] * pw;
            if (j < b.size()) sb += b[j] * pw;
            pw *= t;
        }
        return sa * ep + sb * em;
    }

    cplx eval_dt(double t) const {
        cplx ep = std::exp(cplx(0, omega * t)), em = std::conj(ep);
        cplx sa = 0, sb = 0, da = 0, db = 0, pw = 1.0;
        for (size_t j = 0; j < std::max(a.size(), b.size()); ++j) {
            if (j < a.size()) {
                sa += a[j] * pw;
                if (j + 1 < a.size()) da += (double)(j + 1) * a[j + 1] * pw;
            }
            if (j < b.size()) {
                sb += b[j] * pw;
                if (j + 1 < b.size()) db += (double)(j + 1) * b[j + 1] * pw;
            }
            pw *= t;
        }
        return (da + cplx(0, omega) * sa) * ep + (db - cplx(0, omega) * sb) * em;
    }
};

// particular solution of u'' + w^2 u = sum_j p_j t^j e^{+-i w t} (resonant):
// u = Q(t) e^{+-i w t} with Q'' +- 2 i w Q' = P and Q(0) = 0.
inline std::vector<cplx> resonant_particular(const std::vector<cplx>& p, double omega, int sign) {
    const int d = static_cast<int>(p.size()) - 1;
    std::vector<cplx> q(d + 2, cplx(0));
    const cplx tw = cplx(0, 2.0 * sign * omega);
    for (int j = d; j >= 0; --j) {
        cplx rhs = p[j];
        if (j + 2 < static_cast<int>(q.size()))
            rhs -= (double)((j + 2) * (j + 1)) * q[j + 2];
        q[j + 1] = rhs / (tw * (double)(j + 1));
    }
    q[0] = 0;
    return q;
}

// Cascade chain at one macroscopic mode: RK4 across the impulse support,
// then exact exponential-polynomial propagation for arbitrary later times.
//   w1'' + abar xi^2 w1 = fhat(t),
//   wk'' + abar xi^2 wk = sum_{j=2}^{k} b^j (i xi)^{j+1} w^{k+1-j}.
struct CascadeMode {
    double omega = 1.0;
    std::vector<ExpPoly> levels; // index k = 1..ell (slot 0 unused)

    cplx value(int k, double t) const { return levels[k].eval(t); }
    cplx value_dt(int k, double t) const { return levels[k].eval_dt(t); }
};

inline CascadeMode cascade_mode(const std::vector<double>& b, int ell, double xi,
                                const BumpProfile& f1, cplx fc, double dt0 = 1e-3) {
    const double omega2 = b.at(1) * xi * xi;
    const double omega = std::sqrt(omega2);
    const double t1 = f1.t1();

    // RK4 chain across the support
    const int steps = std::max(64, static_cast<int>(std::ceil((t1 - f1.t0) / dt0)));
    const double dt = (t1 - f1.t0) / steps;
    std::vector<cplx> u(ell + 1, cplx(0)), v(ell + 1, cplx(0));
    auto accel = [&](double t, const std::vector<cplx>& uu, int k) -> cplx {
        cplx rhs = (k == 1) ? fc * f1.value(t) : cplx(0);
        for (int j = 2; j <= k; ++j) {
            if (b.at(j) == 0.0) continue;
            rhs += b[j] * std::pow(cplx(0, xi), j + 1) * uu[k + 1 - j];
        }
        return rhs - omega2 * uu[k];
    };
    std::vector<cplx> k1u(ell + 1), k1v(ell + 1), k2u(ell + 1), k2v(ell + 1), k3u(ell + 1),
        k3v(ell + 1), k4u(ell + 1), k4v(ell + 1), tmp(ell + 1);
    double t = f1.t0;
    for (int s = 0; s < steps; ++s) {
        for (int k = 1; k <= ell; ++k) {
            k1u[k] = v[k];
            k1v[k] = accel(t, u, k);
        }
        for (int k = 1; k <= ell; ++k) tmp[k] = u[k] + 0.5 * dt * k1u[k];
        for (int k = 1; k <= ell; ++k) {
            k2u[k] = v[k] + 0.5 * dt * k1v[k];
            k2v[k] = accel(t + 0.5 * dt, tmp, k);
        }
        for (int k = 1; k <= ell; ++k) tmp[k] = u[k] + 0.5 * dt * k2u[k];
        for (int k = 1; k <= ell; ++k) {
            k3u[k] = v[k] + 0.5 * dt * k2v[k];
            k3v[k] = accel(t + 0.5 * dt, tmp, k);
        }
        for (int k = 1; k <= ell; ++k) tmp[k] = u[k] + dt * k3u[k];
        for (int k = 1; k <= ell; ++k) {
            k4u[k] = v[k] + dt * k3v[k];
            k4v[k] = accel(t + dt, tmp, k);
        }
        for (int k = 1; k <= ell; ++k) {
            u[k] += dt / 6.0 * (k1u[k] + 2.0 * k2u[k] + 2.0 * k3u[k] + k4u[k]);
            v[k] += dt / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
        }
        t += dt;
    }

    // exact propagation past the support, level by level
    CascadeMode mode;
    mode.omega = omega;
    mode.levels.assign(ell + 1, ExpPoly{omega, {}, {}});
    for (int k = 1; k <= ell; ++k) {
        ExpPoly rep{omega, {}, {}};
        // particular response to the lower levels' forcing
        std::vector<cplx> fa, fb; // forcing polynomial on each exponential side
        for (int j = 2; j <= k; ++j) {
            if (b.at(j) == 0.0) continue;
            cplx coef = b[j] * std::pow(cplx(0, xi), j + 1);
            const ExpPoly& src = mode.levels[k + 1 - j];
            if (fa.size() < src.a.size()) fa.resize(src.a.size(), cplx(0));
            if (fb.size() < src.b.size()) fb.resize(src.b.size(), cplx(0));
            for (size_t q = 0; q < src.a.size(); ++q) fa[q] += coef * src.a[q];
            for (size_t q = 0; q < src.b.size(); ++q) fb[q] += coef * src.b[q];
        }
        if (!fa.empty()) rep.a = resonant_particular(fa, omega, +1);
        if (!fb.empty()) rep.b = resonant_particular(fb, omega, -1);
        // homogeneous part matches the RK4 state at t1
        cplx up = rep.eval(t1), vp = rep.eval_dt(t1);
        cplx du = u[k] - up, dv = v[k] - vp;
        cplx ep = std::exp(cplx(0, omega * t1));
        cplx a0 = 0.5 * (du + dv / cplx(0, omega)) / ep;
        cplx b0 = 0.5 * (du - dv / cplx(0, omega)) * ep;
        if (rep.a.empty()) rep.a.assign(1, cplx(0));
        if (rep.b.empty()) rep.b.assign(1, cplx(0));
        rep.a[0] += a0;
        rep.b[0] += b0;
        mode.levels[k] = rep;
    }
    return mode;
}

} // namespace detail

/// Naive cascade vs revamped solution at fixed t across the eps sweep: the
/// cascade gradient norm grows like (eps t)^{ell-1} in the eps direction,
/// the well-posed solution obeys the a priori law.
inline CascadeResult run_cascade_exhibit(const ExperimentConfig& cfg, double t_fix,
                                         CsvWriter* csv = nullptr) {
    const int ell = cfg.ell_list.front();
    CoefficientField field = cfg.field();
    SpectralCorrectors S = build_psi_b(field, std::max(ell, 3), CellGrid(cfg.grid_N));
    const int L = cfg.grid_L > 0 ? cfg.grid_L : 6;
    Impulse f = cfg.impulse(L);

    // exact post-support representation per mode, shared across the eps sweep
    std::vector<detail::CascadeMode> modes;
    for (int idx = 0; idx < f.mode_count(); ++idx)
        modes.push_back(detail::cascade_mode(S.b, ell, f.xi(idx), f.f1, f.c[idx]));

    CascadeResult res;
    for (double eps : cfg.eps_list) {
        double acc = 0;
        for (int idx = 0; idx < f.mode_count(); ++idx) {
            double xi = f.xi(idx);
            cplx total = 0;
            for (int k = 1; k <= ell; ++k)
                total += std::pow(eps, k - 1) * modes[idx].value(k, t_fix);
            acc += xi * xi * std::norm(total);
        }
        double cascade = std::sqrt(4.0 * L * acc);

        // well-posed contrast: regularized variant energy norm at the same time
        EffectiveSymbolSpec spec = make_effective_spec(S.b, ell, eps,
                                                       EffectiveVariant::Regularized,
                                                       field.lambda, f.R);
        ModeSolution sol = solve_effective(spec, f, {t_fix}, cfg.threads);
        double den = 0;
        for (const auto& m : sol.modes)
            den += std::norm(m.ut[0]) + m.xi * m.xi * std::norm(m.u[0]);
        double revamped = std::sqrt(4.0 * L * den);

        res.eps_list.push_back(eps);
        res.cascade_norm.push_back(cascade);
        res.revamped_norm.push_back(revamped);
        if (csv) csv->row(eps, t_fix, cascade, revamped);
    }
    std::vector<double> xs;
    for (double eps : res.eps_list) xs.push_back(eps * t_fix);
    res.fit_vs_eps_t = fit_loglog(xs, res.cascade_norm, 1e-12);
    return res;
}

// ---------------------------------------------------------------------------
// Crosscheck suite
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

inline CheckResult make_check(const std::string& name, double value, double threshold,
                              bool pass_if_below = true, const std::string& note = "") {
    CheckResult c;
    c.name = name;
    c.value = value;
    c.threshold = threshold;
    c.pass = pass_if_below ? (value <= threshold) : (value >= threshold);
    c.note = note;
    return c;
}

/// The cheap structural crosschecks (coefficient identities, symmetry,
/// Taylor-Bloch slopes, gamma bounds, dual-path agreement, Fredholm means).
inline std::vector<CheckResult> run_crosschecks(const ExperimentConfig& cfg) {
    std::vector<CheckResult> out;
    CoefficientField field = cfg.field();
    CellGrid grid(cfg.grid_N);

    SpectralCorrectors S = build_spectral(field, 6, grid);
    HyperbolicCorrectors H = build_phi_a(field, 6, grid);
    build_sigma_hyp(H);

    // even-order spectral coefficients vanish
    double even_max = 0;
    for (int n = 2; n <= 6; n += 2) even_max = std::max(even_max, std::abs(S.b[n] / S.b[1]));
    out.push_back(make_check("b_even_vanishing", even_max, 1e-9));

    // hyperbolic symmetry
    SymmetryReport sym = check_symmetry(H, 4, 2, 1.0); // evaluate, threshold below
    out.push_back(make_check("abar_symmetry", sym.max_residual, 1e-9));

    // spectral vs revamped coefficients
    CrosscheckReport cc = crosscheck_b(S.b, revamp_b(H, 5), 5);
    out.push_back(make_check("b_spectral_vs_revamped", cc.max_rel_diff, 1e-8));

    // Taylor-Bloch slopes; with all residuals at the numerical floor (e.g. a
    // homogeneous medium) the check degenerates to the floor bound itself
    auto taylor_check = [&](int order, double expect) {
        TaylorResidualReport r = taylor_residual(S, order, cfg.bloch_K);
        std::string name = "bloch_taylor_slope_ell" + std::to_string(order);
        if (r.fit.points_used < 2) {
            double worst = *std::max_element(r.residuals.begin(), r.residuals.end());
            return make_check(name, worst, 1e-10, true, "all residuals at floor");
        }
        return make_check(name, std::abs(r.fit.slope - expect), 0.3);
    };
    out.push_back(taylor_check(2, 4.0));
    out.push_back(taylor_check(4, 6.0));

    // gamma bound on sampled xi
    {
        std::mt19937_64 rng(cfg.impulse_seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        double worst = 0;
        for (int i = 0; i < 100; ++i) worst = std::max(worst, S.gamma(unif(rng)) - 1.0);
        out.push_back(make_check("gamma_leq_one", worst, 1e-12));
    }

    // Fredholm compatibility means recorded during the builds
    out.push_back(make_check("fredholm_compat_means",
                             std::max(S.stats.max_compat_ratio, H.stats.max_compat_ratio), 1e-9));

    // dual-path corrector agreement at sampled xi
    {
        std::mt19937_64 rng(cfg.impulse_seed + 1);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            double xi = unif(rng);
            if (std::abs(xi) < 0.05) xi = 0.1;
            SpectralAtXi X = build_spectral_at_xi(S, xi);
            worst = std::max(worst, dual_path_deviation(S, X));
        }
        out.push_back(make_check("dual_path_correctors", worst, 1e-9));
    }

    // variant equivalence slopes at ell = 3 (filter at the floor by design)
    {
        VariantCompareReport rep = variant_compare(
            S.b, field.lambda, 3, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 2.0, 6.0, 1.2,
            cfg.impulse_seed);
        double worst_slope = 1e300;
        for (size_t k = 1; k < rep.fits.size(); ++k)
            if (rep.fits[k].points_used >= 2) worst_slope = std::min(worst_slope, rep.fits[k].slope);
        if (worst_slope > 1e200)
            out.push_back(make_check("variant_equivalence_slope", 0.0, 1e-10, true,
                                     "all deviations at floor"));
        else
            out.push_back(make_check("variant_equivalence_slope", worst_slope, 3.0 - 0.3, false));
        double filter_dev = *std::max_element(rep.dist[0].begin(), rep.dist[0].end());
        out.push_back(make_check("variant_filter_identity_on_band", filter_dev, 1e-10));
    }

    // fine time stepper against the Floquet reference (reduced size)
    {
        LineDomain dom{6, 8, 32};
        Impulse f = cfg.impulse(dom.L);
        const double T = 2.0;
        FineTrajectory traj = integrate(field, dom, f, T, 7e-5, {T});
        BlochDuhamelResult ref =
            bloch_duhamel(S.a, grid, dom.eps(), f, traj.snapshots[0].t, cfg.bloch_modes,
                          cfg.bloch_K, cfg.threads);
        RealField u_ref, ut_ref;
        ref.field.evaluate(dom, u_ref, ut_ref);
        double diff = 0;
        for (int i = 0; i < dom.M(); ++i) {
            double d = traj.snapshots[0].u[i] - u_ref[i];
            diff += d * d;
        }
        diff = std::sqrt(diff * dom.dx());
        out.push_back(make_check("fine_vs_bloch_l2", diff, 1e-6));
    }

    // hyperbolic expansion convergence order (improved rate, ell <= 3)
    {
        ExperimentConfig sweep = cfg;
        sweep.ell_list = {3};
        sweep.eps_list = {1.0 / 8, 1.0 / 16, 1.0 / 32};
        sweep.t_list = {2.0};
        ConvergenceResult res = run_convergence(sweep, ExpansionKind::Hyperbolic);
        const SlopeFit& fit = res.slopes[3];
        if (fit.points_used < 2) {
            double worst = 0;
            for (const SweepCell& c : res.cells) worst = std::max(worst, c.err_energy);
            out.push_back(make_check("h_expansion_slope_ell3", worst, 1e-9, true,
                                     "errors at floor"));
        } else {
            out.push_back(make_check("h_expansion_slope_ell3", std::abs(fit.slope - 3.0), 0.3));
        }
    }
    return out;
}

} // namespace ltwave
