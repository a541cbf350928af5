// Command-line front end: corrector builds, Bloch diagnostics, reference
// solvers, two-scale expansions, and the experiment sweeps. Configuration
// comes from a key=value file; a few knobs can be overridden per subcommand.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "ltwave/harness.hpp"
#include "ltwave/io.hpp"

using namespace ltwave;

namespace {

ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    return load_config(path);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_correctors(const ExperimentConfig& cfg, bool hyperbolic, int ell) {
    CoefficientField field = cfg.field();
    CellGrid grid(cfg.grid_N);
    if (hyperbolic) {
        HyperbolicCorrectors H = build_phi_a(field, ell, grid);
        build_sigma_hyp(H);
        std::string path = out_path(cfg, "correctors_hyperbolic.json");
        write_json(to_json(H), path);
        std::printf("wrote %s (order %d, N = %d, abar[1][0] = %.12g)\n", path.c_str(), ell,
                    grid.N, H.abar[1][0]);
    } else {
        SpectralCorrectors S = build_spectral(field, ell, grid);
        std::string path = out_path(cfg, "correctors_spectral.json");
        write_json(to_json(S), path);
        std::printf("wrote %s (ell %d, N = %d, b[1] = %.12g, max compat %.3e)\n", path.c_str(),
                    ell, grid.N, S.b[1], S.stats.max_compat_ratio);
    }
    return 0;
}

int cmd_bloch(const ExperimentConfig& cfg) {
    CoefficientField field = cfg.field();
    CellGrid grid(cfg.grid_N);
    SpectralCorrectors S = build_psi_b(field, 6, grid);
    CsvWriter csv(out_path(cfg, "bloch.csv"),
                  "xi,lambda,gap,taylor_residual_ell2,taylor_residual_ell4", cfg.hash());
    for (double xi = 1e-3; xi <= 1e-1 * (1 + 1e-12); xi *= std::pow(100.0, 1.0 / 24)) {
        FiberedOperator op = assemble(S.a, grid, xi, cfg.bloch_K);
        BlochEigensystem sys = eigensystem(op, 2);
        long double lam = refine_ground_lambda(op, sys.modes[0].coeffs);
        double r2 = std::abs((double)(lam - S.lambda_taylor(xi, 2)));
        double r4 = std::abs((double)(lam - S.lambda_taylor(xi, 4)));
        csv.row(xi, (double)lam, sys.gap(), r2, r4);
    }
    std::printf("wrote %s\n", out_path(cfg, "bloch.csv").c_str());
    return 0;
}

int cmd_solve_fine(const ExperimentConfig& cfg, double eps, double T,
                   const std::vector<double>& snapshots) {
    CoefficientField field = cfg.field();
    const int K = static_cast<int>(std::lround(1.0 / eps));
    if (std::abs(K * eps - 1.0) > 1e-12)
        throw NonCommensurate("solve-fine: eps must be the reciprocal of an integer");
    LineDomain dom{cfg.auto_L(T), K, cfg.grid_ppc};
    Impulse f = cfg.impulse(dom.L);
    double dt = cfg.grid_dt > 0 ? cfg.grid_dt
                                : 0.2 * dom.dx() / std::sqrt(field.upper) * 0.5;
    std::vector<double> snaps = snapshots.empty() ? std::vector<double>{T} : snapshots;
    FineTrajectory traj = integrate(field, dom, f, T, dt, snaps);
    write_snapshots(traj, out_path(cfg, "fine_snapshots.bin"));
    CsvWriter csv(out_path(cfg, "fine_energy.csv"), "t,energy,invariant", cfg.hash());
    for (const EnergySample& es : traj.energy_log) csv.row(es.t, es.physical, es.invariant);
    AprioriReport rep = apriori_check(traj, field, f);
    std::printf("wrote %s and %s; apriori max ||Du||/||f|| = %.4g (bounded: %s)\n",
                out_path(cfg, "fine_snapshots.bin").c_str(),
                out_path(cfg, "fine_energy.csv").c_str(), rep.max_energy_ratio,
                rep.bounded ? "yes" : "no");
    return 0;
}

int cmd_solve_effective(const ExperimentConfig& cfg, const std::string& variant, int ell,
                        double eps) {
    ExperimentConfig c = cfg;
    c.variant = variant;
    CoefficientField field = c.field();
    SpectralCorrectors S = build_psi_b(field, std::max(ell, 3), CellGrid(c.grid_N));
    const double t_max = *std::max_element(c.t_list.begin(), c.t_list.end());
    Impulse f = c.impulse(c.auto_L(t_max));
    EffectiveSymbolSpec spec =
        make_effective_spec(S.b, ell, eps, c.variant_enum(), field.lambda, f.R);
    ModeSolution sol = solve_effective(spec, f, c.t_list, c.threads);
    CsvWriter csv(out_path(c, "effective.csv"), "t,xi,re_u,im_u,re_dtu,im_dtu", c.hash());
    for (size_t ti = 0; ti < c.t_list.size(); ++ti)
        for (const EffectiveMode& m : sol.modes)
            csv.row(c.t_list[ti], m.xi, m.u[ti].real(), m.u[ti].imag(), m.ut[ti].real(),
                    m.ut[ti].imag());
    std::printf("wrote %s\n", out_path(c, "effective.csv").c_str());
    return 0;
}

int cmd_expand(const ExperimentConfig& cfg, const std::string& kind, int ell, double eps,
               double t) {
    CoefficientField field = cfg.field();
    CellGrid grid(cfg.grid_N);
    const int K = static_cast<int>(std::lround(1.0 / eps));
    if (std::abs(K * eps - 1.0) > 1e-12)
        throw NonCommensurate("expand: eps must be the reciprocal of an integer");
    ExpansionLab lab(field, ell, grid, cfg.bloch_K, cfg.bloch_modes, cfg.threads);
    LineDomain dom{cfg.auto_L(t), K, cfg.grid_ppc};
    Impulse f = cfg.impulse(dom.L);

    BlochDuhamelResult ref = lab.reference(eps, f, t);
    TwoScaleField approx;
    if (kind == "spectral") {
        EffectiveSymbolSpec spec =
            make_effective_spec(lab.S.b, ell, eps, cfg.variant_enum(), field.lambda, f.R);
        ModeSolution sol = solve_effective(spec, f, {t}, cfg.threads);
        approx = assemble_S(lab.S, sol, f, eps, ell, 0);
    } else if (kind == "hyperbolic") {
        EffectiveSymbolSpec spec = make_effective_spec(lab.revamped_b, ell, eps,
                                                       cfg.variant_enum(), field.lambda, f.R);
        spec.geometric = true;
        spec.cbar = lab.revamped_c;
        ModeSolution sol = solve_effective(spec, f, {t}, cfg.threads);
        approx = assemble_H(lab.H, sol, f.L, eps, ell, 0);
    } else {
        throw std::invalid_argument("expand: kind must be spectral or hyperbolic");
    }

    RealField u_ref, ut_ref, u_app, ut_app;
    ref.field.evaluate(dom, u_ref, ut_ref);
    approx.evaluate(dom, u_app, ut_app);
    CsvWriter csv(out_path(cfg, "expand.csv"), "x,u_fine,approx,diff", cfg.hash());
    for (int i = 0; i < dom.M(); ++i)
        csv.row(dom.node(i), u_ref[i], u_app[i], u_ref[i] - u_app[i]);
    ErrorNorms errs = error_norms(ref.field, approx);
    CsvWriter sum(out_path(cfg, "expand_summary.csv"), "t,errL2,errEnergy", cfg.hash());
    sum.row(t, errs.l2, errs.energy);
    std::printf("wrote %s; t = %g errL2 = %.6e errEnergy = %.6e\n",
                out_path(cfg, "expand.csv").c_str(), t, errs.l2, errs.energy);
    return 0;
}

// rows of a previous run with a matching config hash, for resumable sweeps
std::vector<SweepCell> read_converge_cells(const std::string& path, const std::string& hash) {
    std::vector<SweepCell> cells;
    std::ifstream in(path);
    if (!in) return cells;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        if (cols.size() != 6 || cols[5] != hash) continue;
        SweepCell c;
        c.eps = std::stod(cols[0]);
        c.ell = std::stoi(cols[1]);
        c.t = std::stod(cols[2]);
        c.err_l2 = std::stod(cols[3]);
        c.err_energy = std::stod(cols[4]);
        cells.push_back(c);
    }
    return cells;
}

int cmd_converge(const ExperimentConfig& cfg, const std::string& kind) {
    std::vector<SweepCell> known = read_converge_cells(out_path(cfg, "converge.csv"), cfg.hash());
    if (!known.empty())
        std::printf("resuming: %zu cells reused from converge.csv\n", known.size());
    CsvWriter csv(out_path(cfg, "converge.csv"), "eps,ell,t,errL2,errEnergy", cfg.hash());
    ExpansionKind k = kind == "hyperbolic" ? ExpansionKind::Hyperbolic : ExpansionKind::Spectral;
    ConvergenceResult res = run_convergence(cfg, k, &csv, known.empty() ? nullptr : &known);
    bool ok = true;
    for (auto& [ell, fit] : res.slopes) {
        std::printf("ell = %d: energy-error slope %.3f (%d points)\n", ell, fit.slope,
                    fit.points_used);
        if (std::abs(fit.slope - ell) > 0.3) ok = false;
    }
    std::printf("wrote %s\n", out_path(cfg, "converge.csv").c_str());
    return ok ? 0 : 1;
}

int cmd_growth(const ExperimentConfig& cfg) {
    CsvWriter csv(out_path(cfg, "growth.csv"), "t,eps,ell,errL2,errEnergy", cfg.hash());
    TimeGrowthResult res = run_time_growth(cfg, &csv);
    std::printf("growth exponent %.3f over %d points\n", res.exponent.slope,
                res.exponent.points_used);
    CsvWriter csv2(out_path(cfg, "growth_cascade.csv"), "eps,t,cascade_norm,revamped_norm",
                   cfg.hash());
    const double t_fix = *std::max_element(cfg.t_list.begin(), cfg.t_list.end());
    CascadeResult cas = run_cascade_exhibit(cfg, t_fix, &csv2);
    std::printf("cascade vs (eps t) slope %.3f; wrote %s, %s\n", cas.fit_vs_eps_t.slope,
                out_path(cfg, "growth.csv").c_str(), out_path(cfg, "growth_cascade.csv").c_str());
    return res.exponent.slope <= 1.2 ? 0 : 1;
}

int cmd_summability(const ExperimentConfig& cfg) {
    CsvWriter csv(out_path(cfg, "summability.csv"), "ell,eps,sup_err", cfg.hash());
    SummabilityResult res = run_summability(cfg, &csv);
    for (auto& [ell, err] : res.sup_err) std::printf("ell = %d: sup err %.6e\n", ell, err);
    std::printf("monotone halving: %s; wrote %s\n", res.monotone ? "yes" : "no",
                out_path(cfg, "summability.csv").c_str());
    return res.monotone ? 0 : 1;
}

int cmd_crosscheck(const ExperimentConfig& cfg) {
    std::vector<CheckResult> checks = run_crosschecks(cfg);
    CsvWriter csv(out_path(cfg, "crosscheck.csv"), "name,value,threshold,pass", cfg.hash());
    bool all = true;
    for (const CheckResult& c : checks) {
        std::printf("[%s] %-32s value %.4e threshold %.4e %s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.threshold, c.note.c_str());
        csv.row(c.name, c.value, c.threshold, c.pass ? 1 : 0);
        all = all && c.pass;
    }
    std::printf("wrote %s\n", out_path(cfg, "crosscheck.csv").c_str());
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-time homogenization of the 1d periodic wave equation"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file")
        ->check(CLI::ExistingFile);

    // correctors
    auto* sc_corr = app.add_subcommand("correctors", "build and serialize corrector hierarchies");
    bool hyperbolic = false;
    int corr_ell = 6;
    sc_corr->add_flag("--hyperbolic", hyperbolic, "build the hyperbolic hierarchy");
    sc_corr->add_option("--ell", corr_ell, "hierarchy order");

    auto* sc_bloch = app.add_subcommand("bloch", "Bloch eigenvalues and Taylor residuals");

    auto* sc_fine = app.add_subcommand("solve-fine", "heterogeneous reference solver");
    double fine_eps = 1.0 / 16, fine_T = 4.0;
    std::string fine_snaps;
    sc_fine->add_option("--eps", fine_eps, "microscale (reciprocal integer)")->required();
    sc_fine->add_option("--T", fine_T, "final time")->required();
    sc_fine->add_option("--snapshots", fine_snaps, "comma-separated snapshot times");

    auto* sc_eff = app.add_subcommand("solve-effective", "dispersive effective solver");
    std::string eff_variant = "base";
    int eff_ell = 3;
    double eff_eps = 1.0 / 16;
    sc_eff->add_option("--variant", eff_variant, "base|filter|reg|bsq");
    sc_eff->add_option("--ell", eff_ell, "truncation order")->required();
    sc_eff->add_option("--eps", eff_eps, "microscale")->required();

    auto* sc_exp = app.add_subcommand("expand", "two-scale expansion vs reference");
    std::string exp_kind = "spectral";
    int exp_ell = 2;
    double exp_eps = 1.0 / 16, exp_t = 2.0;
    sc_exp->add_option("--kind", exp_kind, "spectral|hyperbolic");
    sc_exp->add_option("--ell", exp_ell, "expansion order")->required();
    sc_exp->add_option("--eps", exp_eps, "microscale (reciprocal integer)")->required();
    sc_exp->add_option("--t", exp_t, "evaluation time")->required();

    auto* sc_conv = app.add_subcommand("converge", "error vs eps sweep");
    std::string conv_kind = "spectral";
    sc_conv->add_option("--kind", conv_kind, "spectral|hyperbolic");

    auto* sc_growth = app.add_subcommand("growth", "error vs t plus the cascade exhibit");
    auto* sc_summ = app.add_subcommand("summability", "error vs ell at fixed eps");
    auto* sc_cross = app.add_subcommand("crosscheck", "structural identity suite");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_or_default(config_path);
        if (sc_corr->parsed()) return cmd_correctors(cfg, hyperbolic, corr_ell);
        if (sc_bloch->parsed()) return cmd_bloch(cfg);
        if (sc_fine->parsed()) {
            std::vector<double> snaps;
            std::stringstream ss(fine_snaps);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) snaps.push_back(std::stod(tok));
            return cmd_solve_fine(cfg, fine_eps, fine_T, snaps);
        }
        if (sc_eff->parsed()) return cmd_solve_effective(cfg, eff_variant, eff_ell, eff_eps);
        if (sc_exp->parsed()) return cmd_expand(cfg, exp_kind, exp_ell, exp_eps, exp_t);
        if (sc_conv->parsed()) return cmd_converge(cfg, conv_kind);
        if (sc_growth->parsed()) return cmd_growth(cfg);
        if (sc_summ->parsed()) return cmd_summability(cfg);
        if (sc_cross->parsed()) return cmd_crosscheck(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
