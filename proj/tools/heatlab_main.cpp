// heatlab: two-phase heat conduction laboratory.
// Subcommands: params, geometry-check, series, simulate,
// experiment {selfsim|stabilize|oscillate}.
// Exit codes: 0 ok, 1 parse, 2 infeasible, 3 budget, 4 non-convergence,
// 5 invalid spec, 6 experiment assertion failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heatlab/analytic.hpp"
#include "heatlab/config.hpp"
#include "heatlab/experiments.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/solver.hpp"

namespace fs = std::filesystem;
using namespace heatlab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    std::optional<double> tol;
};

config::Config load_config(const CommonArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) throw ParseError("cannot open config file '" + args.config_path + "'");
    auto cfg = config::Config::parse(in);
    if (args.tol) cfg.set("tol", std::to_string(*args.tol));
    return cfg;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

analytic::GaussianEnvelope read_envelope(config::Config& cfg, int N) {
    return analytic::GaussianEnvelope(cfg.get_double("lambda"), cfg.get_double("Lambda"), N);
}

// Field shared by simulate and the experiments: sigma_plus inside the
// domain, sigma_minus outside, optional explicit bounds.
geometry::ConductivityField read_field(config::Config& cfg, geometry::PhaseDomain domain) {
    double sp = cfg.get_double_or("sigma_plus", 1.0);
    double sm = cfg.get_double_or("sigma_minus", 1.0);
    return geometry::ConductivityField(sp, sm, std::move(domain), cfg.get_optional_double("m"),
                                       cfg.get_optional_double("M"));
}

// epsilon and delta are alternative parameterizations tied by the window
// equation: give one, the other is derived.
analytic::OscillationParams build_params(int N, double alpha, double beta,
                                         const analytic::GaussianEnvelope& env, double R,
                                         std::optional<double> eps, std::optional<double> delta) {
    if (eps && delta)
        throw ParseError("give epsilon or delta, not both; they determine each other");
    if (delta) return analytic::OscillationParams::from_delta(N, alpha, beta, env, R, *delta);
    return analytic::OscillationParams::derive(N, alpha, beta, env, R, eps);
}

int cmd_params(const CommonArgs& args) {
    auto cfg = load_config(args);
    int N = cfg.get_int_or("N", 2);
    double alpha = cfg.get_double("alpha");
    double beta = cfg.get_double("beta");
    double R = cfg.get_double("R");
    auto env = read_envelope(cfg, N);
    auto eps_in = cfg.get_optional_double("epsilon");
    auto delta_in = cfg.get_optional_double("delta");
    cfg.get_optional_double("tol"); // accepted for flag symmetry; params has no tolerance
    cfg.reject_unconsumed();

    auto params = build_params(N, alpha, beta, env, R, eps_in, delta_in);
    double eps = params.epsilon;
    double delta = params.delta;
    auto bounds = analytic::oscillation_bounds(params);

    std::cout << "N              = " << N << "\n"
              << "alpha          = " << fmt(alpha) << "\n"
              << "beta           = " << fmt(beta) << "\n"
              << "lambda         = " << fmt(env.lambda) << "\n"
              << "Lambda         = " << fmt(env.Lambda) << "\n"
              << "epsilon        = " << fmt(eps) << "\n"
              << "delta          = " << fmt(delta) << "\n"
              << "R              = " << fmt(R) << "\n"
              << "key_inequality = " << (params.key_inequality ? "yes" : "no") << "\n"
              << "floor          = " << fmt(bounds.floor) << "\n"
              << "limsup_lower   = " << fmt(bounds.limsup_lower) << "\n"
              << "liminf_upper   = " << fmt(bounds.liminf_upper) << "\n"
              << "ceiling        = " << fmt(bounds.ceiling) << "\n"
              << "gap_certified  = " << (bounds.gap_certified ? "yes" : "no") << "\n";
    std::cout << "csv,N,alpha,beta,lambda,Lambda,epsilon,delta,R,floor,limsup_lower,liminf_upper,"
                 "ceiling,gap_certified\n";
    std::cout << "csv," << N << ',' << fmt(alpha) << ',' << fmt(beta) << ',' << fmt(env.lambda)
              << ',' << fmt(env.Lambda) << ',' << fmt(eps) << ',' << fmt(delta) << ',' << fmt(R)
              << ',' << fmt(bounds.floor) << ',' << fmt(bounds.limsup_lower) << ','
              << fmt(bounds.liminf_upper) << ',' << fmt(bounds.ceiling) << ','
              << (bounds.gap_certified ? 1 : 0) << "\n";
    return bounds.gap_certified ? 0 : 2;
}

int cmd_geometry_check(const CommonArgs& args) {
    auto cfg = load_config(args);
    auto spec = config::DomainSpec::from_config(cfg);
    bool pass = true;

    if (spec.kind == "cone") {
        geometry::RegionSet base(spec.arcs);
        geometry::ConeDomain cone(base);
        std::cout << "kind = cone\narc measure = " << fmt(geometry::arc_measure(base)) << "\n";
        if (auto p = cfg.get_optional_double("p")) {
            bool star = geometry::is_starshaped(base, geometry::Direction(*p));
            std::cout << "starshaped w.r.t. p = " << (star ? "yes" : "no") << "\n";
            if (star) {
                auto samples = geometry::disk_samples(20000, 20.0);
                bool incl = geometry::translate_inclusion_check(cone, geometry::Direction(*p), 1.0,
                                                                samples);
                std::cout << "translate inclusion (s=1) = " << (incl ? "pass" : "fail") << "\n";
                pass = incl;
            } else {
                pass = false;
            }
        }
    } else if (spec.kind == "sandwich") {
        auto sw = spec.build_sandwich();
        std::size_t samples = static_cast<std::size_t>(cfg.get_int_or("check_samples", 100000));
        double cap = cfg.get_double_or("radius_cap", 50.0 * sw.offset);
        auto report = geometry::sandwich_check(sw, samples, cap);
        std::cout << "kind = sandwich\nsandwich check = " << (report.pass ? "pass" : "fail")
                  << "\n";
        for (const auto& w : report.witnesses)
            std::cout << "witness = " << fmt(w.x) << ',' << fmt(w.y) << "\n";
        pass = report.pass;
    } else if (spec.kind == "oscillatory") {
        auto osc = spec.build_oscillatory();
        std::cout << "kind = oscillatory\nalpha = " << fmt(osc.inner.measure())
                  << "\nbeta = " << fmt(osc.outer.measure()) << "\n";
        if (osc.truncated_unbounded())
            std::cout << "warning: unbounded shell family truncated at "
                      << osc.effective_shells() << " shells (radii overflow)\n";
        int show = std::min(8, osc.effective_shells());
        for (int n = 1; n <= show; ++n)
            std::cout << "r_" << n << " = " << fmt(geometry::shell_radius(osc, n)) << "\n";
    } else {
        spec.build();
        std::cout << "kind = " << spec.kind << "\n";
    }
    cfg.get_optional_double("tol");
    cfg.reject_unconsumed();
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 5;
}

int cmd_series(const CommonArgs& args) {
    auto cfg = load_config(args);
    int N = cfg.get_int_or("N", 2);
    double alpha, beta;
    geometry::ArcRegion A(geometry::Direction(0.0), 0.1), B = A;
    if (cfg.has("arcs")) {
        auto arcs = config::parse_arcs(cfg.get_string("arcs"));
        if (arcs.size() != 2) throw ParseError("series needs arcs = [A];[B]");
        A = arcs[0];
        B = arcs[1];
        alpha = A.measure();
        beta = B.measure();
    } else {
        alpha = cfg.get_double("alpha");
        beta = cfg.get_double("beta");
        A = geometry::ArcRegion(geometry::Direction(0.0), alpha / 2);
        B = geometry::ArcRegion(geometry::Direction(0.0), beta / 2);
    }
    double R = cfg.get_double("R");
    double sigma = cfg.get_double_or("sigma", 1.0);
    auto times = cfg.get_list("times");
    std::optional<int> n_max = cfg.has("n_max")
                                   ? std::optional<int>(cfg.get_int("n_max"))
                                   : std::optional<int>(geometry::OscillatoryDomainSpec::default_cap);

    std::optional<analytic::OscillationParams> params;
    double delta;
    if (cfg.has("lambda") || cfg.has("Lambda")) {
        auto env = read_envelope(cfg, N);
        params = build_params(N, alpha, beta, env, R, cfg.get_optional_double("epsilon"),
                              cfg.get_optional_double("delta"));
        delta = params->delta;
    } else {
        if (auto d = cfg.get_optional_double("delta")) {
            delta = *d;
        } else {
            auto eps = cfg.get_double("epsilon");
            auto solved = analytic::solve_delta(N, eps, R);
            if (!solved) throw Infeasible("no delta in (0,1) satisfies the window equation");
            delta = *solved;
        }
    }
    cfg.get_optional_double("tol");
    cfg.reject_unconsumed();

    geometry::OscillatoryDomainSpec spec(A, B, delta, R, n_max);
    std::cout << "t,u_series" << (params ? ",lambda_series,Lambda_series" : "") << "\n";
    for (double t : times) {
        std::cout << fmt(t) << ',' << fmt(analytic::series_u0_constant_sigma(spec, sigma, t));
        if (params) {
            auto [lo, hi] = analytic::series_bounds_at(*params, t);
            std::cout << ',' << fmt(lo) << ',' << fmt(hi);
        }
        std::cout << "\n";
    }
    return 0;
}

void write_meta(const fs::path& path, const solver::GridSpec& grid,
                const solver::RunOptions& opts, const solver::RunStats& stats, int threads) {
    std::ofstream meta(path);
    meta << "grid_L = " << fmt(grid.half_extent) << "\n"
         << "grid_h = " << fmt(grid.spacing) << "\n"
         << "cells_per_side = " << grid.cells_per_side() << "\n"
         << "theta = " << fmt(opts.step.theta) << "\n"
         << "rate = " << fmt(opts.rate) << "\n"
         << "cg_tol = " << fmt(opts.step.cg_tol) << "\n"
         << "budget_tol = " << fmt(opts.budget_tol) << "\n"
         << "truncation_budget = " << fmt(stats.budget) << "\n"
         << "steps = " << stats.steps << "\n"
         << "cg_iterations = " << stats.cg_iterations << "\n"
         << "min_u = " << fmt(stats.min_u) << "\n"
         << "max_u = " << fmt(stats.max_u) << "\n"
         << "mass_drift = " << fmt(stats.max_mass_drift) << "\n"
         << "threads = " << threads << "\n"
         << "determinism = byte-identical CSV for a fixed thread count\n";
}

int cmd_simulate(const CommonArgs& args) {
    auto cfg = load_config(args);
    auto dspec = config::DomainSpec::from_config(cfg);
    auto domain = dspec.build();
    auto field = read_field(cfg, domain);
    auto grid = config::parse_grid(cfg);
    auto opts = config::parse_run_options(cfg);
    double t_end = cfg.get_double("t_end");
    auto sample_times = cfg.get_list("sample_times");
    std::vector<geometry::Point2> probes = {{0.0, 0.0}};
    if (cfg.has("probes")) probes = config::parse_points(cfg.get_string("probes"));
    cfg.reject_unconsumed();

    auto res = solver::run(domain, field, grid, t_end, probes, sample_times, opts);

    fs::create_directories(args.out_dir);
    std::ofstream csv(fs::path(args.out_dir) / "series.csv");
    res.series.write_csv(csv);
    write_meta(fs::path(args.out_dir) / "meta.txt", grid, opts, res.stats, args.threads);
    std::cout << "wrote " << (fs::path(args.out_dir) / "series.csv").string() << "\n";
    return 0;
}

int cmd_experiment(const CommonArgs& args, const std::string& study) {
    auto cfg = load_config(args);
    fs::create_directories(args.out_dir);
    auto opts = config::parse_run_options(cfg);
    int threads = args.threads;

    if (study == "selfsim") {
        auto arcs = config::parse_arcs(cfg.get_string("arcs"));
        auto cone = geometry::PhaseDomain::from_cone(geometry::ConeDomain(geometry::RegionSet(arcs)));
        auto field = read_field(cfg, cone);
        auto grid = config::parse_grid(cfg);
        std::vector<double> ks = cfg.has("ks") ? cfg.get_list("ks") : std::vector<double>{2.0};
        double dev_tol = cfg.get_double_or("deviation_tol", 0.02);
        cfg.reject_unconsumed();
        auto report = experiments::selfsimilarity_study(cone, field, ks, grid, dev_tol, opts,
                                                        threads);
        std::ofstream txt(fs::path(args.out_dir) / "selfsim_report.txt");
        txt << "self-similarity study\n";
        std::ofstream csv(fs::path(args.out_dir) / "selfsim_trajectory.csv");
        csv << "k,u_base,u_rescaled,deviation\n";
        for (const auto& row : report.rows) {
            csv << fmt(row.k) << ',' << fmt(row.base_value) << ',' << fmt(row.rescaled_value)
                << ',' << fmt(row.deviation) << "\n";
            txt << "k = " << fmt(row.k) << ": deviation " << fmt(row.deviation) << "\n";
        }
        std::ofstream sum(fs::path(args.out_dir) / "selfsim_summary.csv");
        experiments::write_assertions(sum, "selfsim", report.assertions);
        txt << (all_pass(report.assertions) ? "PASS" : "FAIL") << "\n";
        return all_pass(report.assertions) ? 0 : 6;
    }

    if (study == "stabilize") {
        auto dspec = config::DomainSpec::from_config(cfg);
        if (dspec.kind != "sandwich") throw InvalidSpec("stabilize expects kind = sandwich");
        auto sw = dspec.build_sandwich();
        double sp = cfg.get_double_or("sigma_plus", 1.0);
        double sm = cfg.get_double_or("sigma_minus", 1.0);
        auto grid = config::parse_grid(cfg);
        double t_end = cfg.get_double("t_end");
        double gap_tol = cfg.get_double_or("gap_tol", 0.02);
        int check_samples = cfg.get_int_or("check_samples", 100000);
        cfg.reject_unconsumed();
        auto report = experiments::stabilization_study(sw, sp, sm, grid, t_end, gap_tol, opts,
                                                       threads,
                                                       static_cast<std::size_t>(check_samples));
        std::ofstream csv(fs::path(args.out_dir) / "stabilize_trajectory.csv");
        experiments::write_trajectory_csv(csv, report.times, report.trajectory);
        std::ofstream txt(fs::path(args.out_dir) / "stabilize_report.txt");
        txt << "stabilization study\ncone value u_A(0,1) = " << fmt(report.cone_value)
            << "\nterminal gap = " << fmt(report.terminal_gap)
            << "\ntruncation budget = " << fmt(report.truncation_budget) << "\n";
        txt << "holder moduli (mid run):";
        for (auto [r, m] : report.holder_mid) txt << ' ' << fmt(r) << ':' << fmt(m);
        txt << "\nholder moduli (end of run):";
        for (auto [r, m] : report.holder_end) txt << ' ' << fmt(r) << ':' << fmt(m);
        txt << "\n" << (all_pass(report.assertions) ? "PASS" : "FAIL") << "\n";
        std::ofstream sum(fs::path(args.out_dir) / "stabilize_summary.csv");
        experiments::write_assertions(sum, "stabilize", report.assertions);
        return all_pass(report.assertions) ? 0 : 6;
    }

    if (study == "oscillate") {
        auto dspec = config::DomainSpec::from_config(cfg);
        if (dspec.kind != "oscillatory") throw InvalidSpec("oscillate expects kind = oscillatory");
        int N = 2;
        auto env = read_envelope(cfg, N);
        double alpha = dspec.arcs[0].measure();
        double beta = dspec.arcs[1].measure();
        std::optional<double> delta_in;
        if (dspec.delta > 0.0) delta_in = dspec.delta;
        auto params = build_params(N, alpha, beta, env, dspec.R,
                                   cfg.get_optional_double("epsilon"), delta_in);
        dspec.delta = params.delta;
        auto osc = dspec.build_oscillatory();
        auto domain = geometry::PhaseDomain::from_oscillatory(osc);
        auto field = read_field(cfg, domain);
        auto grid = config::parse_grid(cfg);
        int n_probes = cfg.get_int_or("n_probes", 2);
        double oracle_rtol = cfg.get_double_or("oracle_rtol", 0.03);
        bool scale = cfg.get_int_or("scale_into_budget", 1) != 0;
        cfg.reject_unconsumed();

        auto report = experiments::oscillation_study(osc, field, params, n_probes, grid,
                                                     oracle_rtol, scale, opts);
        std::ofstream csv(fs::path(args.out_dir) / "oscillate_trajectory.csv");
        csv << "label,t_requested,t_sampled,scaled,u,oracle\n";
        for (const auto& s : report.samples) {
            csv << s.label << ',' << fmt(s.requested) << ',' << fmt(s.time) << ','
                << (s.scaled ? 1 : 0) << ',' << fmt(s.value) << ','
                << (s.oracle ? fmt(*s.oracle) : "") << "\n";
        }
        std::ofstream txt(fs::path(args.out_dir) / "oscillate_report.txt");
        txt << "oscillation study\n"
            << "floor = " << fmt(report.bounds.floor)
            << "\nlimsup_lower = " << fmt(report.bounds.limsup_lower)
            << "\nliminf_upper = " << fmt(report.bounds.liminf_upper)
            << "\nceiling = " << fmt(report.bounds.ceiling)
            << "\ngap_certified = " << (report.bounds.gap_certified ? "yes" : "no")
            << "\nobserved min = " << fmt(report.observed_min)
            << "\nobserved max = " << fmt(report.observed_max) << "\n"
            << (all_pass(report.assertions) ? "PASS" : "FAIL") << "\n";
        std::ofstream sum(fs::path(args.out_dir) / "oscillate_summary.csv");
        experiments::write_assertions(sum, "oscillate", report.assertions);
        return all_pass(report.assertions) ? 0 : 6;
    }

    throw ParseError("unknown study '" + study + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatlab: a laboratory for two-phase heat conduction"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string study;
    auto add_common = [&](CLI::App* sub, bool config_required = true) {
        auto* opt = sub->add_option("--config", args.config_path, "plain-text key=value config");
        if (config_required) opt->required();
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--threads", args.threads, "worker cap for independent runs");
        sub->add_option("--tol", args.tol, "overrides the config key 'tol'");
    };

    auto* params = app.add_subcommand("params", "derive (epsilon, delta) and the bound report");
    add_common(params);
    auto* geo = app.add_subcommand("geometry-check", "validate a domain spec");
    add_common(geo);
    auto* series = app.add_subcommand("series", "evaluate the origin series and envelope bounds");
    add_common(series);
    auto* sim = app.add_subcommand("simulate", "finite-volume run with CSV output");
    add_common(sim);
    auto* exp = app.add_subcommand("experiment", "run a study: selfsim | stabilize | oscillate");
    exp->add_option("study", study, "selfsim | stabilize | oscillate")->required();
    add_common(exp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (params->parsed()) return cmd_params(args);
        if (geo->parsed()) return cmd_geometry_check(args);
        if (series->parsed()) return cmd_series(args);
        if (sim->parsed()) return cmd_simulate(args);
        if (exp->parsed()) return cmd_experiment(args, study);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 4;
    } catch (const InvalidSpec& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return 5;
    }
    return 1;
}
