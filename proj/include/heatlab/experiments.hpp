#pragma once

// The three headline studies: self-similarity of cone solutions,
// stabilization of sandwich domains toward the cone value, and oscillation
// on shell domains. Each pairs solver output with its analytic certificate
// and collects named pass/fail assertions for scripting.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/analytic.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/solver.hpp"

namespace heatlab::experiments {

using geometry::ConductivityField;
using geometry::PhaseDomain;
using geometry::Point2;

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
};

inline bool all_pass(const std::vector<Assertion>& as) {
    for (const auto& a : as)
        if (!a.pass) return false;
    return true;
}

// Run independent jobs, fanning out when more than one worker is allowed.
// Results are assembled in job order, so the output is thread-count
// independent.
template <typename Job>
inline void fan_out(std::vector<Job>& jobs, int threads) {
    if (threads <= 1 || jobs.size() <= 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::vector<std::future<void>> fs;
    fs.reserve(jobs.size());
    for (auto& j : jobs) fs.push_back(std::async(std::launch::async, [&j] { j(); }));
    for (auto& f : fs) f.get();
}

// ---------------------------------------------------------------------------
// Self-similarity: u^k(0,1) vs u(0,1) on a cone, matched relative resolution.

struct SelfSimRow {
    double k = 1.0;
    double base_value = 0.0;
    double rescaled_value = 0.0;
    double deviation = 0.0;
};

struct SelfSimReport {
    std::vector<SelfSimRow> rows;
    std::vector<solver::RunStats> run_stats;
    std::vector<Assertion> assertions;
};

// [OP] selfsimilarity_study
inline SelfSimReport selfsimilarity_study(const PhaseDomain& cone, const ConductivityField& field,
                                          const std::vector<double>& ks,
                                          const solver::GridSpec& grid, double deviation_tol,
                                          solver::RunOptions opts = {}, int threads = 1) {
    if (cone.kind != geometry::DomainKind::cone)
        throw InvalidSpec("self-similarity study requires a cone domain");
    auto base_res = solver::run(cone, field, grid, 1.0, {{0.0, 0.0}}, {1.0}, opts);
    const double base = base_res.series.values.back().front();

    SelfSimReport report;
    report.rows.resize(ks.size());
    report.run_stats.resize(ks.size() + 1);
    report.run_stats[0] = base_res.stats;
    std::vector<std::function<void()>> jobs;
    for (std::size_t idx = 0; idx < ks.size(); ++idx) {
        jobs.emplace_back([&, idx] {
            double k = ks[idx];
            double val = base;
            if (k != 1.0) {
                auto res = solver::rescaled_run_full(cone, field, grid, k, 1.0, opts);
                val = res.series.values.back().front();
                report.run_stats[idx + 1] = res.stats;
            } else {
                report.run_stats[idx + 1] = base_res.stats;
            }
            report.rows[idx] = {k, base, val, std::abs(val - base)};
        });
    }
    fan_out(jobs, threads);
    for (const auto& row : report.rows)
        report.assertions.push_back({"deviation(k=" + std::to_string(row.k) + ") <= tol",
                                     row.deviation <= deviation_tol, row.deviation,
                                     deviation_tol});
    return report;
}

// ---------------------------------------------------------------------------
// Stabilization: sandwich trajectory against the cone run's origin value.

struct StabilizationReport {
    double cone_value = 0.0;
    std::vector<double> times;
    std::vector<double> trajectory; // u(0, t_j)
    std::vector<double> gaps;       // |u(0,t_j) - cone_value|
    double terminal_gap = 0.0;
    double truncation_budget = 0.0;
    // measured modulus sup |u(x)-u(0)| on rings, at the last two times
    std::vector<std::pair<double, double>> holder_mid;
    std::vector<std::pair<double, double>> holder_end;
    std::vector<solver::RunStats> run_stats;
    std::vector<Assertion> assertions;
};

// [OP] stabilization_study: geometric schedule t_j = t0 2^j with t0 = h^2,
// cone value from a run at t = 1.
inline StabilizationReport stabilization_study(const geometry::SandwichSpec& spec,
                                               double sigma_plus, double sigma_minus,
                                               const solver::GridSpec& grid, double t_end,
                                               double gap_tol, solver::RunOptions opts = {},
                                               int threads = 1,
                                               std::size_t check_samples = 100000) {
    auto check = geometry::sandwich_check(spec, check_samples, 50.0 * spec.offset);
    if (!check.pass) throw InvalidSpec("sandwich inclusions fail on sampled points");

    PhaseDomain cone = PhaseDomain::from_cone(geometry::ConeDomain(spec.base));
    PhaseDomain omega = PhaseDomain::from_sandwich(spec);
    ConductivityField cone_field(sigma_plus, sigma_minus, cone);
    ConductivityField omega_field(sigma_plus, sigma_minus, omega);

    std::vector<double> schedule;
    for (double t = grid.spacing * grid.spacing; t < t_end * (1.0 - 1e-12); t *= 2.0)
        schedule.push_back(t);
    schedule.push_back(t_end);

    StabilizationReport report;
    report.run_stats.resize(2);
    solver::RunResult omega_res;
    std::vector<std::function<void()>> jobs;
    jobs.emplace_back([&] {
        auto cone_res = solver::run(cone, cone_field, grid, 1.0, {{0.0, 0.0}}, {1.0}, opts);
        report.cone_value = cone_res.series.values.back().front();
        report.run_stats[0] = cone_res.stats;
    });
    jobs.emplace_back([&] {
        auto o = opts;
        o.record_states = true;
        omega_res = solver::run(omega, omega_field, grid, t_end, {{0.0, 0.0}}, schedule, o);
    });
    fan_out(jobs, threads);

    report.run_stats[1] = omega_res.stats;
    report.times = omega_res.series.times;
    for (const auto& row : omega_res.series.values) report.trajectory.push_back(row.front());
    for (double v : report.trajectory) report.gaps.push_back(std::abs(v - report.cone_value));
    report.terminal_gap = report.gaps.back();
    report.truncation_budget = omega_res.stats.budget;

    const std::vector<double> radii = {0.25, 0.5, 1.0};
    if (omega_res.states.size() >= 2) {
        report.holder_mid =
            solver::holder_modulus(omega_res.states[omega_res.states.size() / 2], {0, 0}, radii);
        report.holder_end = solver::holder_modulus(omega_res.states.back(), {0, 0}, radii);
    }

    report.assertions.push_back({"cone value in (0,1)",
                                 report.cone_value > 0.0 && report.cone_value < 1.0,
                                 report.cone_value, 1.0});
    report.assertions.push_back(
        {"terminal gap <= tol", report.terminal_gap <= gap_tol, report.terminal_gap, gap_tol});
    return report;
}

// ---------------------------------------------------------------------------
// Oscillation: samples at t_n / T_n with the analytic bounds and, for a
// constant conductivity, the exact series oracle.

struct OscillationSample {
    std::string label; // "t_1", "T_2", ...
    double requested = 0.0;
    double time = 0.0; // after any budget scaling
    bool scaled = false;
    double value = 0.0;
    double budget = 0.0; // truncation budget at this sample time
    std::optional<double> oracle;
};

struct OscillationReport {
    analytic::BoundReport bounds;
    solver::RunStats run_stats;
    std::vector<OscillationSample> samples;
    double observed_min = 0.0;
    double observed_max = 0.0;
    std::vector<Assertion> assertions;
};

// [OP] oscillation_study. Requested probe times whose truncation budget does
// not fit the grid are either halved into budget (scale_into_budget) or
// rejected with BudgetExceeded.
inline OscillationReport oscillation_study(const geometry::OscillatoryDomainSpec& spec,
                                           const ConductivityField& field,
                                           const analytic::OscillationParams& params,
                                           int n_probes, const solver::GridSpec& grid,
                                           double oracle_rtol, bool scale_into_budget,
                                           solver::RunOptions opts = {}) {
    if (n_probes < 1) throw InvalidSpec("n_probes must be >= 1");
    PhaseDomain domain = PhaseDomain::from_oscillatory(spec);

    // data mass enters the compact-support budget; take it from the grid data
    double mass = solver::total_mass(solver::init_state(domain, grid));

    auto schedule = analytic::probe_times(params, std::max(2, n_probes));
    std::vector<OscillationSample> samples;
    for (int n = 1; n <= n_probes; ++n) {
        OscillationSample s;
        s.label = "t_" + std::to_string(n);
        s.requested = s.time = schedule.t[n - 1];
        samples.push_back(std::move(s));
    }
    for (int n = 2; n <= n_probes; ++n) {
        OscillationSample s;
        s.label = "T_" + std::to_string(n);
        s.requested = s.time = schedule.T[n - 2];
        samples.push_back(std::move(s));
    }

    for (auto& s : samples) {
        int halvings = 0;
        auto budget_at = [&](double t) {
            return solver::truncation_budget(grid, field.sigma_max(), t, domain.support_radius,
                                             mass);
        };
        while (budget_at(s.time) > opts.budget_tol) {
            if (!scale_into_budget)
                throw BudgetExceeded("probe time " + s.label + " does not fit the grid");
            s.time *= 0.5;
            s.scaled = true;
            if (++halvings > 200) throw BudgetExceeded("probe time cannot be scaled into budget");
        }
        s.budget = budget_at(s.time);
    }

    std::vector<double> times;
    for (const auto& s : samples) times.push_back(s.time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double t_end = times.back();

    auto res = solver::run(domain, field, grid, t_end, {{0.0, 0.0}}, times, opts);
    auto value_at = [&](double t) {
        for (std::size_t k = 0; k < res.series.times.size(); ++k)
            if (res.series.times[k] == t) return res.series.values[k].front();
        throw Error("sample time missing from series");
    };

    OscillationReport report;
    report.run_stats = res.stats;
    report.bounds = analytic::oscillation_bounds(params);
    const bool constant_sigma = field.sigma_plus == field.sigma_minus;
    report.observed_min = 1.0;
    report.observed_max = 0.0;
    for (auto& s : samples) {
        s.value = value_at(s.time);
        if (constant_sigma)
            s.oracle = analytic::series_u0_constant_sigma(spec, field.sigma_plus, s.time);
        report.observed_min = std::min(report.observed_min, s.value);
        report.observed_max = std::max(report.observed_max, s.value);
    }
    report.samples = samples;

    bool inside = true;
    for (const auto& s : samples) inside = inside && s.value > 0.0 && s.value < 1.0;
    report.assertions.push_back({"all samples strictly inside (0,1)", inside, 0.0, 0.0});
    if (constant_sigma) {
        // the truncation budget is the solver's license to deviate from the
        // free-space oracle, so it enters the per-sample tolerance
        bool ok = true;
        double worst = 0.0;
        for (const auto& s : report.samples) {
            double err = std::abs(s.value - *s.oracle);
            double allowed = oracle_rtol * std::abs(*s.oracle) + s.budget;
            ok = ok && err <= allowed;
            if (allowed > 0.0) worst = std::max(worst, err / allowed);
        }
        report.assertions.push_back(
            {"solver vs series oracle within rtol + budget", ok, worst, 1.0});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report writers shared by the CLI and the test drivers.

inline void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                                 const std::vector<double>& values) {
    os << "t,u_origin\n";
    char buf[40];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.12g", times[k]);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", values[k]);
        os << buf << "\n";
    }
}

inline void write_assertions(std::ostream& os, const std::string& study,
                             const std::vector<Assertion>& as) {
    os << "study,assertion,pass,value,bound\n";
    char buf[40];
    for (const auto& a : as) {
        os << study << ',' << a.name << ',' << (a.pass ? 1 : 0) << ',';
        std::snprintf(buf, sizeof buf, "%.12g", a.value);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", a.bound);
        os << buf << "\n";
    }
}

} // namespace heatlab::experiments
