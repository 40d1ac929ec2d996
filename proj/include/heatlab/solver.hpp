#pragma once

// Finite-volume solver for u_t = div(sigma grad u) on a truncated symmetric
// grid with zero-flux walls. Cell-centered unknowns, harmonic-mean face
// conductivities, theta-scheme in time, Jacobi-preconditioned CG for the
// implicit solve. Single solver run = single logical thread; distinct runs
// are independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "heatlab/analytic.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/geometry.hpp"

namespace heatlab::solver {

using geometry::ConductivityField;
using geometry::PhaseDomain;
using geometry::Point2;

// Symmetric square grid. Cell centers sit at ((i+1/2)h - L_eff, ...) so the
// origin is a cell corner; the origin probe averages its 4 adjacent cells.
struct GridSpec {
    double half_extent = 0.0; // requested L
    double spacing = 0.0;     // h

    GridSpec(double L, double h) : half_extent(L), spacing(h) {
        if (!(h > 0.0) || !(L > 0.0)) throw InvalidSpec("grid extent and spacing must be positive");
        if (L / h < 20.0 - 1e-12) throw InvalidSpec("grid requires L/h >= 20");
    }

    int half_cells() const { return static_cast<int>(std::ceil(half_extent / spacing - 1e-12)); }
    int cells_per_side() const { return 2 * half_cells(); }
    // grid may round L up to a whole cell count
    double effective_extent() const { return half_cells() * spacing; }

    double center_x(int i) const { return (i + 0.5) * spacing - effective_extent(); }
    Point2 center(int i, int j) const { return {center_x(i), center_x(j)}; }
};

// Per-face harmonic means of the adjacent cell conductivities.
struct FaceConductivity {
    int n = 0;
    std::vector<double> fx; // (n-1) x n, between (i,j) and (i+1,j)
    std::vector<double> fy; // n x (n-1), between (i,j) and (i,j+1)

    double east(int i, int j) const { return fx[static_cast<std::size_t>(j) * (n - 1) + i]; }
    double north(int i, int j) const { return fy[static_cast<std::size_t>(j) * n + i]; }
};

// [OP] discretize: harmonic mean 2 ab/(a+b) per face; conservative flux form.
inline FaceConductivity discretize(const ConductivityField& field, const GridSpec& grid) {
    const int n = grid.cells_per_side();
    std::vector<double> sigma(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            sigma[static_cast<std::size_t>(j) * n + i] =
                geometry::conductivity_at(field, grid.center(i, j));

    FaceConductivity f;
    f.n = n;
    f.fx.resize(static_cast<std::size_t>(n - 1) * n);
    f.fy.resize(static_cast<std::size_t>(n) * (n - 1));
    auto harm = [](double a, double b) { return 2.0 * a * b / (a + b); };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i + 1 < n; ++i)
            f.fx[static_cast<std::size_t>(j) * (n - 1) + i] =
                harm(sigma[static_cast<std::size_t>(j) * n + i],
                     sigma[static_cast<std::size_t>(j) * n + i + 1]);
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i < n; ++i)
            f.fy[static_cast<std::size_t>(j) * n + i] =
                harm(sigma[static_cast<std::size_t>(j) * n + i],
                     sigma[static_cast<std::size_t>(j + 1) * n + i]);
    return f;
}

struct StepConfig {
    double theta = 1.0;       // 1 = implicit Euler, 1/2 = trapezoidal
    double cg_tol = 1e-10;    // relative residual
    int cg_maxiter = 20000;
};

struct SolverState {
    GridSpec grid;
    StepConfig config;
    FaceConductivity faces;
    std::vector<double> u;
    double t = 0.0;
    // running extrema over all steps taken so far
    double min_seen = 0.0;
    double max_seen = 0.0;
    long cg_iterations = 0;
};

// [OP] init_state: cell value = indicator at the cell center; t = 0.
inline SolverState init_state(const PhaseDomain& domain, const GridSpec& grid,
                              StepConfig config = {}) {
    SolverState s{grid, config, {}, {}, 0.0};
    const int n = grid.cells_per_side();
    s.u.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            s.u[static_cast<std::size_t>(j) * n + i] = domain(grid.center(i, j)) ? 1.0 : 0.0;
    auto [mn, mx] = std::minmax_element(s.u.begin(), s.u.end());
    s.min_seen = *mn;
    s.max_seen = *mx;
    return s;
}

// Compensated sum; plain accumulation loses ~1e-8 absolute on 1e5 cells,
// which the conservation checks cannot afford.
inline double kahan_sum(std::span<const double> v) {
    double sum = 0.0, c = 0.0;
    for (double x : v) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

inline double total_mass(const SolverState& s) {
    return kahan_sum(s.u) * s.grid.spacing * s.grid.spacing;
}

namespace detail {

// y = x - scale * (div sigma grad x). The (e+w)+(n+s) pairing keeps the
// result bitwise invariant under every grid reflection.
inline void apply_operator(const FaceConductivity& f, double scale,
                           std::span<const double> x, std::span<double> y) {
    const int n = f.n;
    for (int j = 0; j < n; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n;
        for (int i = 0; i < n; ++i) {
            const std::size_t id = row + i;
            const double c = x[id];
            double e = (i + 1 < n) ? f.east(i, j) * (x[id + 1] - c) : 0.0;
            double w = (i > 0) ? f.east(i - 1, j) * (x[id - 1] - c) : 0.0;
            double nn = (j + 1 < n) ? f.north(i, j) * (x[id + n] - c) : 0.0;
            double ss = (j > 0) ? f.north(i, j - 1) * (x[id - n] - c) : 0.0;
            y[id] = c - scale * ((e + w) + (nn + ss));
        }
    }
}

// Jacobi diagonal of (I - scale * A).
inline void operator_diagonal(const FaceConductivity& f, double scale, std::span<double> d) {
    const int n = f.n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            if (i + 1 < n) s += f.east(i, j);
            if (i > 0) s += f.east(i - 1, j);
            if (j + 1 < n) s += f.north(i, j);
            if (j > 0) s += f.north(i, j - 1);
            d[static_cast<std::size_t>(j) * n + i] = 1.0 + scale * s;
        }
}

// Jacobi-preconditioned CG on (I - scale*A) x = b, warm-started at x. The
// constant vector is an eigenvector of the matrix (zero-flux walls), so the
// mass component of the error is recovered exactly afterwards; the repair
// leaves the orthogonal residual untouched.
inline long pcg_solve(const FaceConductivity& f, double scale, std::span<const double> b,
                      std::span<double> x, double tol, int maxiter) {
    const std::size_t m = b.size();
    static thread_local std::vector<double> r, z, p, q, d;
    r.resize(m);
    z.resize(m);
    p.resize(m);
    q.resize(m);
    d.resize(m);
    operator_diagonal(f, scale, d);

    apply_operator(f, scale, x, r);
    for (std::size_t k = 0; k < m; ++k) r[k] = b[k] - r[k];
    double bnorm = 0.0;
    for (std::size_t k = 0; k < m; ++k) bnorm += b[k] * b[k];
    bnorm = std::sqrt(bnorm);
    const double stop = tol * (bnorm > 0.0 ? bnorm : 1.0);

    double rz = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        z[k] = r[k] / d[k];
        rz += r[k] * z[k];
    }
    p.assign(z.begin(), z.end());

    long iters = 0;
    double rnorm = 0.0;
    for (std::size_t k = 0; k < m; ++k) rnorm += r[k] * r[k];
    rnorm = std::sqrt(rnorm);
    while (rnorm > stop) {
        if (++iters > maxiter) throw NonConvergence("CG exceeded the iteration cap");
        apply_operator(f, scale, p, q);
        double pq = 0.0;
        for (std::size_t k = 0; k < m; ++k) pq += p[k] * q[k];
        double alpha = rz / pq;
        for (std::size_t k = 0; k < m; ++k) x[k] += alpha * p[k];
        for (std::size_t k = 0; k < m; ++k) r[k] -= alpha * q[k];
        double rz_next = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            z[k] = r[k] / d[k];
            rz_next += r[k] * z[k];
        }
        double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < m; ++k) p[k] = z[k] + beta * p[k];
        rnorm = 0.0;
        for (std::size_t k = 0; k < m; ++k) rnorm += r[k] * r[k];
        rnorm = std::sqrt(rnorm);
    }

    // mass repair: 1^T M = 1^T, so the defect of the column sums is exact
    double defect = kahan_sum(b) - kahan_sum(x);
    double shift = defect / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) x[k] += shift;
    return iters;
}

} // namespace detail

// [OP] step: advance one theta-scheme step. Trapezoidal steps enforce the
// monotonicity cap dt <= h^2/(2 max sigma).
inline void step(SolverState& state, double dt) {
    if (!(dt > 0.0)) throw InvalidSpec("dt must be positive");
    if (state.faces.n == 0) throw InvalidSpec("state has no face conductivities attached");
    const double theta = state.config.theta;
    if (theta < 0.5 || theta > 1.0) throw InvalidSpec("theta must lie in [1/2, 1]");
    const double h2 = state.grid.spacing * state.grid.spacing;
    if (theta < 1.0) {
        double sig_max = 0.0;
        for (double v : state.faces.fx) sig_max = std::max(sig_max, v);
        for (double v : state.faces.fy) sig_max = std::max(sig_max, v);
        if (dt > h2 / (2.0 * sig_max) * (1.0 + 1e-12))
            throw InvalidSpec("trapezoidal step exceeds the monotonicity cap h^2/(2 max sigma)");
    }

    const std::size_t m = state.u.size();
    std::vector<double> b(m);
    if (theta == 1.0) {
        b.assign(state.u.begin(), state.u.end());
    } else {
        // b = u + (1-theta) dt A u  ==  (2 - M_explicit) style splitting
        detail::apply_operator(state.faces, -(1.0 - theta) * dt / h2, state.u, b);
    }
    state.cg_iterations += detail::pcg_solve(state.faces, theta * dt / h2, b, state.u,
                                             state.config.cg_tol, state.config.cg_maxiter);
    state.t += dt;
    for (double v : state.u) {
        state.min_seen = std::min(state.min_seen, v);
        state.max_seen = std::max(state.max_seen, v);
    }
}

// Probe extraction: the origin averages its 4 adjacent cells; any other
// point reads the cell containing it.
inline double probe_value(const SolverState& s, Point2 p) {
    const int n = s.grid.cells_per_side();
    const int half = n / 2;
    if (p.x == 0.0 && p.y == 0.0) {
        auto at = [&](int i, int j) { return s.u[static_cast<std::size_t>(j) * n + i]; };
        return 0.25 * ((at(half - 1, half - 1) + at(half, half - 1)) +
                       (at(half - 1, half) + at(half, half)));
    }
    double L = s.grid.effective_extent();
    int i = std::clamp(static_cast<int>(std::floor((p.x + L) / s.grid.spacing)), 0, n - 1);
    int j = std::clamp(static_cast<int>(std::floor((p.y + L) / s.grid.spacing)), 0, n - 1);
    return s.u[static_cast<std::size_t>(j) * n + i];
}

// Probe trajectories sampled at strictly increasing times.
struct TimeSeries {
    std::vector<Point2> probes;
    std::vector<double> times;
    std::vector<std::vector<double>> values; // values[k][probe]

    void write_csv(std::ostream& os) const {
        os << "t";
        for (std::size_t p = 0; p < probes.size(); ++p) os << ",probe_" << p;
        os << "\n";
        char buf[40];
        for (std::size_t k = 0; k < times.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g", times[k]);
            os << buf;
            for (double v : values[k]) {
                std::snprintf(buf, sizeof buf, "%.12g", v);
                os << ',' << buf;
            }
            os << "\n";
        }
    }
};

// Truncation budget: heat-kernel mass beyond the largest safe radius,
// evaluated with the fastest conductivity present. When the initial data has
// known compact support the reflected-image bound is used instead; it is the
// quantity that actually limits box runs with small domains.
inline double truncation_budget(const GridSpec& grid, double sigma_max, double t,
                                std::optional<double> support_radius = std::nullopt,
                                double data_mass = 0.0) {
    const double rho = grid.effective_extent() - 2.0 * grid.spacing;
    const double s = std::sqrt(4.0 * sigma_max * t);
    const double generic =
        analytic::truncated_moment(2, rho / s, std::numeric_limits<double>::infinity()) /
        analytic::moment_integral(2);
    if (!support_radius || *support_radius >= rho || data_mass <= 0.0) return generic;
    double refl = 0.0;
    for (int k = 1; k <= 64; ++k) {
        double d = 2.0 * k * rho - *support_radius;
        refl += 8.0 * k * std::exp(-d * d / (4.0 * sigma_max * t));
    }
    refl *= data_mass / (4.0 * std::numbers::pi * sigma_max * t);
    return std::min(generic, refl);
}

struct RunOptions {
    StepConfig step;
    double rate = 24.0;        // geometric dt policy: dt ~ t/rate
    double budget_tol = 0.25;  // refuse t_end whose truncation budget exceeds this
    bool record_states = false;
};

struct RunStats {
    double min_u = 0.0;
    double max_u = 0.0;
    double mass0 = 0.0;
    double max_mass_drift = 0.0; // max |mass(t) - mass(0)| over sample times
    double budget = 0.0;         // truncation budget at t_end
    long steps = 0;
    long cg_iterations = 0;
};

struct RunResult {
    TimeSeries series;
    RunStats stats;
    std::vector<SolverState> states; // only if record_states
};

// [OP] run: march to t_end, landing exactly on every sample time.
inline RunResult run(const PhaseDomain& domain, const ConductivityField& field,
                     const GridSpec& grid, double t_end, std::vector<Point2> probes,
                     std::vector<double> sample_times, RunOptions opts = {}) {
    if (!(t_end > 0.0)) throw InvalidSpec("t_end must be positive");
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
        if (!(sample_times[k] > 0.0) || sample_times[k] > t_end * (1.0 + 1e-12))
            throw InvalidSpec("sample times must lie in (0, t_end]");
        if (k > 0 && sample_times[k] <= sample_times[k - 1])
            throw InvalidSpec("sample times must be strictly increasing");
    }

    SolverState state = init_state(domain, grid, opts.step);
    state.faces = discretize(field, grid);

    RunResult out;
    out.stats.mass0 = total_mass(state);
    out.stats.budget = truncation_budget(grid, field.sigma_max(), t_end, domain.support_radius,
                                         out.stats.mass0);
    if (out.stats.budget > opts.budget_tol)
        throw BudgetExceeded("truncation budget " + std::to_string(out.stats.budget) +
                             " exceeds tolerance " + std::to_string(opts.budget_tol));

    out.series.probes = probes;
    const double h = grid.spacing;
    const double dt0 = h * h / (2.0 * field.sigma_max());
    const double dt_cap = (opts.step.theta < 1.0) ? dt0 : std::numeric_limits<double>::infinity();

    std::size_t next_sample = 0;
    while (state.t < t_end * (1.0 - 1e-14)) {
        double dt = std::max(dt0, state.t / opts.rate);
        dt = std::min(dt, dt_cap);
        double next_event =
            (next_sample < sample_times.size()) ? sample_times[next_sample] : t_end;
        if (state.t + dt >= next_event * (1.0 - 1e-14)) dt = next_event - state.t;
        step(state, dt);
        ++out.stats.steps;
        if (next_sample < sample_times.size() &&
            state.t >= sample_times[next_sample] * (1.0 - 1e-14)) {
            state.t = sample_times[next_sample]; // cancel accumulation drift
            out.series.times.push_back(state.t);
            std::vector<double> row;
            row.reserve(probes.size());
            for (Point2 p : probes) row.push_back(probe_value(state, p));
            out.series.values.push_back(std::move(row));
            out.stats.max_mass_drift =
                std::max(out.stats.max_mass_drift, std::abs(total_mass(state) - out.stats.mass0));
            if (opts.record_states) out.states.push_back(state);
            ++next_sample;
        }
    }
    out.stats.max_mass_drift =
        std::max(out.stats.max_mass_drift, std::abs(total_mass(state) - out.stats.mass0));
    out.stats.min_u = state.min_seen;
    out.stats.max_u = state.max_seen;
    out.stats.cg_iterations = state.cg_iterations;
    if (!opts.record_states) {
        // keep the terminal state available for field diagnostics
        out.states.push_back(std::move(state));
    }
    return out;
}

// [OP] rescaled_run: solve on Omega^k with sigma^k and return u^k(0, t).
// The rescaled grid keeps the cell count (matched relative resolution).
inline RunResult rescaled_run_full(const PhaseDomain& domain, const ConductivityField& field,
                                   const GridSpec& grid, double k, double t,
                                   RunOptions opts = {}) {
    if (!(k > 0.0)) throw InvalidSpec("k must be positive");
    PhaseDomain scaled = geometry::rescale_domain(domain, k);
    ConductivityField scaled_field(field.sigma_plus, field.sigma_minus, scaled, field.m, field.M);
    GridSpec scaled_grid(grid.half_extent / k, grid.spacing / k);
    return run(scaled, scaled_field, scaled_grid, t, {{0.0, 0.0}}, {t}, opts);
}

inline double rescaled_run(const PhaseDomain& domain, const ConductivityField& field,
                           const GridSpec& grid, double k, double t, RunOptions opts = {}) {
    return rescaled_run_full(domain, field, grid, k, t, opts).series.values.back().front();
}

// [OP] energy_integral: discrete int_0^T int_{B_rho} |grad u|^2, trapezoidal
// over the states' times; each face contributes its directional derivative
// over one cell area.
inline double energy_integral(std::span<const SolverState> states, double rho) {
    if (states.size() < 2) throw InvalidSpec("need at least two states in time");
    auto grad2 = [&](const SolverState& s) {
        const int n = s.grid.cells_per_side();
        const double h = s.grid.spacing;
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i + 1 < n; ++i) {
                double xm = 0.5 * (s.grid.center_x(i) + s.grid.center_x(i + 1));
                double ym = s.grid.center_x(j);
                if (xm * xm + ym * ym > rho * rho) continue;
                double g = (s.u[static_cast<std::size_t>(j) * n + i + 1] -
                            s.u[static_cast<std::size_t>(j) * n + i]) / h;
                acc += g * g;
            }
        for (int j = 0; j + 1 < n; ++j)
            for (int i = 0; i < n; ++i) {
                double xm = s.grid.center_x(i);
                double ym = 0.5 * (s.grid.center_x(j) + s.grid.center_x(j + 1));
                if (xm * xm + ym * ym > rho * rho) continue;
                double g = (s.u[static_cast<std::size_t>(j + 1) * n + i] -
                            s.u[static_cast<std::size_t>(j) * n + i]) / h;
                acc += g * g;
            }
        return acc * h * h;
    };
    double total = 0.0;
    double prev = grad2(states[0]);
    for (std::size_t k = 1; k < states.size(); ++k) {
        double cur = grad2(states[k]);
        total += 0.5 * (prev + cur) * (states[k].t - states[k - 1].t);
        prev = cur;
    }
    return total;
}

// [OP] holder_modulus: sup |u(x) - u(base)| over the ring band |x - base|
// in [r - h/2, r + h/2), per requested radius.
inline std::vector<std::pair<double, double>> holder_modulus(const SolverState& state, Point2 base,
                                                             const std::vector<double>& radii) {
    const int n = state.grid.cells_per_side();
    const double h = state.grid.spacing;
    const double ubase = probe_value(state, base);
    std::vector<std::pair<double, double>> out;
    for (double r : radii) {
        if (r + std::abs(base.x) > state.grid.effective_extent() ||
            r + std::abs(base.y) > state.grid.effective_extent())
            throw InvalidSpec("radius leaves the grid");
        double sup = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Point2 c = state.grid.center(i, j);
                double d = norm(c - base);
                if (d >= r - 0.5 * h && d < r + 0.5 * h)
                    sup = std::max(sup,
                                   std::abs(state.u[static_cast<std::size_t>(j) * n + i] - ubase));
            }
        out.emplace_back(r, sup);
    }
    return out;
}

} // namespace heatlab::solver
