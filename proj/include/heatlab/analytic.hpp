#pragma once

// Closed-form side of the oscillation construction: Gaussian moment
// integrals, the medium inequality and its epsilon threshold, the (delta, R)
// window equation, probe-time schedules, the exact constant-conductivity
// series for u(0,t), and the four bound sequences whose gap certifies
// oscillation.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/geometry.hpp"

namespace heatlab::analytic {

// Two-sided Gaussian envelope lambda t^{-N/2} e^{-|x-xi|^2/(lambda t)} <= g
// <= Lambda t^{-N/2} e^{-|x-xi|^2/(Lambda t)}. The constants are a user
// input; no formula in terms of (m, M, N) is derived here.
struct GaussianEnvelope {
    double lambda = 0.0;
    double Lambda = 0.0;
    int dimension = 2;

    GaussianEnvelope(double lam, double Lam, int N = 2)
        : lambda(lam), Lambda(Lam), dimension(N) {
        if (!(lam > 0.0) || !(Lam > 0.0)) throw InvalidSpec("envelope constants must be positive");
        if (!(lam < Lam)) throw InvalidSpec("envelope requires lambda < Lambda");
        if (N < 2) throw InvalidSpec("dimension must be >= 2");
    }

    double exponent() const { return 0.5 * (dimension + 2); } // (N+2)/2
};

// Surface measure of S^{N-1}: 2 pi^{N/2} / Gamma(N/2).
inline double sphere_measure(int N) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

// [OP] moment_integral: I_N = int_0^inf e^{-s^2} s^{N-1} ds = Gamma(N/2)/2.
inline double moment_integral(int N) {
    if (N < 2) throw InvalidSpec("dimension must be >= 2");
    return 0.5 * std::tgamma(0.5 * N);
}

// [OP] truncated_moment: int_a^b e^{-s^2} s^{N-1} ds via the regularized
// incomplete gamma function (substitute y = s^2).
inline double truncated_moment(int N, double a, double b) {
    if (N < 2) throw InvalidSpec("dimension must be >= 2");
    if (!(a >= 0.0) || b < a) throw InvalidSpec("need 0 <= a <= b");
    if (a == b) return 0.0;
    double half_n = 0.5 * N;
    double pa = boost::math::gamma_p(half_n, a * a);
    double pb = std::isinf(b) ? 1.0 : boost::math::gamma_p(half_n, b * b);
    return moment_integral(N) * (pb - pa);
}

// [OP] check_medium_inequality: beta lambda^q > alpha Lambda^q, q = (N+2)/2.
inline bool check_medium_inequality(double alpha, double beta, const GaussianEnvelope& env) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidSpec("measures must be positive");
    double q = env.exponent();
    return beta * std::pow(env.lambda, q) > alpha * std::pow(env.Lambda, q);
}

// Direct evaluation of the key inequality
// [(1-e)beta + e alpha] lambda^q > [(1-e)alpha + e beta] Lambda^q.
inline bool key_inequality_holds(double alpha, double beta, double epsilon,
                                 const GaussianEnvelope& env) {
    double q = env.exponent();
    double lhs = ((1.0 - epsilon) * beta + epsilon * alpha) * std::pow(env.lambda, q);
    double rhs = ((1.0 - epsilon) * alpha + epsilon * beta) * std::pow(env.Lambda, q);
    return lhs > rhs;
}

// [OP] epsilon_threshold: the key inequality is linear in epsilon; it holds
// exactly for 0 < epsilon < eps* with
//   eps* = (beta lambda^q - alpha Lambda^q) / ((beta-alpha)(lambda^q + Lambda^q)).
inline double epsilon_threshold(double alpha, double beta, const GaussianEnvelope& env) {
    if (!check_medium_inequality(alpha, beta, env))
        throw NotSatisfiable("medium inequality beta*lambda^q > alpha*Lambda^q fails");
    double q = env.exponent();
    double lq = std::pow(env.lambda, q);
    double Lq = std::pow(env.Lambda, q);
    return (beta * lq - alpha * Lq) / ((beta - alpha) * (lq + Lq));
}

// [OP] solve_delta: find delta in (0,1) with
//   int_delta^{delta R} e^{-s^2} s^{N-1} ds = (1-eps) I_N.
// The map delta -> integral rises to a single peak at
// delta_peak = sqrt(N ln R / (R^2-1)) and falls to zero; the root on the
// falling branch is returned (it converges to sqrt of the inverse tail as
// R -> inf, the regime the shell construction lives in).
inline std::optional<double> solve_delta(int N, double epsilon, double R) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidSpec("epsilon must lie in (0,1)");
    if (!(R > 1.0)) throw InvalidSpec("R must exceed 1");
    const double target = (1.0 - epsilon) * moment_integral(N);
    auto window = [&](double d) { return truncated_moment(N, d, d * R); };

    const double d_peak = std::sqrt(N * std::log(R) / (R * R - 1.0));
    if (window(d_peak) < target) return std::nullopt;

    double lo = d_peak, hi = d_peak;
    do {
        hi *= 2.0;
        if (hi > 1e6) return std::nullopt;
    } while (window(hi) >= target);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (window(mid) >= target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 && std::abs(window(lo) - target) < 1e-10) break;
    }
    double delta = 0.5 * (lo + hi);
    if (delta >= 1.0) return std::nullopt; // construction requires delta < 1 < R
    return delta;
}

// Parameter record for the oscillation construction. The window identity is
// an invariant; the key inequality is recorded as a flag.
struct OscillationParams {
    int N = 2;
    double alpha = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    double R = 0.0;
    GaussianEnvelope envelope;
    bool key_inequality = false;

    OscillationParams(int n, double a, double b, double eps, double d, double r,
                      GaussianEnvelope env)
        : N(n), alpha(a), beta(b), epsilon(eps), delta(d), R(r), envelope(env) {
        if (!(alpha > 0.0) || !(alpha < beta)) throw InvalidSpec("need 0 < alpha < beta");
        if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidSpec("epsilon must lie in (0,1)");
        if (!(delta > 0.0) || !(delta < 1.0) || !(R > 1.0))
            throw InvalidSpec("need 0 < delta < 1 < R");
        double window = truncated_moment(N, delta, delta * R);
        if (std::abs(window - (1.0 - epsilon) * moment_integral(N)) > 1e-8)
            throw Infeasible("(delta, R) do not satisfy the window equation for epsilon");
        key_inequality = key_inequality_holds(alpha, beta, epsilon, envelope);
    }

    // Convenience route: epsilon defaults to eps*/2, delta is solved.
    static OscillationParams derive(int n, double a, double b, GaussianEnvelope env, double r,
                                    std::optional<double> eps = std::nullopt) {
        double e = eps ? *eps : 0.5 * epsilon_threshold(a, b, env);
        auto d = solve_delta(n, e, r);
        if (!d) throw Infeasible("no delta in (0,1) satisfies the window equation");
        return OscillationParams(n, a, b, e, *d, r, env);
    }

    // delta and R determine epsilon through the window equation.
    static OscillationParams from_delta(int n, double a, double b, GaussianEnvelope env, double r,
                                        double d) {
        double e = 1.0 - truncated_moment(n, d, d * r) / moment_integral(n);
        if (!(e > 0.0) || !(e < 1.0))
            throw Infeasible("delta window leaves no epsilon in (0,1)");
        return OscillationParams(n, a, b, e, d, r, env);
    }

    double shell_radius(int n) const {
        return n == 0 ? 0.0 : delta * std::pow(R, n - 1);
    }
};

// Probe times: t_n = R^{4(n-1)}/lambda (n >= 1), T_n = R^{2(2n-3)}/Lambda
// (n >= 2). At t_n the similarity window [r_{2n-1}, r_{2n}]/sqrt(lambda t_n)
// is exactly [delta, delta R].
struct ProbeSchedule {
    std::vector<double> t; // t_1..t_nmax
    std::vector<double> T; // T_2..T_nmax
};

// [OP] probe_times
inline ProbeSchedule probe_times(const OscillationParams& params, int n_max) {
    if (n_max < 2) throw InvalidSpec("n_max must be >= 2");
    ProbeSchedule s;
    for (int n = 1; n <= n_max; ++n)
        s.t.push_back(std::pow(params.R, 4.0 * (n - 1)) / params.envelope.lambda);
    for (int n = 2; n <= n_max; ++n)
        s.T.push_back(std::pow(params.R, 2.0 * (2 * n - 3)) / params.envelope.Lambda);
    return s;
}

// [OP] series_u0_constant_sigma: exact origin value for a constant
// conductivity. The radial kernel integrates each shell in closed form:
//   u(0,t) = (1/2pi) sum_n meas_n (e^{-r_n^2/(4 s t)} - e^{-r_{n+1}^2/(4 s t)}).
// Shells are summed until the tail bound max(alpha,beta)/(2pi) *
// e^{-r^2/(4 s t)} at the first omitted radius drops below tol.
inline double series_u0_constant_sigma(const geometry::OscillatoryDomainSpec& spec, double sigma,
                                       double t, double tol = 1e-12) {
    if (!(sigma > 0.0) || !(t > 0.0)) throw InvalidSpec("sigma and t must be positive");
    const double alpha = spec.inner.measure();
    const double beta = spec.outer.measure();
    const double inv = 1.0 / (4.0 * sigma * t);
    const int shells = spec.effective_shells();
    const double wmax = std::max(alpha, beta) / geometry::two_pi;
    double sum = 0.0;
    for (int n = 0; n < shells; ++n) {
        double lo = shell_radius(spec, n);
        double hi = shell_radius(spec, n + 1);
        double meas = (n % 2 == 0) ? alpha : beta;
        sum += meas * (std::exp(-lo * lo * inv) - std::exp(-hi * hi * inv));
        if (wmax * std::exp(-hi * hi * inv) < tol) break;
    }
    return sum / geometry::two_pi;
}

// [OP] envelope_check: is g within the two-sided Gaussian envelope at
// (x, xi, t)?
inline bool envelope_check(double g_value, geometry::Point2 x, geometry::Point2 xi, double t,
                           const GaussianEnvelope& env) {
    if (!(t > 0.0)) throw InvalidSpec("t must be positive");
    double d2 = (x.x - xi.x) * (x.x - xi.x) + (x.y - xi.y) * (x.y - xi.y);
    double tn = std::pow(t, -0.5 * env.dimension);
    double lower = env.lambda * tn * std::exp(-d2 / (env.lambda * t));
    double upper = env.Lambda * tn * std::exp(-d2 / (env.Lambda * t));
    return lower <= g_value && g_value <= upper;
}

// The four bound values. floor and ceiling hold for every t; the limsup
// lower and liminf upper bounds hold along t_n and T_n. The gap flag is the
// oscillation certificate.
struct BoundReport {
    double floor = 0.0;
    double ceiling = 0.0;
    double limsup_lower = 0.0;
    double liminf_upper = 0.0;
    bool gap_certified = false;
};

// [OP] oscillation_bounds
inline BoundReport oscillation_bounds(const OscillationParams& params) {
    const double q = params.envelope.exponent();
    const double lq = std::pow(params.envelope.lambda, q);
    const double Lq = std::pow(params.envelope.Lambda, q);
    const double In = moment_integral(params.N);
    BoundReport r;
    r.floor = lq * params.alpha * In;
    r.limsup_lower = lq * ((1.0 - params.epsilon) * params.beta + params.epsilon * params.alpha) * In;
    r.liminf_upper = Lq * ((1.0 - params.epsilon) * params.alpha + params.epsilon * params.beta) * In;
    r.ceiling = 1.0 - lq * (sphere_measure(params.N) - params.beta) * In;
    r.gap_certified = r.limsup_lower > r.liminf_upper;
    return r;
}

// [OP] series_bounds_at: the two envelope series evaluated at time t; they
// bound u(0,t) for any conductivity the envelope admits. Terms are summed
// until the complete-moment tail beyond the last radius is below 1e-12.
inline std::pair<double, double> series_bounds_at(const OscillationParams& params, double t) {
    if (!(t > 0.0)) throw InvalidSpec("t must be positive");
    const double q = params.envelope.exponent();
    const double In = moment_integral(params.N);
    auto one_series = [&](double c) {
        const double scale = 1.0 / std::sqrt(c * t);
        const double cq = std::pow(c, q);
        double sum = 0.0;
        for (int n = 0;; ++n) {
            double lo = params.shell_radius(n) * scale;
            double hi = params.shell_radius(n + 1) * scale;
            double meas = (n % 2 == 0) ? params.alpha : params.beta;
            sum += meas * truncated_moment(params.N, lo, hi);
            double tail = std::max(params.alpha, params.beta) *
                          (In - truncated_moment(params.N, 0.0, hi));
            if (cq * tail < 1e-12) break;
            if (n > 4000) throw NonConvergence("series_bounds_at tail did not close");
        }
        return cq * sum;
    };
    return {one_series(params.envelope.lambda), one_series(params.envelope.Lambda)};
}

} // namespace heatlab::analytic
