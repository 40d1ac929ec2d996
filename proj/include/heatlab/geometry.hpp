#pragma once

// Planar (N = 2) domain geometry: regions on the unit circle, cones over
// them, translated-cone sandwich domains, and the alternating shell domains.
// Every domain is exposed as an indicator function; all values are immutable
// after construction and all operations are pure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/errors.hpp"

namespace heatlab::geometry {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Tolerance for treating two directions as equal.
inline constexpr double direction_tol = 1e-12;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

// Angle canonicalized to [0, 2pi).
class Direction {
  public:
    Direction() = default;
    explicit Direction(double angle) : angle_(canonicalize(angle)) {}

    double angle() const { return angle_; }
    Direction antipode() const { return Direction(angle_ + std::numbers::pi); }
    Point2 unit() const { return {std::cos(angle_), std::sin(angle_)}; }

    static double canonicalize(double a) {
        double r = std::fmod(a, two_pi);
        if (r < 0.0) r += two_pi;
        if (r >= two_pi) r = 0.0; // fmod can return 2pi-eps rounding up
        return r;
    }

  private:
    double angle_ = 0.0;
};

// Signed angular offset of b relative to a, in [-pi, pi).
inline double signed_offset(double a, double b) {
    double d = Direction::canonicalize(b - a);
    if (d >= std::numbers::pi) d -= two_pi;
    return d;
}

inline double angular_distance(Direction a, Direction b) {
    return std::abs(signed_offset(a.angle(), b.angle()));
}

// Closed circular arc of measure 2*half_width centered at `center`.
struct ArcRegion {
    Direction center;
    double half_width = 0.0; // in (0, pi]

    ArcRegion() = default;
    ArcRegion(Direction c, double hw) : center(c), half_width(hw) {
        if (!(hw > 0.0) || hw > std::numbers::pi)
            throw InvalidSpec("arc half_width must lie in (0, pi]");
    }

    double measure() const { return 2.0 * half_width; }

    bool contains(double theta) const {
        return std::abs(signed_offset(center.angle(), theta)) <= half_width + direction_tol;
    }
    // Open-arc membership, used where an interior is meant.
    bool contains_interior(double theta) const {
        return std::abs(signed_offset(center.angle(), theta)) < half_width - direction_tol;
    }
    // a subset of b (as closed arcs, up to direction_tol)
    static bool subset(const ArcRegion& a, const ArcRegion& b) {
        double off = std::abs(signed_offset(b.center.angle(), a.center.angle()));
        return off + a.half_width <= b.half_width + direction_tol;
    }
};

// Finite union of pairwise-disjoint arcs, stored sorted by center angle.
class RegionSet {
  public:
    RegionSet() = default;
    explicit RegionSet(std::vector<ArcRegion> arcs) : arcs_(std::move(arcs)) {
        std::sort(arcs_.begin(), arcs_.end(), [](const ArcRegion& a, const ArcRegion& b) {
            return a.center.angle() < b.center.angle();
        });
        validate_disjoint();
    }

    const std::vector<ArcRegion>& arcs() const { return arcs_; }
    bool empty() const { return arcs_.empty(); }

    bool contains(double theta) const {
        for (const auto& a : arcs_)
            if (a.contains(theta)) return true;
        return false;
    }

    double measure() const {
        double m = 0.0;
        for (const auto& a : arcs_) m += a.measure();
        return m;
    }

  private:
    void validate_disjoint() const {
        const std::size_t n = arcs_.size();
        if (n < 2) return;
        double total = measure();
        if (total > two_pi + direction_tol)
            throw InvalidSpec("arcs exceed the measure of the circle");
        for (std::size_t i = 0; i < n; ++i) {
            const ArcRegion& a = arcs_[i];
            const ArcRegion& b = arcs_[(i + 1) % n];
            // gap between the end of a and the start of b, walking ccw
            double end_a = a.center.angle() + a.half_width;
            double start_b = b.center.angle() - b.half_width + (i + 1 == n ? two_pi : 0.0);
            if (start_b - end_a < direction_tol)
                throw InvalidSpec("arcs must be pairwise disjoint");
        }
    }

    std::vector<ArcRegion> arcs_;
};

// [OP] arc_measure
inline double arc_measure(const RegionSet& region) { return region.measure(); }

// [OP] is_starshaped: every shorter geodesic from a point of the region to p
// stays inside. On the circle this forces a single arc containing p whose
// endpoints are within angular distance < pi of p. A split region is never
// starshaped, and that verdict is returned before the antipode precondition
// fires, so the disjoint-arcs case answers false rather than erroring.
inline bool is_starshaped(const RegionSet& region, Direction p) {
    if (!region.contains(p.angle()))
        throw PNotInRegion("p does not lie in the region");
    if (region.arcs().size() != 1) return false;
    if (region.contains(p.antipode().angle()))
        throw AntipodeInRegion("the antipode of p lies in the region");
    const ArcRegion& arc = region.arcs().front();
    double d = signed_offset(arc.center.angle(), p.angle());
    // distances from p to the arc endpoints, measured along the arc
    return arc.half_width - d < std::numbers::pi && arc.half_width + d < std::numbers::pi;
}

// Cone over a region of S^1: x = r*omega with r > 0, omega in the base.
// The origin is excluded.
class ConeDomain {
  public:
    explicit ConeDomain(RegionSet base) : base_(std::move(base)) {
        if (base_.empty()) throw InvalidSpec("cone base is empty");
        if (base_.measure() >= two_pi - direction_tol)
            throw InvalidSpec("cone base must leave the boundary of A nonempty");
    }

    const RegionSet& base() const { return base_; }

    bool indicator(Point2 x) const {
        if (x.x == 0.0 && x.y == 0.0) return false;
        return base_.contains(std::atan2(x.y, x.x));
    }

  private:
    RegionSet base_;
};

// [OP] cone_indicator
inline bool cone_indicator(const ConeDomain& cone, Point2 x) { return cone.indicator(x); }

// Deterministic low-discrepancy samples in the disk of the given radius
// (additive-recurrence lattice mapped by sqrt to equal-area).
inline std::vector<Point2> disk_samples(std::size_t count, double radius) {
    // 1/phi_2 and 1/phi_2^2 with phi_2 the plastic constant
    constexpr double a1 = 0.7548776662466927;
    constexpr double a2 = 0.5698402909980532;
    std::vector<Point2> pts;
    pts.reserve(count);
    double u = 0.5, v = 0.5;
    for (std::size_t i = 0; i < count; ++i) {
        u += a1;
        u -= std::floor(u);
        v += a2;
        v -= std::floor(v);
        double r = radius * std::sqrt(u);
        double th = two_pi * v;
        pts.push_back({r * std::cos(th), r * std::sin(th)});
    }
    return pts;
}

// [OP] translate_inclusion_check: membership form of Omega_A subset of
// Omega_A - s*p, checked on the given samples.
inline bool translate_inclusion_check(const ConeDomain& cone, Direction p, double s,
                                      const std::vector<Point2>& samples) {
    if (!(s > 0.0)) throw InvalidSpec("translation length must be positive");
    Point2 shift = s * p.unit();
    for (const Point2& x : samples) {
        if (cone.indicator(x) && !cone.indicator(x + shift)) return false;
    }
    return true;
}

// Sandwich domain: Omega_A subset Omega subset Omega_A - h*p, with Omega an
// arbitrary indicator.
struct SandwichSpec {
    RegionSet base;
    Direction apex_dir;                        // p
    double offset = 0.0;                       // h > 0
    std::function<bool(Point2)> omega;         // the domain Omega itself
};

struct SandwichReport {
    bool pass = false;
    std::vector<Point2> witnesses; // points violating one of the inclusions
};

// [OP] sandwich_check: sampling-based verification of both inclusions in the
// ball of radius radius_cap. Exact verification is out of reach for an
// arbitrary indicator.
inline SandwichReport sandwich_check(const SandwichSpec& spec, std::size_t sample_count,
                                     double radius_cap) {
    if (sample_count < 1) throw InvalidSpec("sample_count must be >= 1");
    bool star = false;
    try {
        star = is_starshaped(spec.base, spec.apex_dir);
    } catch (const InvalidSpec&) {
        star = false;
    }
    if (!star) throw InvalidSpec("sandwich base is not starshaped w.r.t. p");
    if (!(spec.offset > 0.0)) throw InvalidSpec("sandwich offset h must be positive");

    ConeDomain cone(spec.base);
    Point2 hp = spec.offset * spec.apex_dir.unit();
    SandwichReport report;
    constexpr std::size_t max_witnesses = 16;
    for (const Point2& x : disk_samples(sample_count, radius_cap)) {
        bool ok = true;
        if (cone.indicator(x) && !spec.omega(x)) ok = false;              // Omega_A subset Omega
        if (ok && spec.omega(x) && !cone.indicator(x + hp)) ok = false;   // Omega subset Omega_A - hp
        if (!ok && report.witnesses.size() < max_witnesses) report.witnesses.push_back(x);
    }
    report.pass = report.witnesses.empty();
    return report;
}

// Alternating shell construction: radii r_0 = 0, r_n = delta * R^(n-1);
// even shells carry the inner base A, odd shells the outer base B.
struct OscillatoryDomainSpec {
    ArcRegion inner;  // A
    ArcRegion outer;  // B
    double delta = 0.0;
    double ratio = 0.0;                  // R
    std::optional<int> shell_cap;        // nullopt = unbounded (truncated, see below)

    // Unbounded specs are truncated: radii overflow double near R^300.
    static constexpr int default_cap = 32;

    OscillatoryDomainSpec() = default;
    OscillatoryDomainSpec(ArcRegion a, ArcRegion b, double d, double r,
                          std::optional<int> cap = default_cap)
        : inner(a), outer(b), delta(d), ratio(r), shell_cap(cap) {
        if (!(delta > 0.0) || !(delta < 1.0)) throw InvalidSpec("delta must lie in (0,1)");
        if (!(ratio > 1.0)) throw InvalidSpec("R must exceed 1");
        if (!ArcRegion::subset(inner, outer)) throw InvalidSpec("A must be a subset of B");
        if (outer.half_width >= std::numbers::pi - direction_tol)
            throw InvalidSpec("B must be a proper subset of the circle");
        if (shell_cap && *shell_cap < 1) throw InvalidSpec("shell_cap must be positive");
    }

    int effective_shells() const {
        if (shell_cap) return *shell_cap;
        // largest n with delta * R^(n-1) finite
        int n = static_cast<int>(std::floor(std::log(1e300 / delta) / std::log(ratio)));
        return std::max(1, n);
    }
    bool truncated_unbounded() const { return !shell_cap.has_value(); }

    // outermost radius of the truncated union
    double support_radius() const { return shell_radius(*this, effective_shells()); }

    friend double shell_radius(const OscillatoryDomainSpec& spec, int n);
};

// [OP] shell_radius: r_0 = 0, r_n = delta * R^(n-1).
inline double shell_radius(const OscillatoryDomainSpec& spec, int n) {
    if (n < 0) throw InvalidSpec("shell index must be nonnegative");
    if (n == 0) return 0.0;
    return spec.delta * std::pow(spec.ratio, n - 1);
}

// [OP] oscillatory_indicator: interior of the truncated shell union. Open
// shells are included; the connecting circles carry the smaller base A so
// consecutive shells over A subset B stay connected.
inline bool oscillatory_indicator(const OscillatoryDomainSpec& spec, Point2 x) {
    double r = norm(x);
    if (!(r > 0.0)) return false;
    int shells = spec.effective_shells();
    double outer_r = shell_radius(spec, shells);
    if (r >= outer_r) return false;
    double theta = std::atan2(x.y, x.x);
    for (int n = 0; n < shells; ++n) {
        double lo = shell_radius(spec, n);
        double hi = shell_radius(spec, n + 1);
        if (r > hi) continue;
        if (r == lo && n >= 1) return spec.inner.contains_interior(theta);
        const ArcRegion& base = (n % 2 == 0) ? spec.inner : spec.outer;
        return base.contains_interior(theta);
    }
    return false;
}

enum class DomainKind { cone, sandwich, oscillatory, custom };

// Indicator-function representation of Omega, with an optional bounding
// radius for domains of compact support (used by truncation budgets).
struct PhaseDomain {
    DomainKind kind = DomainKind::custom;
    std::function<bool(Point2)> indicator;
    std::optional<double> support_radius;

    bool operator()(Point2 x) const { return indicator(x); }

    static PhaseDomain from_cone(ConeDomain cone) {
        return {DomainKind::cone,
                [c = std::move(cone)](Point2 x) { return c.indicator(x); },
                std::nullopt};
    }
    static PhaseDomain from_sandwich(const SandwichSpec& spec) {
        return {DomainKind::sandwich, spec.omega, std::nullopt};
    }
    static PhaseDomain from_oscillatory(OscillatoryDomainSpec spec) {
        double cap = spec.support_radius();
        return {DomainKind::oscillatory,
                [s = std::move(spec)](Point2 x) { return oscillatory_indicator(s, x); },
                cap};
    }
    static PhaseDomain custom(std::function<bool(Point2)> f,
                              std::optional<double> support = std::nullopt) {
        return {DomainKind::custom, std::move(f), support};
    }
};

// [OP] rescale_domain: Omega^k = {x : kx in Omega}.
inline PhaseDomain rescale_domain(const PhaseDomain& domain, double k) {
    if (!(k > 0.0)) throw InvalidSpec("rescale factor must be positive");
    std::optional<double> support;
    if (domain.support_radius) support = *domain.support_radius / k;
    return {domain.kind,
            [f = domain.indicator, k](Point2 x) { return f(k * x); },
            support};
}

// Two-phase conductivity: sigma_plus inside Omega, sigma_minus outside,
// with global bounds m <= sigma <= M.
struct ConductivityField {
    double sigma_plus = 1.0;
    double sigma_minus = 1.0;
    PhaseDomain domain;
    double m = 0.0;
    double M = 0.0;

    ConductivityField(double sp, double sm, PhaseDomain dom,
                      std::optional<double> lower = std::nullopt,
                      std::optional<double> upper = std::nullopt)
        : sigma_plus(sp), sigma_minus(sm), domain(std::move(dom)) {
        if (!(sp > 0.0) || !(sm > 0.0)) throw InvalidSpec("conductivities must be positive");
        m = lower.value_or(std::min(sp, sm));
        M = upper.value_or(std::max(sp, sm));
        if (!(m > 0.0) || m > std::min(sp, sm) + 1e-15 || M < std::max(sp, sm) - 1e-15)
            throw InvalidSpec("bounds must satisfy 0 < m <= sigma <= M");
    }

    double sigma_max() const { return std::max(sigma_plus, sigma_minus); }
};

// [OP] conductivity_at
inline double conductivity_at(const ConductivityField& field, Point2 x) {
    return field.domain(x) ? field.sigma_plus : field.sigma_minus;
}

} // namespace heatlab::geometry
