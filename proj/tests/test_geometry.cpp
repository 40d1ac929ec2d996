#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "heatlab/geometry.hpp"

using namespace heatlab;
using namespace heatlab::geometry;

namespace {

constexpr double pi = std::numbers::pi;

// Brute-force geodesic oracle: walk the shorter arc from every sampled point
// of the region toward p and require membership along the way.
bool starshaped_by_sampling(const RegionSet& region, Direction p, int samples = 4000) {
    for (int k = 0; k < samples; ++k) {
        double omega = two_pi * (k + 0.5) / samples;
        if (!region.contains(omega)) continue;
        double d = signed_offset(omega, p.angle());
        for (int s = 1; s <= 200; ++s) {
            double theta = omega + d * (static_cast<double>(s) / 200.0);
            if (!region.contains(theta)) return false;
        }
    }
    return true;
}

RegionSet single_arc(double center, double half_width) {
    return RegionSet({ArcRegion(Direction(center), half_width)});
}

} // namespace

TEST_CASE("direction canonicalization and antipode") {
    CHECK(Direction(two_pi + 0.25).angle() == Catch::Approx(0.25));
    CHECK(Direction(-0.25).angle() == Catch::Approx(two_pi - 0.25));
    CHECK(Direction(0.3).antipode().angle() == Catch::Approx(0.3 + pi));
    CHECK(Direction(pi + 0.3).antipode().angle() == Catch::Approx(0.3));
}

TEST_CASE("arc_measure") {
    CHECK(arc_measure(single_arc(0.0, pi / 4)) == Catch::Approx(pi / 2));
    RegionSet two({ArcRegion(Direction(0.0), pi / 8), ArcRegion(Direction(pi), pi / 8)});
    CHECK(arc_measure(two) == Catch::Approx(pi / 2));
    CHECK(arc_measure(RegionSet{}) == 0.0);
}

TEST_CASE("arc_measure bounds and strict subset monotonicity") {
    for (double w : {0.1, 0.5, 1.0, 2.0, 3.0}) {
        double m = arc_measure(single_arc(1.0, w));
        CHECK(m >= 0.0);
        CHECK(m <= two_pi);
    }
    CHECK(arc_measure(single_arc(0.7, 0.4)) < arc_measure(single_arc(0.7, 0.9)));
}

TEST_CASE("region set rejects overlapping arcs") {
    CHECK_THROWS_AS(RegionSet({ArcRegion(Direction(0.0), 1.0), ArcRegion(Direction(0.5), 1.0)}),
                    InvalidSpec);
    // touching within tolerance counts as overlap
    CHECK_THROWS_AS(RegionSet({ArcRegion(Direction(0.0), 0.5), ArcRegion(Direction(1.0), 0.5)}),
                    InvalidSpec);
}

TEST_CASE("is_starshaped on caps and split regions") {
    CHECK(is_starshaped(single_arc(0.0, pi / 3), Direction(0.0)));

    RegionSet split({ArcRegion(Direction(pi / 2), pi / 8), ArcRegion(Direction(-pi / 2), pi / 8)});
    CHECK_FALSE(is_starshaped(split, Direction(pi / 2)));

    // wide cap: endpoints still within distance < pi of p
    CHECK(is_starshaped(single_arc(0.0, 3 * pi / 4), Direction(0.0)));
    CHECK(starshaped_by_sampling(single_arc(0.0, 3 * pi / 4), Direction(0.0)));
}

TEST_CASE("is_starshaped agrees with the geodesic sampling oracle") {
    struct Case {
        double center, width, p;
    };
    // single arcs with p inside and the antipode outside
    for (auto [c, w, p] : {Case{0.0, 0.5, 0.2}, Case{1.0, 1.2, 0.4}, Case{2.0, 2.0, 2.5},
                           Case{4.0, 1.5, 5.2}}) {
        RegionSet region = single_arc(c, w);
        Direction pd(p);
        bool expected = starshaped_by_sampling(region, pd);
        CHECK(is_starshaped(region, pd) == expected);
    }
    // split regions: the oracle sees the geodesic leave the set
    RegionSet split({ArcRegion(Direction(0.0), 0.3), ArcRegion(Direction(1.5), 0.4)});
    CHECK_FALSE(starshaped_by_sampling(split, Direction(0.0)));
    CHECK_FALSE(is_starshaped(split, Direction(0.0)));
}

TEST_CASE("is_starshaped preconditions") {
    CHECK_THROWS_AS(is_starshaped(single_arc(0.0, 0.5), Direction(2.0)), PNotInRegion);
    // p at 1.2 inside the wide arc, its antipode 1.2 + pi wraps back inside too
    CHECK_THROWS_AS(is_starshaped(single_arc(0.0, 2.0), Direction(1.2)), AntipodeInRegion);
}

TEST_CASE("cone_indicator") {
    ConeDomain cone(single_arc(0.0, pi / 4));
    CHECK(cone_indicator(cone, {1.0, 0.0}));
    CHECK_FALSE(cone_indicator(cone, {0.0, 1.0}));
    CHECK_FALSE(cone_indicator(cone, {0.0, 0.0})); // r > 0 is strict
}

TEST_CASE("cone scale invariance") {
    ConeDomain cone(single_arc(0.4, 0.6));
    for (const Point2& x : disk_samples(2000, 5.0)) {
        if (norm(x) == 0.0) continue;
        for (double k : {0.25, 3.0, 17.0})
            CHECK(cone_indicator(cone, x) == cone_indicator(cone, k * x));
    }
}

TEST_CASE("cone base must leave boundary nonempty") {
    CHECK_THROWS_AS(ConeDomain(single_arc(0.0, pi)), InvalidSpec);
}

TEST_CASE("translate_inclusion_check") {
    auto samples = disk_samples(20000, 10.0);

    ConeDomain star(single_arc(0.0, pi / 3));
    for (double s : {0.01, 0.5, 3.0})
        CHECK(translate_inclusion_check(star, Direction(0.0), s, samples));

    // starshaped translate law on a generic starshaped base
    ConeDomain star2(single_arc(1.1, 2.2));
    for (double s : {0.1, 1.0}) CHECK(translate_inclusion_check(star2, Direction(1.1), s, samples));

    // two disjoint arcs: translating a point of the lower arc toward p lands
    // in the angular gap between the arcs
    RegionSet split({ArcRegion(Direction(pi / 2), pi / 8), ArcRegion(Direction(-pi / 2), pi / 8)});
    ConeDomain bad(split);
    std::vector<Point2> witness = {{0.3, -0.9}};
    CHECK_FALSE(translate_inclusion_check(bad, Direction(pi / 2), 1.0, witness));

    CHECK_THROWS_AS(translate_inclusion_check(star, Direction(0.0), 0.0, samples), InvalidSpec);
}

TEST_CASE("sandwich_check accepts the cone and its translates") {
    RegionSet base = single_arc(0.0, pi / 3);
    ConeDomain cone(base);
    Direction p(0.0);
    double h = 0.4;

    SandwichSpec as_cone{base, p, h, [cone](Point2 x) { return cone.indicator(x); }};
    CHECK(sandwich_check(as_cone, 20000, 20.0).pass);

    Point2 shift = (h / 2) * p.unit();
    SandwichSpec mid{base, p, h, [cone, shift](Point2 x) { return cone.indicator(x + shift); }};
    CHECK(sandwich_check(mid, 20000, 20.0).pass);
}

TEST_CASE("sandwich_check finds witnesses outside the slab") {
    RegionSet base = single_arc(0.0, pi / 3);
    ConeDomain cone(base);
    Direction p(0.0);
    double h = 0.4;
    Point2 ball_center = 10.0 * Point2{0.0, 1.0}; // along the perpendicular of p
    auto omega = [cone, ball_center](Point2 x) {
        double dx = x.x - ball_center.x, dy = x.y - ball_center.y;
        return cone.indicator(x) || dx * dx + dy * dy < 1.0;
    };
    SandwichSpec spec{base, p, h, omega};
    auto report = sandwich_check(spec, 200000, 20.0);
    CHECK_FALSE(report.pass);
    REQUIRE_FALSE(report.witnesses.empty());
    for (const Point2& w : report.witnesses) {
        double d = norm(w - ball_center);
        CHECK(d < 1.0 + 1e-9);
    }
}

TEST_CASE("sandwich_check rejects non-starshaped bases") {
    RegionSet split({ArcRegion(Direction(pi / 2), pi / 8), ArcRegion(Direction(-pi / 2), pi / 8)});
    SandwichSpec spec{split, Direction(pi / 2), 0.3, [](Point2) { return true; }};
    CHECK_THROWS_AS(sandwich_check(spec, 100, 5.0), InvalidSpec);
}

TEST_CASE("shell_radius") {
    OscillatoryDomainSpec spec(ArcRegion(Direction(0.0), pi / 8), ArcRegion(Direction(0.0), pi / 2),
                               0.3, 4.0);
    CHECK(shell_radius(spec, 0) == 0.0);
    CHECK(shell_radius(spec, 1) == Catch::Approx(0.3));
    CHECK(shell_radius(spec, 3) == Catch::Approx(4.8));
    for (int n = 1; n < 12; ++n)
        CHECK(shell_radius(spec, n + 1) / shell_radius(spec, n) == Catch::Approx(4.0));
}

TEST_CASE("oscillatory_indicator membership") {
    // arc measures pi/8 and pi/2, so half-widths pi/16 and pi/4
    OscillatoryDomainSpec spec(ArcRegion(Direction(0.0), pi / 16),
                               ArcRegion(Direction(0.0), pi / 4), 0.3, 4.0);
    // inside E_0
    CHECK(oscillatory_indicator(spec, {0.1 * std::cos(0.0), 0.1 * std::sin(0.0)}));
    // radius 0.6 in [0.3, 1.2], angle 0.4 lies in B but not A -> inside E_1
    CHECK(oscillatory_indicator(spec, {0.6 * std::cos(0.4), 0.6 * std::sin(0.4)}));
    // same radius, angle outside B
    CHECK_FALSE(oscillatory_indicator(spec, {0.6 * std::cos(1.5), 0.6 * std::sin(1.5)}));
    // origin is not interior
    CHECK_FALSE(oscillatory_indicator(spec, {0.0, 0.0}));
}

TEST_CASE("oscillatory_indicator connecting circles carry the smaller base") {
    OscillatoryDomainSpec spec(ArcRegion(Direction(0.0), pi / 16),
                               ArcRegion(Direction(0.0), pi / 4), 0.3, 4.0);
    double r1 = shell_radius(spec, 1);
    CHECK(oscillatory_indicator(spec, {r1 * std::cos(0.1), r1 * std::sin(0.1)}));  // in A
    CHECK_FALSE(
        oscillatory_indicator(spec, {r1 * std::cos(0.5), r1 * std::sin(0.5)}));    // in B \ A
    // outermost truncation circle is excluded
    double rc = spec.support_radius();
    CHECK_FALSE(oscillatory_indicator(spec, {rc, 0.0}));
}

TEST_CASE("oscillatory nesting: the cone over A is contained in the union") {
    OscillatoryDomainSpec spec(ArcRegion(Direction(0.2), 0.3), ArcRegion(Direction(0.1), 1.0), 0.45,
                               3.0, 6);
    double rmax = spec.support_radius();
    for (const Point2& x : disk_samples(5000, rmax * 0.999)) {
        double r = norm(x);
        if (r <= 0.0 || r >= rmax) continue;
        double theta = std::atan2(x.y, x.x);
        if (spec.inner.contains_interior(theta)) CHECK(oscillatory_indicator(spec, x));
    }
}

TEST_CASE("conductivity_at") {
    PhaseDomain cone = PhaseDomain::from_cone(ConeDomain(single_arc(0.0, pi / 4)));
    ConductivityField field(2.0, 1.0, cone);
    CHECK(conductivity_at(field, {1.0, 0.0}) == 2.0);
    CHECK(conductivity_at(field, {-1.0, 0.0}) == 1.0);

    ConductivityField flat(3.0, 3.0, PhaseDomain::custom([](Point2) { return false; }));
    CHECK(conductivity_at(flat, {0.4, 0.2}) == 3.0);
}

TEST_CASE("conductivity bounds validation") {
    PhaseDomain all = PhaseDomain::custom([](Point2) { return true; });
    CHECK_THROWS_AS(ConductivityField(2.0, 1.0, all, 1.5, 2.0), InvalidSpec);
    CHECK_THROWS_AS(ConductivityField(2.0, 1.0, all, 1.0, 1.5), InvalidSpec);
    CHECK_NOTHROW(ConductivityField(2.0, 1.0, all, 0.5, 4.0));
}

TEST_CASE("rescale_domain") {
    PhaseDomain cone = PhaseDomain::from_cone(ConeDomain(single_arc(0.3, 0.7)));
    PhaseDomain scaled = rescale_domain(cone, 7.0);
    for (const Point2& x : disk_samples(2000, 4.0))
        CHECK(cone(x) == scaled(x));

    PhaseDomain ball = PhaseDomain::custom(
        [](Point2 x) { return x.x * x.x + x.y * x.y < 1.0; }, 1.0);
    PhaseDomain half = rescale_domain(ball, 2.0);
    CHECK(half({0.49, 0.0}));
    CHECK_FALSE(half({0.51, 0.0}));
    REQUIRE(half.support_radius.has_value());
    CHECK(*half.support_radius == Catch::Approx(0.5));
}

TEST_CASE("rescaled sandwich converges pointwise to the cone") {
    RegionSet base = single_arc(0.0, pi / 3);
    ConeDomain cone(base);
    Point2 shift = 0.25 * Direction(0.0).unit();
    PhaseDomain sandwich = PhaseDomain::from_sandwich(
        SandwichSpec{base, Direction(0.0), 0.5,
                     [cone, shift](Point2 x) { return cone.indicator(x + shift); }});
    // points where sandwich and cone disagree at k = 1 but agree for large k
    std::vector<Point2> pts = {{-0.2, 0.0}, {1.0, 1.9}, {0.05, -0.07}};
    for (const Point2& x : pts) {
        PhaseDomain big = rescale_domain(sandwich, 4096.0);
        CHECK(big(x) == cone.indicator(x));
    }
}
