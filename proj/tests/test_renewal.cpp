#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hrv/renewal.hpp"

using namespace hrv;

namespace {

IncrementSpec gaussian_inc(Vec2 mean = {1.0, 1.0}) {
    IncrementSpec inc;
    inc.mean = mean;
    inc.cov = Mat2::identity();
    return inc;
}

RenewalOptions opts_n(std::uint64_t paths, std::uint64_t seed) {
    RenewalOptions o;
    o.n_paths = paths;
    o.seed = seed;
    o.workers = 0;
    return o;
}

}  // namespace

TEST_CASE("congruent disjoint regions collect equal mass") {
    const IncrementSpec inc = gaussian_inc();
    const std::vector<double> grid{60.0};
    const Rect left{-1.0, 0.0, 0.0, 1.0};
    const Rect right{0.0, 1.0, 0.0, 1.0};
    const RenewalEstimate a = renewal_measure_estimate(inc, left, grid, opts_n(40000, 1));
    const RenewalEstimate b = renewal_measure_estimate(inc, right, grid, opts_n(40000, 2));
    const double se = std::hypot(a.values[0].stderr, b.values[0].stderr);
    CHECK(a.values[0].value > 0);
    CHECK(std::abs(a.values[0].value - b.values[0].value) < 3.0 * se);
}

TEST_CASE("doubling the region area doubles the estimate") {
    const IncrementSpec inc = gaussian_inc();
    const std::vector<double> grid{60.0};
    const Rect unit{0.0, 1.0, 0.0, 1.0};
    const Rect twice{0.0, 1.0, -1.0, 1.0};
    const RenewalEstimate a = renewal_measure_estimate(inc, unit, grid, opts_n(40000, 3));
    const RenewalEstimate b = renewal_measure_estimate(inc, twice, grid, opts_n(40000, 4));
    const double se = std::hypot(2.0 * a.values[0].stderr, b.values[0].stderr);
    CHECK(std::abs(b.values[0].value - 2.0 * a.values[0].value) < 3.0 * se);
}

TEST_CASE("a region against the drift is never visited") {
    const IncrementSpec inc = gaussian_inc();
    for (double t : {20.0, 60.0}) {
        // absolute position -t*mean + [0,1]^2, expressed relative to +t*mean
        const Rect behind{-2.0 * t - 0.5, -2.0 * t + 0.5, -2.0 * t - 0.5, -2.0 * t + 0.5};
        const RenewalEstimate est =
            renewal_measure_estimate(inc, behind, {t}, opts_n(5000, 5));
        CHECK(est.values[0].value == 0.0);
        CHECK(est.values[0].zero_hits);
    }
}

TEST_CASE("decade stability of the scaled estimate") {
    const IncrementSpec inc = gaussian_inc();
    const std::vector<double> grid{40.0, 400.0};
    const RenewalEstimate est =
        renewal_measure_estimate(inc, {0.0, 1.0, 0.0, 1.0}, grid, opts_n(40000, 6));
    const double ratio = est.values[1].value / est.values[0].value;
    CHECK(ratio > 0.75);
    CHECK(ratio < 1.25);
}

TEST_CASE("zero drift is rejected") {
    CHECK_THROWS_AS(renewal_measure_estimate(gaussian_inc({0.0, 0.0}), {0, 1, 0, 1}, {10.0},
                                             opts_n(1000, 7)),
                    NonTransientError);
}

TEST_CASE("orthogonal-offset table") {
    const IncrementSpec inc = gaussian_inc();
    const std::vector<double> grid{25.0};
    const CarlssonTable table =
        carlsson_bound_check(inc, {0.0, 12.0}, grid, opts_n(60000, 8));
    REQUIRE(table.values.size() == 2);
    SUBCASE("offset zero reproduces the plain estimate") {
        const RenewalEstimate plain =
            renewal_measure_estimate(inc, {0.0, 1.0, 0.0, 1.0}, grid, opts_n(60000, 9));
        const double se = std::hypot(table.values[0][0].stderr, plain.values[0].stderr);
        CHECK(std::abs(table.values[0][0].value - plain.values[0].value) < 3.0 * se);
    }
    SUBCASE("values decay away from the drift axis") {
        CHECK(table.values[1][0].value < table.values[0][0].value);
    }
    SUBCASE("table is bounded and reported") {
        CHECK(std::isfinite(table.max_value));
        CHECK(table.max_value >= table.on_axis_max);
        CHECK(table.on_axis_max > 0);
    }
}

TEST_CASE("group-resolved renewal estimates") {
    IncrementSpec inc = gaussian_inc();
    inc.sign_law = {{{1, 1}, 0.5}, {{-1, -1}, 0.5}};  // Z2 acting diagonally

    SUBCASE("slices agree at the largest level") {
        const std::vector<double> grid{120.0};
        const RenewalEstimate est =
            group_renewal_estimate(inc, {0.0, 1.0, 0.0, 1.0}, grid, opts_n(60000, 10));
        REQUIRE(est.group.size() == 2);
        const Estimate& a = est.group_slices[0][0];
        const Estimate& b = est.group_slices[1][0];
        const double se = std::hypot(a.stderr, b.stderr);
        CHECK(a.value > 0);
        CHECK(std::abs(a.value - b.value) < 3.0 * se);
    }
    SUBCASE("slices sum to the sign-marginal estimate") {
        const std::vector<double> grid{30.0, 90.0};
        const RenewalEstimate est =
            group_renewal_estimate(inc, {0.0, 1.0, 0.0, 1.0}, grid, opts_n(20000, 11));
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double total = 0;
            for (std::size_t k = 0; k < est.group.size(); ++k)
                total += est.group_slices[k][j].value;
            CHECK(total == doctest::Approx(est.values[j].value).epsilon(1e-12));
        }
    }
    SUBCASE("trivial sign component gives a single slice equal to the plain estimate") {
        IncrementSpec plain_inc = gaussian_inc();
        plain_inc.sign_law = {{{1, 1}, 1.0}};
        const std::vector<double> grid{40.0};
        const RenewalEstimate grouped =
            group_renewal_estimate(plain_inc, {0.0, 1.0, 0.0, 1.0}, grid, opts_n(20000, 12));
        REQUIRE(grouped.group.size() == 1);
        CHECK(grouped.group_slices[0][0].value ==
              doctest::Approx(grouped.values[0].value).epsilon(1e-15));
    }
    SUBCASE("declared group larger than the support is a mismatch") {
        IncrementSpec bad = gaussian_inc();
        bad.sign_law = {{{1, 1}, 1.0}};
        bad.declared_group = {{1, 1}, {-1, -1}};
        CHECK_THROWS_AS(
            group_renewal_estimate(bad, {0.0, 1.0, 0.0, 1.0}, {10.0}, opts_n(1000, 13)),
            GroupMismatchError);
    }
}

TEST_CASE("path counts are worker-count invariant") {
    const IncrementSpec inc = gaussian_inc();
    RenewalOptions o1 = opts_n(8000, 14), o4 = opts_n(8000, 14);
    o1.workers = 1;
    o4.workers = 4;
    const RenewalEstimate a = renewal_measure_estimate(inc, {0, 1, 0, 1}, {30.0}, o1);
    const RenewalEstimate b = renewal_measure_estimate(inc, {0, 1, 0, 1}, {30.0}, o4);
    CHECK(a.values[0].value == b.values[0].value);
    CHECK(a.values[0].stderr == b.values[0].stderr);
}
