#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "hrv/levelset.hpp"

using namespace hrv;
using namespace hrv::testing;

namespace {

// Brute-force oracle: on an N x N grid over [0,1]^2, maximize xi1 + xi2 over
// the feasible points {phi <= 1}. Per row the feasible set is an interval
// starting at xi1 = 0 (phi(0, xi2) <= 1 and phi is convex in xi1), so the
// largest feasible grid column is found by bisection over grid indices.
Vec2 grid_argmax(const MgfEvaluator& ev, int n_grid) {
    Vec2 best{0, 0};
    double best_h = -1;
    for (int j = 0; j < n_grid; ++j) {
        const double xi2 = static_cast<double>(j) / (n_grid - 1);
        if (!(ev.phi({0.0, xi2}).value <= 1.0 + 1e-12)) continue;
        int lo = 0, hi = n_grid - 1;
        if (ev.phi({1.0, xi2}).value <= 1.0) {
            lo = n_grid - 1;
        } else {
            while (hi - lo > 1) {
                const int mid = (lo + hi) / 2;
                const double xi1 = static_cast<double>(mid) / (n_grid - 1);
                if (ev.phi({xi1, xi2}).value <= 1.0)
                    lo = mid;
                else
                    hi = mid;
            }
        }
        const double xi1 = static_cast<double>(lo) / (n_grid - 1);
        if (xi1 + xi2 > best_h) {
            best_h = xi1 + xi2;
            best = {xi1, xi2};
        }
    }
    return best;
}

}  // namespace

TEST_CASE("trace passes through the symmetric diagonal root") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::ClosedForm);
    const LevelSetTrace trace = trace_level_set(ev, 1e-2);
    double dist = 1e9;
    for (const Vec2& p : trace.points)
        dist = std::min(dist, norm(sub(p, {2.0 / 3.0, 2.0 / 3.0})));
    CHECK(dist < 1e-2);
    for (std::size_t i = 0; i < trace.points.size(); ++i) CHECK(trace.residuals[i] < 1e-8);
}

TEST_CASE("trace endpoints pin the axis intersections under positive dependence") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::ClosedForm);
    const LevelSetTrace trace = trace_level_set(ev, 1e-2);
    CHECK(std::abs(trace.endpoint_start[0] - 1.0) < 1e-6);
    CHECK(std::abs(trace.endpoint_start[1]) < 1e-6);
    CHECK(std::abs(trace.endpoint_end[0]) < 1e-6);
    CHECK(std::abs(trace.endpoint_end[1] - 1.0) < 1e-6);
    // interior points sit strictly above the unit simplex edge
    for (std::size_t i = 1; i + 1 < trace.points.size(); ++i)
        CHECK(trace.points[i][0] + trace.points[i][1] > 1.0 + 1e-9);
    // consecutive points respect the arc-length step bound
    for (std::size_t i = 1; i < trace.points.size(); ++i)
        CHECK(norm(sub(trace.points[i], trace.points[i - 1])) < 1.5e-2);
}

TEST_CASE("trace reports an open arc when positive dependence fails") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.2);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::ClosedForm);
    CHECK_THROWS_AS(trace_level_set(ev, 1e-2), OpenArcError);
}

TEST_CASE("critical point for the symmetric log-gaussian model") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::ClosedForm);
    const CriticalPoint cp = find_xi_star(ev, 1e-10);
    CHECK(cp.xi_star[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(cp.xi_star[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(cp.h == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(cp.certified.interior);
    CHECK(cp.certified.on_level);
    CHECK(cp.certified.parallel);
    CHECK(cp.h > 1.0);
    CHECK(cp.h < 2.0);
    CHECK(std::abs(cp.grad[0] - cp.grad[1]) <= 1e-10 * norm(cp.grad));
}

TEST_CASE("exchange-symmetric models have a diagonal critical point") {
    const ModelSpec spec = ccc_garch_spec(0.5);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::Quadrature);
    const CriticalPoint cp = find_xi_star(ev, 1e-9);
    CHECK(cp.xi_star[0] == doctest::Approx(cp.xi_star[1]).epsilon(1e-8));
}

TEST_CASE("critical point exists even when the arc leaves the square") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.2);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::ClosedForm);
    const CriticalPoint cp = find_xi_star(ev, 1e-10);
    // closed form: diagonal root of -s + (1+eta) s^2 = 0
    CHECK(cp.xi_star[0] == doctest::Approx(1.0 / 1.2).epsilon(1e-9));
    CHECK(cp.xi_star[1] == doctest::Approx(1.0 / 1.2).epsilon(1e-9));
}

TEST_CASE("ccc-garch critical point matches the dense-grid oracle") {
    const ModelSpec spec = ccc_garch_spec(0.5);
    const TailIndices ti = solve_tail_indices(spec);
    const MgfEvaluator ev(spec, ti, Backend::Quadrature);
    const CriticalPoint cp = find_xi_star(ev, 1e-9);

    EvaluatorOptions fast;
    fast.convergence_check = false;
    const MgfEvaluator oracle_ev(spec, ti, Backend::Quadrature, fast);
    const Vec2 grid = grid_argmax(oracle_ev, 2000);
    // The objective is flat along the arc, so the grid argmax pins the
    // attained maximum of h to grid resolution while its position may slide
    // along the level set by O(sqrt(grid step)).
    CHECK(std::abs(cp.h - (grid[0] + grid[1])) < 1e-3);
    CHECK(norm(sub(cp.xi_star, grid)) < 0.02);
}

TEST_CASE("h is unimodal along the arc and the solution sits at its argmax") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
    const MgfEvaluator ev(spec, solve_tail_indices(spec), Backend::ClosedForm);
    const double step = 1e-2;
    const LevelSetTrace trace = trace_level_set(ev, step);
    const CriticalPoint cp = find_xi_star(ev, 1e-10);

    std::size_t argmax = 0;
    for (std::size_t i = 0; i < trace.points.size(); ++i)
        if (trace.points[i][0] + trace.points[i][1] >
            trace.points[argmax][0] + trace.points[argmax][1])
            argmax = i;
    CHECK(norm(sub(cp.xi_star, trace.points[argmax])) < step);

    // no second local maximum beyond trace resolution
    const double tol = 1e-7;
    int direction_changes = 0;
    for (std::size_t i = 1; i + 1 < trace.points.size(); ++i) {
        const double prev = trace.points[i][0] + trace.points[i][1] -
                            (trace.points[i - 1][0] + trace.points[i - 1][1]);
        const double next = trace.points[i + 1][0] + trace.points[i + 1][1] -
                            (trace.points[i][0] + trace.points[i][1]);
        if (prev > tol && next < -tol) ++direction_changes;
    }
    CHECK(direction_changes <= 1);
}

TEST_CASE("monte carlo backends are refused") {
    const ModelSpec spec = log_gaussian_spec();
    EvaluatorOptions opts;
    opts.mc_samples = 10000;
    const MgfEvaluator mc(spec, solve_tail_indices(spec), Backend::MonteCarlo, opts);
    CHECK_THROWS_AS(trace_level_set(mc, 1e-2), UnsupportedError);
    CHECK_THROWS_AS(find_xi_star(mc, 1e-8), UnsupportedError);
}
