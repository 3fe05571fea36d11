#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "hrv/mc.hpp"

using namespace hrv;
using namespace hrv::testing;

namespace {

SimulationConfig quick_cfg(std::int64_t n, std::uint64_t seed = 1, std::int64_t burn_in = 2000) {
    SimulationConfig cfg;
    cfg.n_samples = n;
    cfg.seed = seed;
    cfg.burn_in = burn_in;
    cfg.workers = 1;
    return cfg;
}

double alpha_norm(const std::vector<double>& x, const std::vector<double>& alpha) {
    double v = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        v = std::max(v, std::pow(std::abs(x[i]), alpha[i]));
    return v;
}

}  // namespace

TEST_CASE("constant recursion reaches its fixed point") {
    const ModelSpec spec = constant_spec({0.5, 0.5}, {1.0, 2.0});
    const SampleBatch batch = simulate_stationary(spec, unit_alpha(spec), quick_cfg(500));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(batch.x(i, 0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(batch.x(i, 1) == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("independent coefficients give the fixed-point mean") {
    // B constant, E A = 1/2, so E X_i = B_i / (1 - E A_i)
    const ModelSpec spec = ccc_garch_spec(0.3, {1.0, 2.0}, {0.25, 0.25}, {0.25, 0.25});
    const TailIndices ti = solve_tail_indices(spec);
    const SampleBatch batch = simulate_stationary(spec, ti, quick_cfg(400000));
    MeanVar m1, m2;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        m1.add(batch.x(i, 0));
        m2.add(batch.x(i, 1));
    }
    CHECK(std::abs(m1.mean() - 2.0) < 3.5 * m1.stderr_mean());
    CHECK(std::abs(m2.mean() - 4.0) < 3.5 * m2.stderr_mean());
}

TEST_CASE("noncontracting recursions are refused") {
    const ModelSpec spec = constant_spec({1.1, 0.5}, {1.0, 1.0});
    CHECK_THROWS_AS(simulate_stationary(spec, unit_alpha(spec), quick_cfg(100)),
                    NonContractingError);
}

TEST_CASE("truncated series") {
    SUBCASE("one term reproduces the additive part exactly") {
        const ModelSpec spec = constant_spec({0.5, 0.5}, {1.0, 2.0});
        const PerpetuityResult res =
            perpetuity_truncated(spec, unit_alpha(spec), 1, quick_cfg(100));
        for (std::size_t i = 0; i < res.batch.size(); ++i) {
            CHECK(res.batch.x(i, 0) == 1.0);
            CHECK(res.batch.x(i, 1) == 2.0);
        }
    }
    SUBCASE("constant model gives the geometric partial sum") {
        const ModelSpec spec = constant_spec({0.5, 0.25}, {1.0, 2.0});
        const int n_terms = 7;
        const PerpetuityResult res =
            perpetuity_truncated(spec, unit_alpha(spec), n_terms, quick_cfg(10));
        const double want0 = 1.0 * (1.0 - std::pow(0.5, n_terms)) / 0.5;
        const double want1 = 2.0 * (1.0 - std::pow(0.25, n_terms)) / 0.75;
        for (std::size_t i = 0; i < res.batch.size(); ++i) {
            CHECK(res.batch.x(i, 0) == doctest::Approx(want0).epsilon(1e-14));
            CHECK(res.batch.x(i, 1) == doctest::Approx(want1).epsilon(1e-14));
        }
        CHECK(res.remainder_estimate[0] > 0);
    }
    SUBCASE("series and forward recursion agree in distribution") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
        const TailIndices ti = solve_tail_indices(spec);
        const SampleBatch fwd = simulate_stationary(spec, ti, quick_cfg(100000, 3));
        const PerpetuityResult series =
            perpetuity_truncated(spec, ti, 200, quick_cfg(100000, 4));
        CHECK(batch_ks_distance(fwd, series.batch, 0) < 0.01);
        CHECK(batch_ks_distance(fwd, series.batch, 1) < 0.01);
    }
}

TEST_CASE("polar geometry invariants hold on samples") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.25, 0.4);
    const TailIndices ti = solve_tail_indices(spec);
    const SampleBatch batch = simulate_stationary(spec, ti, quick_cfg(2000, 9));
    const auto& alpha = batch.per_coord_alpha();
    RandomStream aux(55);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double s = batch.polar_s(i);
        // round trip x = s^{1/alpha} omega
        for (int j = 0; j < batch.dim(); ++j) {
            const double back = std::pow(s, 1.0 / alpha[j]) * batch.omega(i, j);
            CHECK(std::abs(back - batch.x(i, j)) <=
                  1e-12 * std::max(1.0, std::abs(batch.x(i, j))));
        }
        // the direction lies on the unit sphere of the norm-like function
        const double os =
            std::max(std::pow(std::abs(batch.omega(i, 0)), alpha[0]),
                     std::pow(std::abs(batch.omega(i, 1)), alpha[1]));
        CHECK(os == doctest::Approx(1.0).epsilon(1e-12));
        // homogeneity at a random scale
        const double t = 0.1 + 3.0 * aux.uniform();
        const std::vector<double> scaled{std::pow(t, 1.0 / alpha[0]) * batch.x(i, 0),
                                         std::pow(t, 1.0 / alpha[1]) * batch.x(i, 1)};
        const std::vector<double> raw{batch.x(i, 0), batch.x(i, 1)};
        CHECK(std::abs(alpha_norm(scaled, alpha) - t * alpha_norm(raw, alpha)) <=
              1e-12 * std::max(1.0, t * alpha_norm(raw, alpha)));
    }
}

TEST_CASE("within-block norm identity") {
    const ModelSpec spec = bekk_spec();
    const TailIndices ti = solve_tail_indices(spec);
    RandomStream stream(21);
    for (int k = 0; k < 2000; ++k) {
        const AbDraw d = sample_ab(spec, stream);
        const Vec2 u = d.exponent_scaled(ti.alpha);
        const std::vector<double> x{stream.normal() * 3.0, stream.normal() * 3.0};
        for (int j = 0; j < 2; ++j) {
            const double lhs = std::pow(std::abs(d.a[j] * x[j]), ti.alpha[j]);
            const double rhs = std::exp(u[j]) * std::pow(std::abs(x[j]), ti.alpha[j]);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, 1e-300));
        }
    }
}

TEST_CASE("tilted sampling") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
    const TailIndices ti = solve_tail_indices(spec);
    const MgfEvaluator ev(spec, ti, Backend::ClosedForm);
    const Vec2 xi_star{0.625, 0.625};

    SUBCASE("identity tilt reproduces the base law") {
        const EsscherTilt tilt = make_tilt(ev, {0.0, 0.0});
        RandomStream s1(5), s2(6);
        std::vector<double> tilted, base;
        for (int i = 0; i < 100000; ++i) {
            tilted.push_back(tilted_step(spec, ti, tilt, s1).u[0]);
            base.push_back(sample_ab(spec, s2).exponent_scaled(ti.alpha)[0]);
        }
        CHECK(ks_distance(tilted, base) < 0.01);
    }
    SUBCASE("tilted mean matches the linear-shift closed form") {
        const EsscherTilt tilt = make_tilt(ev, xi_star);
        const auto& p = spec.log_gaussian();
        const Vec2 theta{xi_star[0] * ti.alpha[0], xi_star[1] * ti.alpha[1]};
        const Vec2 want{ti.alpha[0] * (p.m[0] + (p.C.mul(theta))[0]),
                        ti.alpha[1] * (p.m[1] + (p.C.mul(theta))[1])};
        RandomStream stream(8);
        MeanVar u1, u2;
        for (int i = 0; i < 200000; ++i) {
            const TiltedStep st = tilted_step(spec, ti, tilt, stream);
            u1.add(st.u[0]);
            u2.add(st.u[1]);
        }
        CHECK(std::abs(u1.mean() - want[0]) < 3.5 * u1.stderr_mean());
        CHECK(std::abs(u2.mean() - want[1]) < 3.5 * u2.stderr_mean());
        // drift identity against the gradient at a unit-level point
        CHECK(std::abs(u1.mean() - ev.grad_phi(xi_star)[0]) < 3.5 * u1.stderr_mean());
        CHECK(std::abs(u2.mean() - ev.grad_phi(xi_star)[1]) < 3.5 * u2.stderr_mean());
    }
    SUBCASE("drift components agree at the critical point") {
        const EsscherTilt tilt = make_tilt(ev, xi_star);
        RandomStream stream(12);
        MeanVar diff;
        for (int i = 0; i < 200000; ++i) {
            const TiltedStep st = tilted_step(spec, ti, tilt, stream);
            diff.add(st.u[0] - st.u[1]);
        }
        CHECK(std::abs(diff.mean()) < 3.5 * diff.stderr_mean());
    }
    SUBCASE("rejection path: ccc-garch identity tilt matches the base law") {
        const ModelSpec garch = ccc_garch_spec(0.5);
        const TailIndices gti = solve_tail_indices(garch);
        const MgfEvaluator gev(garch, gti, Backend::Quadrature);
        const EsscherTilt tilt = make_tilt(gev, {0.0, 0.0});
        RandomStream s1(5), s2(6);
        std::vector<double> tilted, base;
        for (int i = 0; i < 50000; ++i) {
            tilted.push_back(tilted_step(garch, gti, tilt, s1).u[1]);
            base.push_back(sample_ab(garch, s2).exponent_scaled(gti.alpha)[1]);
        }
        CHECK(ks_distance(tilted, base) < 0.012);
    }
    SUBCASE("walks carry cumulative sums and signs") {
        const ModelSpec bekk = bekk_spec();
        const TailIndices bti = solve_tail_indices(bekk);
        const MgfEvaluator bev(bekk, bti, Backend::Quadrature);
        const EsscherTilt tilt = make_tilt(bev, {0.0, 0.0});
        RandomStream stream(31);
        const WalkPath path = tilted_walk(bekk, bti, tilt, 50, stream);
        REQUIRE(path.s.size() == 50);
        REQUIRE(path.l.size() == 50);
        bool saw_negative = false;
        for (const auto& l : path.l)
            for (int s : l)
                if (s < 0) saw_negative = true;
        CHECK(saw_negative);
    }
    SUBCASE("a stalled rejection window is reported") {
        ModelSpec wrapped;
        wrapped.family = Family::Custom;
        CustomParams p;
        p.dim = 2;
        p.ab_independent = true;
        p.sampler = [](RandomStream& rs, std::vector<double>& a, std::vector<double>& b) {
            const double n1 = rs.normal(), n2 = rs.normal();
            a = {std::exp(-0.5 + n1), std::exp(-0.5 + 0.5 * n1 + std::sqrt(0.75) * n2)};
            b = {1.0, 1.0};
        };
        wrapped.params = p;
        const TailIndices wti = unit_alpha(wrapped);
        EvaluatorOptions mco;
        mco.mc_samples = 200000;
        const MgfEvaluator wev(wrapped, wti, Backend::MonteCarlo, mco);
        TiltOptions topts;
        topts.certify_tol = 0.02;
        topts.custom_u_cap = {25.0, 25.0};  // absurd bound: acceptance collapses
        CHECK_THROWS_AS(make_tilt(wev, {2.0 / 3.0, 2.0 / 3.0}, topts), RejectionStallError);
    }
}

TEST_CASE("joint exceedance estimates") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
    const TailIndices ti = solve_tail_indices(spec);
    const MgfEvaluator ev(spec, ti, Backend::ClosedForm);
    const Vec2 xi_star{0.625, 0.625};

    SUBCASE("crude and tilted estimators agree at a small level") {
        ExceedanceOptions opts;
        opts.n_paths = 200000;
        opts.seed = 17;
        const JointExceedanceResult res =
            joint_exceedance_prob(spec, ti, ev, xi_star, 5.0, 1.0, opts);
        REQUIRE(res.crude.has_value());
        const double se =
            std::hypot(res.importance.stderr, res.crude->stderr);
        CHECK(std::abs(res.importance.value - res.crude->value) < 3.0 * se);
        CHECK(res.importance.value > 0);
    }
    SUBCASE("epsilon shrinks the target and the estimate monotonically") {
        ExceedanceOptions opts;
        opts.n_paths = 50000;
        opts.seed = 18;
        const double p1 =
            joint_exceedance_prob(spec, ti, ev, xi_star, 100.0, 1.0, opts).importance.value;
        const double p2 =
            joint_exceedance_prob(spec, ti, ev, xi_star, 100.0, 2.0, opts).importance.value;
        CHECK(p2 < p1);
    }
    SUBCASE("scaled estimates stay positive over three decades") {
        ExceedanceOptions opts;
        opts.n_paths = 30000;
        opts.seed = 19;
        for (double t : {100.0, 1000.0, 10000.0}) {
            const JointExceedanceResult res =
                joint_exceedance_prob(spec, ti, ev, xi_star, t, 1.0, opts);
            const double scaled = std::pow(t, xi_star[0] + xi_star[1]) *
                                  std::sqrt(std::log(t)) * res.importance.value;
            CHECK(scaled > 0.0);
        }
    }
    SUBCASE("estimates are identical for any worker count") {
        ExceedanceOptions o1, o3;
        o1.n_paths = o3.n_paths = 30000;
        o1.seed = o3.seed = 23;
        o1.workers = 1;
        o3.workers = 3;
        const auto r1 = joint_exceedance_prob(spec, ti, ev, xi_star, 50.0, 1.0, o1);
        const auto r3 = joint_exceedance_prob(spec, ti, ev, xi_star, 50.0, 1.0, o3);
        CHECK(r1.importance.value == r3.importance.value);
        CHECK(r1.importance.stderr == r3.importance.stderr);
    }
}

TEST_CASE("walk box probabilities") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
    const TailIndices ti = solve_tail_indices(spec);
    const MgfEvaluator ev(spec, ti, Backend::ClosedForm);
    const Vec2 xi_star{0.625, 0.625};
    ExceedanceOptions opts;
    opts.n_paths = 200000;
    opts.seed = 29;

    SUBCASE("monte carlo and the gaussian local term agree to a factor of two") {
        const WalkBoxResult res = walk_box_prob(spec, ti, ev, xi_star, 1000.0, 0, 1.0, opts);
        REQUIRE_FALSE(res.mc.zero_hits);
        const double ratio = res.mc.value / res.gauss;
        CHECK(ratio > 0.5);
        CHECK(ratio < 2.0);
    }
    SUBCASE("shifting the box outward lowers the probability") {
        const WalkBoxResult base = walk_box_prob(spec, ti, ev, xi_star, 1000.0, 0, 1.0, opts);
        const WalkBoxResult shifted =
            walk_box_prob(spec, ti, ev, xi_star, 1000.0, 0, 1.0, opts, {5.0, 5.0});
        CHECK(shifted.mc.value < base.mc.value);
    }
    SUBCASE("epsilon enters the gaussian term only through the leading weight") {
        const WalkBoxResult e1 = walk_box_prob(spec, ti, ev, xi_star, 1000.0, 0, 1.0, opts);
        const double e = std::exp(1.0);
        const WalkBoxResult ee = walk_box_prob(spec, ti, ev, xi_star, 1000.0, 0, e, opts);
        CHECK(ee.gauss / e1.gauss == doctest::Approx(std::exp(-xi_star[1])).epsilon(1e-13));
    }
    SUBCASE("tilted reweighting is unbiased for a fixed-step event") {
        const WalkBoxResult is = walk_box_prob(spec, ti, ev, xi_star, 5.0, 0, 1.0, opts);
        // crude estimate of the same box probability at the same fixed n
        RandomStream stream(4242);
        const double c1 = static_cast<double>(is.n0) * is.rho;
        MeanVar crude;
        for (int p = 0; p < 400000; ++p) {
            Vec2 s{0, 0};
            for (std::int64_t k = 0; k < is.n; ++k)
                s = add(s, sample_ab(spec, stream).exponent_scaled(ti.alpha));
            const bool hit = s[0] > c1 && s[0] < c1 + 1.0 && s[1] > c1 && s[1] < c1 + 1.0;
            crude.add(hit ? 1.0 : 0.0);
        }
        const double se = std::hypot(is.mc.stderr, crude.stderr_mean());
        CHECK(std::abs(is.mc.value - crude.mean()) < 3.0 * se);
    }
}

TEST_CASE("simulation output is worker-count invariant") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
    const TailIndices ti = solve_tail_indices(spec);
    SimulationConfig c1 = quick_cfg(30000, 77);
    SimulationConfig c4 = c1;
    c4.workers = 4;
    const SampleBatch b1 = simulate_stationary(spec, ti, c1);
    const SampleBatch b4 = simulate_stationary(spec, ti, c4);
    REQUIRE(b1.data().size() == b4.data().size());
    CHECK(b1.data() == b4.data());
}
