#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "hrv/mgf.hpp"
#include "hrv/quadrature.hpp"

using namespace hrv;
using namespace hrv::testing;

TEST_CASE("tail index solutions") {
    SUBCASE("ccc-garch b=c=1/2 gives alpha = 1 by quadrature") {
        SolveReport rep;
        const double a1 = solve_alpha(ccc_garch_spec(0.5), 0, 1e-10, &rep);
        CHECK(a1 == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(rep.residual < 1e-10);
        CHECK(rep.method == "quadrature");
    }
    SUBCASE("log-gaussian unit variances give alpha_i = -2 m_i") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.25, 0.3);
        CHECK(solve_alpha(spec, 0, 1e-12) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(solve_alpha(spec, 1, 1e-12) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("constant |a| < 1 has no root") {
        CHECK_THROWS_AS(solve_alpha(constant_spec({0.9, 0.9}, {1.0, 1.0}), 0, 1e-10), NoRootError);
    }
    SUBCASE("nonnegative log drift is refused") {
        CHECK_THROWS_AS(solve_alpha(constant_spec({1.5, 0.5}, {1.0, 1.0}), 0, 1e-10),
                        NegativeDriftError);
    }
    SUBCASE("bekk marginal root via the closed form") {
        SolveReport rep;
        const double a1 = solve_alpha(bekk_spec(), 0, 1e-10, &rep);
        CHECK(rep.method == "closed_form");
        // check the defining equation with an independent log-domain quadrature
        const double sigma = std::sqrt(0.85 * 0.85 + 0.35 * 0.35);
        CHECK(abs_normal_moment_oracle(a1, sigma) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("phi evaluation across backends") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
    const TailIndices ti = solve_tail_indices(spec);
    const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
    const MgfEvaluator quad(spec, ti, Backend::Quadrature);
    EvaluatorOptions mco;
    mco.mc_samples = 400000;
    const MgfEvaluator mc(spec, ti, Backend::MonteCarlo, mco);

    SUBCASE("normalizations") {
        CHECK(closed.phi({0, 0}).value == 1.0);
        CHECK(closed.phi({1, 0}).value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(closed.phi({0, 1}).value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(quad.phi({0, 0}).value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(quad.phi({1, 0}).value == doctest::Approx(1.0).epsilon(1e-12));
        const ValueWithError m0 = mc.phi({0, 0});
        CHECK(m0.value == doctest::Approx(1.0).epsilon(1e-9));
        const ValueWithError m1 = mc.phi({1, 0});
        CHECK(std::abs(m1.value - 1.0) < 3.0 * m1.stderr + 1e-12);
    }
    SUBCASE("diagonal root of the quadratic is on the level set") {
        CHECK(closed.phi({2.0 / 3.0, 2.0 / 3.0}).value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(quad.phi({2.0 / 3.0, 2.0 / 3.0}).value == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("quadrature matches the closed form away from the level set") {
        for (const Vec2 xi : {Vec2{0.3, 0.8}, Vec2{0.9, 0.1}, Vec2{0.5, 0.5}})
            CHECK(quad.phi(xi).value == doctest::Approx(closed.phi(xi).value).epsilon(1e-10));
    }
}

TEST_CASE("phi for ccc-garch and bekk quadrature agrees with monte carlo") {
    for (const ModelSpec& spec : {ccc_garch_spec(0.5), bekk_spec()}) {
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator quad(spec, ti, Backend::Quadrature);
        EvaluatorOptions mco;
        mco.mc_samples = 400000;
        const MgfEvaluator mc(spec, ti, Backend::MonteCarlo, mco);
        for (const Vec2 xi : {Vec2{0.5, 0.5}, Vec2{0.8, 0.3}, Vec2{1.0, 1.0}}) {
            const ValueWithError q = quad.phi(xi);
            const ValueWithError m = mc.phi(xi);
            CHECK(std::abs(q.value - m.value) < 4.0 * m.stderr + 1e-6);
        }
        CHECK(quad.phi({0, 0}).value == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(quad.phi({1, 0}).value == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(quad.phi({0, 1}).value == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("gradients") {
    SUBCASE("cross partial at the first axis normalization point") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
        const Vec2 g = closed.grad_phi({1.0, 0.0});
        CHECK(g[1] == doctest::Approx(0.1).epsilon(1e-12));  // m2 + eta * alpha1
    }
    SUBCASE("exchange symmetry on the diagonal") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.4);
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
        const Vec2 g = closed.grad_phi({0.55, 0.55});
        CHECK(g[0] == doctest::Approx(g[1]).epsilon(1e-13));
    }
    SUBCASE("finite differences reproduce the closed-form gradient") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
        const double h = 1e-5;
        for (const Vec2 xi : {Vec2{0.4, 0.7}, Vec2{0.66, 0.66}, Vec2{0.2, 0.2}}) {
            const Vec2 g = closed.grad_phi(xi);
            const double d1 =
                (closed.phi({xi[0] + h, xi[1]}).value - closed.phi({xi[0] - h, xi[1]}).value) /
                (2 * h);
            const double d2 =
                (closed.phi({xi[0], xi[1] + h}).value - closed.phi({xi[0], xi[1] - h}).value) /
                (2 * h);
            CHECK(std::abs(d1 - g[0]) < 1e-6 * std::max(1.0, std::abs(g[0])));
            CHECK(std::abs(d2 - g[1]) < 1e-6 * std::max(1.0, std::abs(g[1])));
        }
    }
    SUBCASE("monte carlo gradient agrees with the closed form") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
        EvaluatorOptions mco;
        mco.mc_samples = 400000;
        const MgfEvaluator mc(spec, ti, Backend::MonteCarlo, mco);
        RandomStream pick(2024);
        for (int k = 0; k < 5; ++k) {
            const Vec2 xi{pick.uniform(), pick.uniform()};
            const Vec2 want = closed.grad_phi(xi);
            const Vec2 got = mc.grad_phi(xi);
            // MC error of the gradient component is on the scale of phi's stderr
            const double tol = 5.0 * std::max(mc.phi(xi).stderr, 1e-4) + 0.01;
            CHECK(std::abs(got[0] - want[0]) < tol);
            CHECK(std::abs(got[1] - want[1]) < tol);
        }
    }
    SUBCASE("quadrature hessian matches closed-form second moments") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
        const MgfEvaluator quad(spec, ti, Backend::Quadrature);
        const Vec2 xi{0.6, 0.4};
        const Mat2 hc = closed.hess_phi(xi), hq = quad.hess_phi(xi);
        CHECK(hq.m00 == doctest::Approx(hc.m00).epsilon(1e-9));
        CHECK(hq.m01 == doctest::Approx(hc.m01).epsilon(1e-9));
        CHECK(hq.m11 == doctest::Approx(hc.m11).epsilon(1e-9));
    }
}

TEST_CASE("convexity of phi") {
    const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
    const TailIndices ti = solve_tail_indices(spec);
    const MgfEvaluator closed(spec, ti, Backend::ClosedForm);
    RandomStream pick(77);
    for (int k = 0; k < 100; ++k) {
        const Vec2 a{pick.uniform(), pick.uniform()};
        const Vec2 b{pick.uniform(), pick.uniform()};
        const Vec2 mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
        CHECK(closed.phi(mid).value <=
              0.5 * (closed.phi(a).value + closed.phi(b).value) + 1e-12);
    }
}

TEST_CASE("phi is strictly below one on the open unit segment") {
    for (const ModelSpec& spec :
         {log_gaussian_spec(-0.5, -0.5, 0.6), ccc_garch_spec(0.5), bekk_spec()}) {
        const TailIndices ti = solve_tail_indices(spec);
        const MgfEvaluator ev(spec, ti, default_deterministic_backend(spec));
        for (int k = 1; k <= 9; ++k) {
            const double s = 0.1 * k;
            CHECK(ev.phi({s, 1.0 - s}).value < 1.0 - 1e-9);
        }
    }
}

TEST_CASE("psi block-moment sum") {
    SUBCASE("vanishing additive term collapses psi to phi") {
        ModelSpec spec;
        spec.family = Family::Custom;
        CustomParams p;
        p.dim = 2;
        p.ab_independent = true;
        p.sampler = [](RandomStream& rs, std::vector<double>& a, std::vector<double>& b) {
            a = {std::exp(rs.normal() - 0.5), std::exp(rs.normal() - 0.5)};
            b = {0.0, 0.0};
        };
        spec.params = p;
        const TailIndices ti = unit_alpha(spec);
        EvaluatorOptions opts;
        opts.mc_samples = 100000;
        const MgfEvaluator ev(spec, ti, Backend::MonteCarlo, opts);
        const Vec2 xi{0.4, 0.4};
        const PsiEstimate psi = ev.psi(xi);
        const ValueWithError phi = ev.phi(xi);
        CHECK(psi.value == doctest::Approx(phi.value).epsilon(1e-12));
    }
    SUBCASE("constant additive term factors out of each expectation") {
        const ModelSpec spec = ccc_garch_spec(0.5, {2.0, 3.0});
        const TailIndices ti = solve_tail_indices(spec);
        EvaluatorOptions opts;
        opts.mc_samples = 200000;
        const MgfEvaluator ev(spec, ti, Backend::MonteCarlo, opts);
        const Vec2 xi{0.5, 0.5};
        const PsiEstimate psi = ev.psi(xi);
        // oracle: the three additive-term products from one-dimensional moments
        const Vec2 theta{xi[0] * ti.alpha[0], xi[1] * ti.alpha[1]};
        const double nb1 = std::pow(2.0, theta[0]);
        const double nb2 = std::pow(3.0, theta[1]);
        const double m1 = marginal_abs_moment(spec, 0, theta[0]).value;
        const double m2 = marginal_abs_moment(spec, 1, theta[1]).value;
        const double want = m1 * nb2 + nb1 * m2 + nb1 * nb2 + ev.phi(xi).value;
        CHECK(std::abs(psi.value - want) < 4.0 * psi.stderr + 1e-3);
        CHECK(psi.stable);
    }
    SUBCASE("independent gaussian additive term gives the product form") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.5);
        const TailIndices ti = solve_tail_indices(spec);
        EvaluatorOptions opts;
        opts.mc_samples = 400000;
        const MgfEvaluator ev(spec, ti, Backend::MonteCarlo, opts);
        const Vec2 xi{0.5, 0.5};
        const PsiEstimate psi = ev.psi(xi);
        // oracle: E|N|^t by log-domain quadrature, coefficient moments closed form
        const Vec2 theta{xi[0] * ti.alpha[0], xi[1] * ti.alpha[1]};
        const double eb1 = abs_normal_moment_oracle(theta[0]);
        const double eb2 = abs_normal_moment_oracle(theta[1]);
        const double ea1 = marginal_abs_moment(spec, 0, theta[0]).value;
        const double ea2 = marginal_abs_moment(spec, 1, theta[1]).value;
        const double want = ea1 * eb2 + eb1 * ea2 + eb1 * eb2 + ev.phi(xi).value;
        CHECK(std::abs(psi.value - want) < 4.0 * psi.stderr + 1e-3);
    }
}

TEST_CASE("assumption report") {
    SUBCASE("positive-dependence check passes at eta = 0.6 with the known value") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.6);
        const TailIndices ti = solve_tail_indices(spec);
        const AssumptionReport report = check_assumptions(spec, ti);
        CHECK(report.entry("A6").status == CheckStatus::Pass);
        CHECK(report.entry("A6").evidence.at("E_A1alpha_logA2") ==
              doctest::Approx(0.1).epsilon(0.15));
        CHECK(report.entry("A1").status == CheckStatus::Pass);
        CHECK(report.entry("A2").status == CheckStatus::Pass);
        CHECK(report.entry("A4c").status == CheckStatus::Pass);
        CHECK(report.entry("A5").status == CheckStatus::Pass);
    }
    SUBCASE("positive-dependence check fails at eta = 0.2") {
        const ModelSpec spec = log_gaussian_spec(-0.5, -0.5, 0.2);
        const TailIndices ti = solve_tail_indices(spec);
        const AssumptionReport report = check_assumptions(spec, ti);
        CHECK(report.entry("A6").status == CheckStatus::Fail);
        CHECK(report.entry("A6").evidence.at("E_A1alpha_logA2") ==
              doctest::Approx(-0.3).epsilon(0.1));
    }
    SUBCASE("constant model fails A1 with a NoRoot diagnostic") {
        const AssumptionReport report = check_assumptions(constant_spec({0.5, 0.5}, {1.0, 1.0}));
        CHECK(report.entry("A1").status == CheckStatus::Fail);
        CHECK(report.entry("A1").note.find("NoRoot") != std::string::npos);
    }
    SUBCASE("deterministic model with a fixed point fails A3") {
        const ModelSpec spec = constant_spec({0.5, 0.5}, {1.0, 1.0});
        TailIndices ti = unit_alpha(spec);  // exponents never certified; A3 logic is separate
        const AssumptionReport report = check_assumptions(spec, ti);
        CHECK(report.entry("A3").status == CheckStatus::Fail);
    }
}

TEST_CASE("monte carlo phi flags divergent tilted expectations") {
    // |A| has tail index 2 here, so the gradient integrand at xi far beyond
    // the domain is dominated by the largest draw.
    ModelSpec spec;
    spec.family = Family::Custom;
    CustomParams p;
    p.dim = 2;
    p.ab_independent = true;
    p.sampler = [](RandomStream& rs, std::vector<double>& a, std::vector<double>& b) {
        const double u = std::pow(rs.uniform() + 1e-12, -0.5);  // Pareto(2)
        a = {0.2 * u, 0.2 * u};
        b = {1.0, 1.0};
    };
    spec.params = p;
    const TailIndices ti = unit_alpha(spec);
    EvaluatorOptions opts;
    opts.mc_samples = 50000;
    const MgfEvaluator mc(spec, ti, Backend::MonteCarlo, opts);
    CHECK_THROWS_AS(mc.grad_phi({6.0, 6.0}), OutsideDomainError);
}
