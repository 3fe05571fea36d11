#include "hrv/mgf.hpp"

#include <algorithm>
#include <cmath>

#include "hrv/quadrature.hpp"
#include "hrv/rng.hpp"
#include "hrv/stats.hpp"

namespace hrv {

namespace {

constexpr double kLogAbsStdNormalMean = -0.63518142273073909;  // E log|N(0,1)|
constexpr double kLog2 = 0.69314718055994531;
constexpr double kLgammaHalf = 0.57236494292470009;  // lgamma(1/2)

double bekk_sigma(const BekkDiagParams& p, int comp) {
    double var = 0;
    for (const auto& lag : p.lags) var += lag[comp] * lag[comp];
    return std::sqrt(var);
}

}  // namespace

MarginalMoment marginal_abs_moment(const ModelSpec& spec, int comp, double s,
                                   std::uint64_t mc_seed, int mc_n) {
    MarginalMoment out;
    switch (spec.family) {
        case Family::LogGaussian: {
            const auto& p = spec.log_gaussian();
            const double var = comp == 0 ? p.C.m00 : p.C.m11;
            out.value = std::exp(s * p.m[comp] + 0.5 * s * s * var);
            out.dlog = p.m[comp] + s * var;
            out.method = "closed_form";
            return out;
        }
        case Family::CccGarch: {
            static const QuadRule rule = standard_normal_rule(96);
            const auto& p = spec.ccc_garch();
            double num = 0, dnum = 0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double z = rule.nodes[i];
                const double la = std::log(p.b[comp] + p.c[comp] * z * z);
                const double v = rule.weights[i] * std::exp(s * la);
                num += v;
                dnum += v * la;
            }
            out.value = num;
            out.dlog = dnum / num;
            out.method = "quadrature";
            return out;
        }
        case Family::BekkDiag: {
            const double sigma = bekk_sigma(spec.bekk_diag(), comp);
            const double lg =
                s * std::log(sigma) + 0.5 * s * kLog2 + std::lgamma(0.5 * (s + 1.0)) - kLgammaHalf;
            out.value = std::exp(lg);
            out.dlog = std::log(sigma) + 0.5 * kLog2 + 0.5 * digamma(0.5 * (s + 1.0));
            out.method = "closed_form";
            return out;
        }
        case Family::Custom: {
            const auto& p = spec.custom();
            if (p.abs_a_moment) {
                out.value = p.abs_a_moment(comp, s);
                const double h = 1e-6 * std::max(1.0, std::abs(s));
                const double hi = p.abs_a_moment(comp, s + h), lo = p.abs_a_moment(comp, s - h);
                out.dlog = (std::log(hi) - std::log(lo)) / (2 * h);
                out.method = "declared";
                return out;
            }
            RandomStream stream(splitmix64(mc_seed ^ 0xabcdULL));
            double num = 0, dnum = 0;
            for (int i = 0; i < mc_n; ++i) {
                const AbDraw d = sample_ab(spec, stream);
                const double la = d.log_abs_a[comp];
                const double v = std::exp(s * la);
                num += v;
                dnum += v * la;
            }
            out.value = num / mc_n;
            out.dlog = dnum / num;
            out.method = "monte_carlo";
            return out;
        }
    }
    throw Error("unreachable family");
}

double marginal_log_abs_mean(const ModelSpec& spec, int comp, std::uint64_t mc_seed, int mc_n) {
    switch (spec.family) {
        case Family::LogGaussian:
            return spec.log_gaussian().m[comp];
        case Family::CccGarch: {
            static const QuadRule rule = standard_normal_rule(96);
            const auto& p = spec.ccc_garch();
            double acc = 0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double z = rule.nodes[i];
                acc += rule.weights[i] * std::log(p.b[comp] + p.c[comp] * z * z);
            }
            return acc;
        }
        case Family::BekkDiag:
            return std::log(bekk_sigma(spec.bekk_diag(), comp)) + kLogAbsStdNormalMean;
        case Family::Custom: {
            const auto& p = spec.custom();
            if (p.log_abs_a_mean) return p.log_abs_a_mean(comp);
            RandomStream stream(splitmix64(mc_seed ^ 0xdcbaULL));
            double acc = 0;
            for (int i = 0; i < mc_n; ++i) acc += sample_ab(spec, stream).log_abs_a[comp];
            return acc / mc_n;
        }
    }
    throw Error("unreachable family");
}

double solve_alpha(const ModelSpec& spec, int comp, double tol, SolveReport* report) {
    spec.validate();
    if (comp != 0 && comp != 1) throw std::invalid_argument("solve_alpha: comp must be 0 or 1");
    const double drift = marginal_log_abs_mean(spec, comp);
    if (drift >= 0.0)
        throw NegativeDriftError("E log|A_" + std::to_string(comp + 1) +
                                 "| = " + std::to_string(drift) + " is not negative");

    auto g = [&](double s) { return marginal_abs_moment(spec, comp, s); };

    // Bracket the root of log E|A|^s on (0, 64].
    const double s_max = 64.0;
    double hi = 1.0;
    MarginalMoment mhi = g(hi);
    int iters = 0;
    while (std::log(mhi.value) <= 0.0 && hi < s_max) {
        hi = std::min(hi * 2.0, s_max);
        mhi = g(hi);
        ++iters;
        if (std::log(mhi.value) <= 0.0 && hi >= s_max)
            throw NoRootError("E|A_" + std::to_string(comp + 1) + "|^s stays below 1 on (0, 64]");
    }
    if (std::log(mhi.value) <= 0.0)
        throw NoRootError("E|A_" + std::to_string(comp + 1) + "|^s stays below 1 on (0, 64]");
    double lo = hi > 1.0 ? hi / 2.0 : 1e-6;

    // Safeguarded Newton on log E|A|^s, falling back to bisection whenever a
    // step leaves the bracket.
    double s = 0.5 * (lo + hi);
    double residual = 0.0;
    for (int it = 0; it < 200; ++it) {
        ++iters;
        const MarginalMoment m = g(s);
        const double f = std::log(m.value);
        residual = std::abs(m.value - 1.0);
        if (residual < tol) break;
        (void)it;
        if (f > 0)
            hi = s;
        else
            lo = s;
        double next = s - f / m.dlog;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) < 1e-16 * std::max(1.0, s) && residual < 1e3 * tol) {
            s = next;
            residual = std::abs(g(s).value - 1.0);
            break;
        }
        s = next;
    }
    if (residual >= tol) throw Error("tail-index iteration failed to reach tolerance");
    if (report) {
        report->method = g(s).method;
        report->iterations = iters;
        report->residual = residual;
    }
    return s;
}

TailIndices solve_tail_indices(const ModelSpec& spec, double tol) {
    TailIndices ti;
    for (int i = 0; i < 2; ++i) ti.alpha[i] = solve_alpha(spec, i, tol, &ti.solver[i]);
    ti.per_coord = per_coordinate_alpha(spec, ti.alpha);
    return ti;
}

Backend default_deterministic_backend(const ModelSpec& spec) {
    switch (spec.family) {
        case Family::LogGaussian: return Backend::ClosedForm;
        case Family::CccGarch:
        case Family::BekkDiag: return Backend::Quadrature;
        case Family::Custom: return Backend::MonteCarlo;
    }
    return Backend::MonteCarlo;
}

MgfEvaluator::MgfEvaluator(const ModelSpec& spec, TailIndices alpha, Backend backend,
                           EvaluatorOptions opts)
    : spec_(&spec), alpha_(std::move(alpha)), backend_(backend), opts_(opts) {
    spec.validate();
    if (alpha_.per_coord.empty()) alpha_.per_coord = per_coordinate_alpha(spec, alpha_.alpha);
    if (backend_ == Backend::ClosedForm) {
        if (spec.family != Family::LogGaussian)
            throw UnsupportedError("closed-form backend requires the log-Gaussian family");
        analytic_ = true;
        return;
    }
    if (backend_ == Backend::Quadrature && spec.family == Family::Custom)
        throw UnsupportedError("quadrature backend requires a built-in family");
    build_table();
}

namespace {

struct TableBuilder {
    std::vector<double> u1, u2, w;
    void push(double a, double b, double weight) {
        u1.push_back(a);
        u2.push_back(b);
        w.push_back(weight);
    }
};

void build_gauss_table(const ModelSpec& spec, const Vec2& alpha, int nodes, TableBuilder& tb) {
    const QuadRule rule = standard_normal_rule(nodes);
    if (spec.family == Family::LogGaussian) {
        const auto& p = spec.log_gaussian();
        const Mat2 l = p.C.cholesky();
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j) {
                const double z1 = p.m[0] + l.m00 * rule.nodes[i];
                const double z2 = p.m[1] + l.m10 * rule.nodes[i] + l.m11 * rule.nodes[j];
                tb.push(alpha[0] * z1, alpha[1] * z2, rule.weights[i] * rule.weights[j]);
            }
        return;
    }
    const auto& p = spec.ccc_garch();
    const double q = std::sqrt(1.0 - p.eta * p.eta);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j) {
            const double z1 = rule.nodes[i];
            const double z2 = p.eta * z1 + q * rule.nodes[j];
            const double la1 = std::log(p.b[0] + p.c[0] * z1 * z1);
            const double la2 = std::log(p.b[1] + p.c[1] * z2 * z2);
            tb.push(alpha[0] * la1, alpha[1] * la2, rule.weights[i] * rule.weights[j]);
        }
}

// Quadrant-folded trapezoid rule in log coordinates for a centered bivariate
// Gaussian coefficient pair. The integrand of E[|A_1|^{t1}|A_2|^{t2}] has a
// kink along each axis, so the quadrature variables are y_i = log a_i, where
// the integrand is analytic and decays double-exponentially.
void build_bekk_table(const ModelSpec& spec, const Vec2& alpha, double step, TableBuilder& tb) {
    const auto& p = spec.bekk_diag();
    double g00 = 0, g01 = 0, g11 = 0;
    for (const auto& lag : p.lags) {
        g00 += lag[0] * lag[0];
        g01 += lag[0] * lag[1];
        g11 += lag[1] * lag[1];
    }
    const double det = g00 * g11 - g01 * g01;
    const double i00 = g11 / det, i01 = -g01 / det, i11 = g00 / det;
    const double norm_const = 1.0 / (2.0 * std::acos(-1.0) * std::sqrt(det));
    const double lo = -30.0;
    const double hi1 = 0.5 * std::log(g00) + 3.2;
    const double hi2 = 0.5 * std::log(g11) + 3.2;
    const int n1 = static_cast<int>((hi1 - lo) / step) + 1;
    const int n2 = static_cast<int>((hi2 - lo) / step) + 1;
    for (int i = 0; i < n1; ++i) {
        const double y1 = lo + i * step;
        const double a1 = std::exp(y1);
        for (int j = 0; j < n2; ++j) {
            const double y2 = lo + j * step;
            const double a2 = std::exp(y2);
            const double quad_same = std::exp(-0.5 * (i00 * a1 * a1 + 2 * i01 * a1 * a2 + i11 * a2 * a2));
            const double quad_opp = std::exp(-0.5 * (i00 * a1 * a1 - 2 * i01 * a1 * a2 + i11 * a2 * a2));
            const double dens = 2.0 * norm_const * (quad_same + quad_opp);
            const double weight = step * step * a1 * a2 * dens;
            if (weight < 1e-300) continue;
            tb.push(alpha[0] * y1, alpha[1] * y2, weight);
        }
    }
}

}  // namespace

void MgfEvaluator::build_table() {
    auto build = [&](int level, TableBuilder& tb) {
        if (backend_ == Backend::MonteCarlo) {
            RandomStream stream(splitmix64(opts_.mc_seed ^ 0x9e3779b9ULL));
            const int n = opts_.mc_samples;
            for (int i = 0; i < n; ++i) {
                const AbDraw d = sample_ab(*spec_, stream);
                const Vec2 u = d.exponent_scaled(alpha_.alpha);
                tb.push(u[0], u[1], 1.0 / n);
            }
            return;
        }
        if (spec_->family == Family::BekkDiag) {
            build_bekk_table(*spec_, alpha_.alpha, 0.125 / level, tb);
        } else {
            build_gauss_table(*spec_, alpha_.alpha, opts_.quad_nodes * level, tb);
        }
    };
    TableBuilder tb;
    build(1, tb);
    if (backend_ == Backend::Quadrature && opts_.convergence_check) {
        auto eval = [](const TableBuilder& t, const Vec2& xi) {
            double s = 0;
            for (std::size_t k = 0; k < t.w.size(); ++k)
                s += t.w[k] * std::exp(xi[0] * t.u1[k] + xi[1] * t.u2[k]);
            return s;
        };
        for (int attempt = 0; attempt < 2; ++attempt) {
            TableBuilder fine;
            build(2 << attempt, fine);
            const Vec2 probes[2] = {{1.0, 1.0}, {0.5, 0.5}};
            double worst = 0;
            for (const Vec2& xi : probes) {
                const double c = eval(tb, xi), f = eval(fine, xi);
                worst = std::max(worst, std::abs(c - f) / std::max(1.0, std::abs(f)));
            }
            if (worst <= 1e-10) break;
            tb = std::move(fine);
            if (attempt == 1 && worst > 1e-10)
                throw Error("quadrature table failed the doubling convergence check");
        }
    }
    u1_ = std::move(tb.u1);
    u2_ = std::move(tb.u2);
    w_ = std::move(tb.w);
}

void MgfEvaluator::accumulate(const Vec2& xi, int order, double* sums, double* sumsq) const {
    const std::size_t n = w_.size();
    double s0 = 0, s1 = 0, s2 = 0, s11 = 0, s12 = 0, s22 = 0, sq = 0, smax = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = w_[k] * std::exp(xi[0] * u1_[k] + xi[1] * u2_[k]);
        s0 += e;
        if (order >= 1) {
            s1 += e * u1_[k];
            s2 += e * u2_[k];
        }
        if (order >= 2) {
            s11 += e * u1_[k] * u1_[k];
            s12 += e * u1_[k] * u2_[k];
            s22 += e * u2_[k] * u2_[k];
        }
        if (sumsq) {
            sq += e * e;
            smax = std::max(smax, e);
        }
    }
    sums[0] = s0;
    sums[1] = s1;
    sums[2] = s2;
    sums[3] = s11;
    sums[4] = s12;
    sums[5] = s22;
    if (sumsq) {
        sumsq[0] = sq;
        sumsq[1] = smax;
    }
}

ValueWithError MgfEvaluator::phi(const Vec2& xi) const {
    if (analytic_) {
        const Vec2 theta{xi[0] * alpha_.alpha[0], xi[1] * alpha_.alpha[1]};
        return {std::exp(*closed_form_log_mgf(*spec_, theta)), 0.0};
    }
    double sums[6];
    if (backend_ == Backend::MonteCarlo) {
        double sq[2];
        accumulate(xi, 0, sums, sq);
        const double n = static_cast<double>(w_.size());
        const double mean = sums[0];
        const double second = sq[0] * n;  // sample mean of squares
        const double var = std::max(0.0, second - mean * mean) * n / std::max(1.0, n - 1.0);
        return {mean, std::sqrt(var / n)};
    }
    accumulate(xi, 0, sums, nullptr);
    return {sums[0], 0.0};
}

Vec2 MgfEvaluator::grad_phi(const Vec2& xi) const {
    if (analytic_) {
        const auto& p = spec_->log_gaussian();
        const Vec2 theta{xi[0] * alpha_.alpha[0], xi[1] * alpha_.alpha[1]};
        const double value = std::exp(*closed_form_log_mgf(*spec_, theta));
        const Vec2 lin = add(p.m, p.C.mul(theta));
        return {value * alpha_.alpha[0] * lin[0], value * alpha_.alpha[1] * lin[1]};
    }
    double sums[6];
    double sq[2] = {0, 0};
    accumulate(xi, 1, sums, backend_ == Backend::MonteCarlo ? sq : nullptr);
    if (!std::isfinite(sums[0]) || !std::isfinite(sums[1]) || !std::isfinite(sums[2]))
        throw OutsideDomainError("tilted expectation diverged");
    if (backend_ == Backend::MonteCarlo && sq[1] > 0.5 * sums[0])
        throw OutsideDomainError("tilted expectation dominated by a single sample");
    return {sums[1], sums[2]};
}

Mat2 MgfEvaluator::hess_phi(const Vec2& xi) const {
    if (analytic_) {
        const auto& p = spec_->log_gaussian();
        const Vec2 theta{xi[0] * alpha_.alpha[0], xi[1] * alpha_.alpha[1]};
        const double value = std::exp(*closed_form_log_mgf(*spec_, theta));
        const Vec2 lin = add(p.m, p.C.mul(theta));
        const double a0 = alpha_.alpha[0], a1 = alpha_.alpha[1];
        Mat2 h;
        h.m00 = value * a0 * a0 * (lin[0] * lin[0] + p.C.m00);
        h.m01 = value * a0 * a1 * (lin[0] * lin[1] + p.C.m01);
        h.m10 = h.m01;
        h.m11 = value * a1 * a1 * (lin[1] * lin[1] + p.C.m11);
        return h;
    }
    double sums[6];
    accumulate(xi, 2, sums, nullptr);
    if (!std::isfinite(sums[3]) || !std::isfinite(sums[4]) || !std::isfinite(sums[5]))
        throw OutsideDomainError("tilted second moment diverged");
    return {sums[3], sums[4], sums[4], sums[5]};
}

Vec2 MgfEvaluator::tilted_mean(const Vec2& xi) const {
    const double p = phi(xi).value;
    const Vec2 g = grad_phi(xi);
    return {g[0] / p, g[1] / p};
}

Mat2 MgfEvaluator::tilted_cov(const Vec2& xi) const {
    const double p = phi(xi).value;
    const Vec2 m = tilted_mean(xi);
    const Mat2 h = hess_phi(xi);
    return {h.m00 / p - m[0] * m[0], h.m01 / p - m[0] * m[1], h.m10 / p - m[0] * m[1],
            h.m11 / p - m[1] * m[1]};
}

PsiEstimate MgfEvaluator::psi(const Vec2& xi) const {
    RandomStream stream(splitmix64(opts_.mc_seed ^ 0x00770077ULL));
    const int n = opts_.mc_samples;
    MeanVar half1, half2;
    double max_term = 0;
    for (int i = 0; i < n; ++i) {
        const AbDraw d = sample_ab(*spec_, stream);
        const Vec2 u = d.exponent_scaled(alpha_.alpha);
        double nb[2] = {0, 0};
        for (int j = 0; j < 2; ++j) {
            const auto& cls = j == 0 ? spec_->blocks.first : spec_->blocks.second;
            for (int c : cls)
                nb[j] = std::max(nb[j], std::pow(std::abs(d.b[c]), alpha_.per_coord[c]));
        }
        const double t1 = std::exp(xi[0] * u[0]) * std::pow(nb[1], xi[1]);
        const double t2 = std::pow(nb[0], xi[0]) * std::exp(xi[1] * u[1]);
        const double t3 = std::pow(nb[0], xi[0]) * std::pow(nb[1], xi[1]);
        const double term = t1 + t2 + t3;
        (i < n / 2 ? half1 : half2).add(term);
        max_term = std::max(max_term, term);
    }
    MeanVar total = half1;
    total.combine(half2);
    const ValueWithError p = phi(xi);
    PsiEstimate out;
    out.value = total.mean() + p.value;
    out.stderr = std::sqrt(total.stderr_mean() * total.stderr_mean() + p.stderr * p.stderr);
    const double se_diff = std::sqrt(half1.stderr_mean() * half1.stderr_mean() +
                                     half2.stderr_mean() * half2.stderr_mean());
    const bool halves_ok = std::abs(half1.mean() - half2.mean()) <=
                           4.0 * se_diff + 1e-12 * std::max(std::abs(total.mean()), 1e-300);
    const bool share_ok = max_term <= 0.02 * std::max(total.sum, 1e-300);
    out.stable = halves_ok && share_ok;
    return out;
}

MgfEvaluator make_evaluator(const ModelSpec& spec, const TailIndices& alpha, Backend backend,
                            EvaluatorOptions opts) {
    return MgfEvaluator(spec, alpha, backend, opts);
}

std::string check_status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Unverifiable: return "unverifiable";
    }
    return "?";
}

const AssumptionEntry& AssumptionReport::entry(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return e;
    throw std::out_of_range("no assumption entry " + id);
}

bool AssumptionReport::all_pass() const {
    for (const auto& e : entries)
        if (e.status == CheckStatus::Fail) return false;
    return true;
}

namespace {

struct RunningStability {
    MeanVar half1, half2;
    double max_term = 0;
    std::uint64_t n_total = 0;

    void add(double x, std::uint64_t i, std::uint64_t n) {
        (i < n / 2 ? half1 : half2).add(x);
        max_term = std::max(max_term, x);
        ++n_total;
    }
    double mean() const {
        MeanVar t = half1;
        t.combine(half2);
        return t.mean();
    }
    double stderr_mean() const {
        MeanVar t = half1;
        t.combine(half2);
        return t.stderr_mean();
    }
    bool stable() const {
        const double se = std::sqrt(half1.stderr_mean() * half1.stderr_mean() +
                                    half2.stderr_mean() * half2.stderr_mean());
        MeanVar total = half1;
        total.combine(half2);
        const bool halves_ok = std::abs(half1.mean() - half2.mean()) <=
                               4.0 * se + 1e-12 * std::max(std::abs(total.mean()), 1e-300);
        const bool share_ok = max_term <= 0.02 * std::max(total.sum, 1e-300);
        return halves_ok && share_ok;
    }
};

bool draws_all_identical(const ModelSpec& spec, std::uint64_t seed, int n) {
    RandomStream stream(seed);
    const AbDraw first = sample_ab(spec, stream);
    for (int i = 1; i < n; ++i) {
        const AbDraw d = sample_ab(spec, stream);
        if (d.a != first.a || d.b != first.b) return false;
    }
    return true;
}

bool component_degenerate(const std::vector<double>& values) {
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] != values[0]) return false;
    return true;
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& spec, const TailIndices& alpha,
                                   AssumptionOptions opts) {
    spec.validate();
    AssumptionReport report;
    const int n = opts.n_samples;
    const std::vector<double> pca =
        alpha.per_coord.empty() ? per_coordinate_alpha(spec, alpha.alpha) : alpha.per_coord;

    // One shared pass over fixed-seed draws feeds A1/A2/A5/A6.
    RandomStream stream(splitmix64(opts.seed ^ 0xA55A5AA5ULL));
    std::uint64_t unit_count[2] = {0, 0}, zero_count[2] = {0, 0};
    RunningStability eb[2], ealog[2], a6_fwd, a6_rev, mix[3];
    std::vector<double> b_first(std::min(n, 1000)), b_second(std::min(n, 1000));
    for (int i = 0; i < n; ++i) {
        const AbDraw d = sample_ab(spec, stream);
        const Vec2 u = d.exponent_scaled(alpha.alpha);
        double nb[2] = {0, 0};
        for (int j = 0; j < 2; ++j) {
            const auto& cls = j == 0 ? spec.blocks.first : spec.blocks.second;
            for (int c : cls) nb[j] = std::max(nb[j], std::pow(std::abs(d.b[c]), pca[c]));
        }
        for (int j = 0; j < 2; ++j) {
            if (std::abs(d.a[j]) == 1.0) ++unit_count[j];
            if (d.a[j] == 0.0) ++zero_count[j];
            eb[j].add(nb[j], i, n);
            const double lp = std::max(0.0, d.log_abs_a[j]);
            ealog[j].add(std::exp(u[j]) * lp, i, n);
        }
        a6_fwd.add(std::exp(u[0]) * d.log_abs_a[1], i, n);
        a6_rev.add(std::exp(u[1]) * d.log_abs_a[0], i, n);
        mix[0].add(std::pow(nb[0], 1.0) * std::pow(nb[1], 1.0), i, n);
        mix[1].add(std::pow(nb[0], 1.0) * std::exp(u[1]), i, n);
        mix[2].add(std::exp(u[0]) * std::pow(nb[1], 1.0), i, n);
        if (i < static_cast<int>(b_first.size())) {
            b_first[i] = d.b[0];
            b_second[i] = d.b[1];
        }
    }

    {
        AssumptionEntry e;
        e.id = "A1";
        e.status = CheckStatus::Pass;
        for (int j = 0; j < 2; ++j) {
            const std::string sfx = std::to_string(j + 1);
            e.evidence["residual_" + sfx] = alpha.solver[j].residual;
            e.evidence["alpha_" + sfx] = alpha.alpha[j];
            e.evidence["frac_abs_one_" + sfx] = static_cast<double>(unit_count[j]) / n;
            e.evidence["zero_draws_" + sfx] = static_cast<double>(zero_count[j]);
            if (alpha.solver[j].residual > opts.alpha_tol || unit_count[j] == static_cast<std::uint64_t>(n) ||
                zero_count[j] > 0)
                e.status = CheckStatus::Fail;
        }
        report.entries.push_back(std::move(e));
    }
    {
        AssumptionEntry e;
        e.id = "A2";
        e.status = CheckStatus::Pass;
        for (int j = 0; j < 2; ++j) {
            const std::string sfx = std::to_string(j + 1);
            e.evidence["E_absB_alpha_" + sfx] = eb[j].mean();
            e.evidence["E_absB_alpha_stderr_" + sfx] = eb[j].stderr_mean();
            e.evidence["E_absA_alpha_logplus_" + sfx] = ealog[j].mean();
            if (!(eb[j].mean() > 0) || !eb[j].stable() || !ealog[j].stable())
                e.status = CheckStatus::Fail;
        }
        report.entries.push_back(std::move(e));
    }
    {
        AssumptionEntry e;
        e.id = "A3";
        switch (spec.family) {
            case Family::LogGaussian:
            case Family::CccGarch:
            case Family::BekkDiag:
                e.status = CheckStatus::Pass;
                e.note = "coefficient law is continuous; no almost-sure fixed point";
                break;
            case Family::Custom: {
                if (draws_all_identical(spec, splitmix64(opts.seed ^ 0x33CCULL), 1000)) {
                    RandomStream s2(splitmix64(opts.seed ^ 0x33CCULL));
                    const AbDraw d = sample_ab(spec, s2);
                    bool fail = false;
                    for (int j = 0; j < spec.dim; ++j) {
                        if (d.a[j] != 1.0) {
                            e.evidence["fixed_point_" + std::to_string(j + 1)] =
                                d.b[j] / (1.0 - d.a[j]);
                            fail = true;
                        } else if (d.b[j] == 0.0) {
                            fail = true;
                        }
                    }
                    e.status = fail ? CheckStatus::Fail : CheckStatus::Pass;
                    e.note = "deterministic coefficients";
                } else if (spec.ab_independent() && !component_degenerate(b_first) &&
                           !component_degenerate(b_second)) {
                    e.status = CheckStatus::Pass;
                    e.note = "independent additive term with nondegenerate components";
                } else {
                    e.status = CheckStatus::Unverifiable;
                    e.note = "almost-sure fixed points are not decidable from samples";
                }
                break;
            }
        }
        report.entries.push_back(std::move(e));
    }
    {
        AssumptionEntry e;
        e.id = "A4c";
        switch (spec.family) {
            case Family::LogGaussian:
                e.status = CheckStatus::Pass;
                e.note = "nondegenerate Gaussian log-coefficients";
                break;
            case Family::CccGarch:
                e.status = CheckStatus::Pass;
                e.note = "continuous joint density, |eta| < 1";
                break;
            case Family::BekkDiag:
                e.status = CheckStatus::Pass;
                e.note = "rank-2 Gaussian coefficients";
                break;
            case Family::Custom:
                e.status = CheckStatus::Unverifiable;
                e.note = "spectral decay of the characteristic function is not sample-testable";
                break;
        }
        report.entries.push_back(std::move(e));
    }
    {
        AssumptionEntry e;
        e.id = "A5";
        e.status = CheckStatus::Pass;
        const char* names[3] = {"E_B1_B2", "E_B1_A2", "E_A1_B2"};
        for (int k = 0; k < 3; ++k) {
            e.evidence[names[k]] = mix[k].mean();
            e.evidence[std::string(names[k]) + "_stderr"] = mix[k].stderr_mean();
            if (!mix[k].stable()) e.status = CheckStatus::Fail;
        }
        report.entries.push_back(std::move(e));
    }
    {
        AssumptionEntry e;
        e.id = "A6";
        const double v1 = a6_fwd.mean(), s1 = a6_fwd.stderr_mean();
        const double v2 = a6_rev.mean(), s2 = a6_rev.stderr_mean();
        e.evidence["E_A1alpha_logA2"] = v1;
        e.evidence["E_A1alpha_logA2_stderr"] = s1;
        e.evidence["E_A2alpha_logA1"] = v2;
        e.evidence["E_A2alpha_logA1_stderr"] = s2;
        if (v1 > 3 * s1 && v2 > 3 * s2)
            e.status = CheckStatus::Pass;
        else if (v1 < -3 * s1 || v2 < -3 * s2)
            e.status = CheckStatus::Fail;
        else
            e.status = CheckStatus::Unverifiable;
        report.entries.push_back(std::move(e));
    }
    return report;
}

AssumptionReport check_assumptions(const ModelSpec& spec, AssumptionOptions opts) {
    try {
        const TailIndices ti = solve_tail_indices(spec, 1e-10);
        return check_assumptions(spec, ti, opts);
    } catch (const NoRootError& err) {
        AssumptionReport report;
        AssumptionEntry a1;
        a1.id = "A1";
        a1.status = CheckStatus::Fail;
        a1.note = std::string("NoRoot: ") + err.what();
        report.entries.push_back(std::move(a1));
        for (const char* id : {"A2", "A3", "A4c", "A5", "A6"}) {
            AssumptionEntry e;
            e.id = id;
            e.status = CheckStatus::Unverifiable;
            e.note = "tail indices unavailable";
            report.entries.push_back(std::move(e));
        }
        return report;
    } catch (const NegativeDriftError& err) {
        AssumptionReport report;
        AssumptionEntry a1;
        a1.id = "A1";
        a1.status = CheckStatus::Fail;
        a1.note = std::string("NegativeDriftViolated: ") + err.what();
        report.entries.push_back(std::move(a1));
        for (const char* id : {"A2", "A3", "A4c", "A5", "A6"}) {
            AssumptionEntry e;
            e.id = id;
            e.status = CheckStatus::Unverifiable;
            e.note = "tail indices unavailable";
            report.entries.push_back(std::move(e));
        }
        return report;
    }
}

}  // namespace hrv
