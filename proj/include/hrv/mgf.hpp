#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hrv/common.hpp"
#include "hrv/models.hpp"

namespace hrv {

struct SolveReport {
    std::string method;
    int iterations = 0;
    double residual = 0.0;
};

struct TailIndices {
    Vec2 alpha{1.0, 1.0};
    std::array<SolveReport, 2> solver{};
    std::vector<double> per_coord;  // per-coordinate exponents, length dim
};

struct ValueWithError {
    double value = 0.0;
    double stderr = 0.0;
};

struct PsiEstimate {
    double value = 0.0;
    double stderr = 0.0;
    bool stable = true;
};

// E|A_i|^s for a block representative (i in {0,1}); d_value is the
// s-derivative of log E|A_i|^s. method records which route produced it.
struct MarginalMoment {
    double value = 0.0;
    double dlog = 0.0;
    std::string method;
};

MarginalMoment marginal_abs_moment(const ModelSpec& spec, int comp, double s,
                                   std::uint64_t mc_seed = 0x5eedULL, int mc_n = 200000);
double marginal_log_abs_mean(const ModelSpec& spec, int comp,
                             std::uint64_t mc_seed = 0x5eedULL, int mc_n = 200000);

// Root of E|A_i|^s = 1 on s > 0 by bracketing plus safeguarded Newton on the
// log-convex map s -> log E|A_i|^s. Throws NegativeDriftError when
// E log|A_i| >= 0 and NoRootError when no root exists in (0, 64].
double solve_alpha(const ModelSpec& spec, int comp, double tol, SolveReport* report = nullptr);

TailIndices solve_tail_indices(const ModelSpec& spec, double tol = 1e-10);

enum class Backend { ClosedForm, Quadrature, MonteCarlo };

struct EvaluatorOptions {
    int quad_nodes = 64;       // per dimension, tensorized
    int mc_samples = 200000;
    std::uint64_t mc_seed = 0x5eedULL;
    bool convergence_check = true;  // doubling-resolution self check, 1e-10
};

// Evaluates phi(xi) = E[exp(<xi, U>)] with U = (alpha_1 log|A_1|,
// alpha_2 log|A_2|), its gradient E[U e^{<xi,U>}] and second moments
// E[U_i U_j e^{<xi,U>}], plus the block-norm moment sum psi. Backed either by
// the log-Gaussian closed form, a deterministic quadrature table, or
// fixed-seed Monte Carlo.
class MgfEvaluator {
  public:
    MgfEvaluator(const ModelSpec& spec, TailIndices alpha, Backend backend,
                 EvaluatorOptions opts = {});

    Backend backend() const { return backend_; }
    bool deterministic() const { return backend_ != Backend::MonteCarlo; }
    const TailIndices& tail_indices() const { return alpha_; }
    const ModelSpec& spec() const { return *spec_; }

    ValueWithError phi(const Vec2& xi) const;
    Vec2 grad_phi(const Vec2& xi) const;
    Mat2 hess_phi(const Vec2& xi) const;  // E[U_i U_j e^{<xi,U>}]

    // Drift and covariance of U under the exponential change of measure at xi.
    Vec2 tilted_mean(const Vec2& xi) const;
    Mat2 tilted_cov(const Vec2& xi) const;

    PsiEstimate psi(const Vec2& xi) const;

  private:
    void build_table();
    void accumulate(const Vec2& xi, int order, double* sums, double* sumsq) const;

    const ModelSpec* spec_;
    TailIndices alpha_;
    Backend backend_;
    EvaluatorOptions opts_;
    bool analytic_ = false;          // log-Gaussian closed form
    std::vector<double> u1_, u2_, w_;
};

MgfEvaluator make_evaluator(const ModelSpec& spec, const TailIndices& alpha,
                            Backend backend, EvaluatorOptions opts = {});

// Picks the strongest deterministic backend the family supports.
Backend default_deterministic_backend(const ModelSpec& spec);

enum class CheckStatus { Pass, Fail, Unverifiable };

std::string check_status_name(CheckStatus s);

struct AssumptionEntry {
    std::string id;
    CheckStatus status = CheckStatus::Unverifiable;
    std::map<std::string, double> evidence;
    std::string note;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries;
    const AssumptionEntry& entry(const std::string& id) const;
    bool all_pass() const;
};

struct AssumptionOptions {
    std::uint64_t seed = 0x5eedULL;
    int n_samples = 200000;
    double alpha_tol = 1e-8;
};

AssumptionReport check_assumptions(const ModelSpec& spec, const TailIndices& alpha,
                                   AssumptionOptions opts = {});

// Variant that solves the tail indices itself and encodes solver failures as
// a failing A1 entry instead of throwing.
AssumptionReport check_assumptions(const ModelSpec& spec, AssumptionOptions opts = {});

}  // namespace hrv
