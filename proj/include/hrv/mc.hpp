#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrv/common.hpp"
#include "hrv/mgf.hpp"
#include "hrv/models.hpp"
#include "hrv/rng.hpp"
#include "hrv/stats.hpp"

namespace hrv {

struct SimulationConfig {
    std::int64_t burn_in = 10000;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 1;
    std::int64_t thinning = 1;
    int workers = 1;

    void validate() const {
        if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
        if (n_samples <= 0) throw ConfigError("n_samples must be > 0");
        if (thinning < 1) throw ConfigError("thinning must be >= 1");
    }
};

// Stationary-law draws with the norm-like geometry attached. Block norms and
// polar coordinates are computed on demand from the stored states:
// s = max_j ||x^{(j)}||, omega_i = x_i * s^{-1/alpha_i}.
class SampleBatch {
  public:
    SampleBatch(int dim, std::vector<double> per_coord_alpha, Blocks blocks,
                std::string fingerprint, SimulationConfig cfg,
                std::vector<std::array<int, 2>> sign_group = {{1, 1}})
        : dim_(dim), alpha_(std::move(per_coord_alpha)), blocks_(std::move(blocks)),
          fingerprint_(std::move(fingerprint)), config_(cfg),
          sign_group_(std::move(sign_group)) {}

    int dim() const { return dim_; }
    std::size_t size() const { return xs_.size() / dim_; }
    double x(std::size_t row, int col) const { return xs_[row * dim_ + col]; }
    const std::vector<double>& data() const { return xs_; }
    std::vector<double>& data() { return xs_; }

    double block_norm(std::size_t row, int block) const;
    double polar_s(std::size_t row) const;
    double omega(std::size_t row, int col) const;

    const std::vector<double>& per_coord_alpha() const { return alpha_; }
    const Blocks& blocks() const { return blocks_; }
    const std::string& fingerprint() const { return fingerprint_; }
    const SimulationConfig& config() const { return config_; }

    // Coefficient sign group restricted to the block representatives, closed
    // under products; derived from the model at batch construction.
    const std::vector<std::array<int, 2>>& sign_group() const { return sign_group_; }

  private:
    int dim_;
    std::vector<double> alpha_;
    Blocks blocks_;
    std::string fingerprint_;
    SimulationConfig config_;
    std::vector<std::array<int, 2>> sign_group_;
    std::vector<double> xs_;
};

// Forward iteration of X <- A X + B from zero, chunked into independent
// chains so output is identical for any worker count. Throws
// NonContractingError when the pilot drift estimate of E log|A_i| is
// nonnegative at 3 sigma.
SampleBatch simulate_stationary(const ModelSpec& spec, const TailIndices& alpha,
                                const SimulationConfig& cfg);

struct PerpetuityResult {
    SampleBatch batch;
    Vec2 remainder_estimate{};  // mean |running product| x mean |partial sum|, per block
};

// Independent truncated-series draws of the stationary law.
PerpetuityResult perpetuity_truncated(const ModelSpec& spec, const TailIndices& alpha,
                                      int n_terms, const SimulationConfig& cfg);

// KS distance between one coordinate of two batches.
double batch_ks_distance(const SampleBatch& a, const SampleBatch& b, int col);

struct TiltOptions {
    double z_window = 8.0;        // rejection window in driver-noise std units
    Vec2 custom_u_cap{4.0, 4.0};  // truncation for user-model rejection
    double certify_tol = 1e-6;    // |phi(xi) - 1| bound required of the tilt point
    int stall_probe = 200000;     // attempts used to detect a stalled sampler
};

struct EsscherTilt {
    Vec2 xi{};
    Vec2 drift{};  // tilted mean of U
    TiltOptions options;
    // family-specific sampler state
    Vec2 lg_mean{};
    Mat2 lg_chol{};
    Vec2 theta{};
    double reject_bound = 1.0;
    double sigma_a1 = 0, sigma_a2 = 0, corr_a = 0;
};

struct TiltedStep {
    Vec2 u{};
    std::vector<int> sign;
};

EsscherTilt make_tilt(const MgfEvaluator& ev, const Vec2& xi, TiltOptions opts = {});

TiltedStep tilted_step(const ModelSpec& spec, const TailIndices& alpha, const EsscherTilt& tilt,
                       RandomStream& stream, std::int64_t* attempt_counter = nullptr);

struct WalkPath {
    std::vector<Vec2> s;              // cumulative exponent-scaled walk
    std::vector<std::vector<int>> l;  // running sign products, one per step
};

WalkPath tilted_walk(const ModelSpec& spec, const TailIndices& alpha, const EsscherTilt& tilt,
                     int n_steps, RandomStream& stream);

struct ExceedanceOptions {
    std::uint64_t n_paths = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    double crude_max_t = 30.0;  // crude companion estimate for t up to this
};

struct JointExceedanceResult {
    Estimate importance;
    std::optional<Estimate> crude;
    double rho = 0.0;       // common tilted drift component
    std::int64_t step_cap = 0;
};

// First-passage probability of the coefficient-product walk into the quadrant
// {e^{S_1} > t, e^{S_2} > eps t} within the step cap ceil(4 log t / rho),
// estimated under the tilted measure with weight e^{-<xi*, S_tau>} and, for
// small t, also by direct simulation.
JointExceedanceResult joint_exceedance_prob(const ModelSpec& spec, const TailIndices& alpha,
                                            const MgfEvaluator& ev, const Vec2& xi_star, double t,
                                            double eps, const ExceedanceOptions& opts);

struct WalkBoxResult {
    Estimate mc;
    double gauss = 0.0;
    std::int64_t n0 = 0;
    std::int64_t n = 0;
    double rho = 0.0;
};

// Probability that after n = n0 + ell steps the walk sits in the unit box
// anchored at (n0 rho + shift_1, n0 rho + log eps + shift_2), estimated by
// tilted Monte Carlo and by the Gaussian local approximation; the eps
// dependence of the Gaussian term is carried entirely by the leading
// exponential weight.
WalkBoxResult walk_box_prob(const ModelSpec& spec, const TailIndices& alpha,
                            const MgfEvaluator& ev, const Vec2& xi_star, double t, int ell,
                            double eps, const ExceedanceOptions& opts, Vec2 shift = {0.0, 0.0});

}  // namespace hrv
