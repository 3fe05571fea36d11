#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hrv/common.hpp"
#include "hrv/mc.hpp"

namespace hrv {

struct ScanRow {
    double t = 0;
    double raw = 0;
    double stderr = 0;
    double scaled = 0;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::string estimator;  // "crude" or "importance"
    std::string scaling;    // human-readable descriptor of the scaled column
    Vec2 exponent{0, 0};    // xi used for joint scaling ({0,0} for marginal scans)
    bool log_factor = false;
    bool insufficient_tail = false;

    double rescale(double t, double raw) const;
};

// P(|X_i| > t^{1/alpha_i}) over the grid, with scaled = t * raw.
ScanResult marginal_tail_scan(const SampleBatch& batch, int comp,
                              const std::vector<double>& t_grid);

// Importance-sampling engine handle for deep joint tails.
struct IsEngine {
    const ModelSpec* spec = nullptr;
    const TailIndices* alpha = nullptr;
    const MgfEvaluator* ev = nullptr;
    Vec2 xi_star{};
    ExceedanceOptions opts;
};

// Joint exceedance over the grid with scaled = t^{xi1+xi2} (log t)^{1/2 flag}
// raw. Counts from the batch when present; switches to the tilted-walk
// engine when the largest t resolves fewer than 10 hits and an engine is
// supplied (or when no batch is given).
ScanResult joint_tail_scan(const SampleBatch* batch, const IsEngine* engine, const Vec2& xi,
                           const std::vector<double>& t_grid, bool use_log_factor);

struct SpectralEstimate {
    double s0 = 0;
    int bins = 64;
    double margin = 0.05;
    std::vector<std::array<int, 2>> sectors;        // representative sign pairs
    std::vector<std::vector<double>> histogram;     // per sector, sums to 1 overall
    std::vector<std::uint64_t> sector_counts;
    double mass_near_axes = 0;                      // fraction of exceedances inside margin
    std::uint64_t n_exceed = 0;
    bool insufficient = false;
};

// Angular histogram of the polar direction conditional on s > s0. The
// direction is binned by the block-norm split v = (1 + q1 - q2)/2 inside each
// representative sign sector; samples with min(q1, q2) below the margin are
// reported as mass_near_axes and excluded from the bins.
SpectralEstimate spectral_measure(const SampleBatch& batch, double s0, int bins = 64,
                                  double margin = 0.05);

struct QuadrantTable {
    double tau = 0;
    std::vector<std::array<int, 2>> sectors;
    std::vector<std::uint64_t> counts;
    double chi2 = 0;
    double dof = 0;
    double p_value = 1.0;
};

// Counts of {s1 X_1 > tau, s2 X_2 > tau} over the sign orbit of the batch's
// coefficient sign group, with a chi-square homogeneity statistic.
QuadrantTable k_invariance_check(const SampleBatch& batch, double tau);

struct MixedMomentResult {
    double estimate = 0;
    double stderr = 0;
    bool stable = true;
    std::array<double, 4> running_quarter_means{};
    double max_share = 0;  // largest single-sample contribution to the sum
};

// Running-mean estimate of E ||X^{(1)}||^{xi1} ||X^{(2)}||^{xi2} with
// xi = theta / alpha. Stability combines batch-half agreement, the growth of
// running quarter means, and the dominance of the largest term.
MixedMomentResult mixed_moment(const SampleBatch& batch, const Vec2& theta);

}  // namespace hrv
