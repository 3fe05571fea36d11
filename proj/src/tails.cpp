#include "hrv/tails.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hrv/stats.hpp"

namespace hrv {

namespace {

void check_grid(const std::vector<double>& t_grid) {
    if (t_grid.size() < 1) throw ConfigError("t grid must be nonempty");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1])) throw ConfigError("t grid must be strictly increasing");
    if (!(t_grid.front() > 0)) throw ConfigError("t grid must be positive");
}

double binom_stderr(double p, std::uint64_t n) {
    return n ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n)) : 0.0;
}

}  // namespace

double ScanResult::rescale(double t, double raw) const {
    double s = raw;
    if (estimator == "crude" && exponent[0] == 0 && exponent[1] == 0 && !log_factor)
        return t * raw;  // marginal scaling
    s *= std::pow(t, exponent[0] + exponent[1]);
    if (log_factor) s *= std::sqrt(std::log(t));
    return s;
}

ScanResult marginal_tail_scan(const SampleBatch& batch, int comp,
                              const std::vector<double>& t_grid) {
    check_grid(t_grid);
    if (comp < 0 || comp >= batch.dim()) throw ConfigError("component out of range");
    const double a = batch.per_coord_alpha()[comp];
    const std::size_t n = batch.size();

    // One pass: |x|^alpha exceeds grid points 0..k-1 where k is found by
    // binary search, accumulated as a suffix sum afterwards.
    std::vector<std::uint64_t> bucket(t_grid.size() + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::pow(std::abs(batch.x(i, comp)), a);
        const std::size_t k =
            std::lower_bound(t_grid.begin(), t_grid.end(), v) - t_grid.begin();
        ++bucket[k];
    }
    std::vector<std::uint64_t> hits(t_grid.size(), 0);
    std::uint64_t acc = 0;
    for (std::size_t j = t_grid.size(); j-- > 0;) {
        acc += bucket[j + 1];
        hits[j] = acc;
    }
    ScanResult out;
    out.estimator = "crude";
    out.scaling = "t * raw";
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        ScanRow row;
        row.t = t_grid[j];
        row.raw = static_cast<double>(hits[j]) / static_cast<double>(n);
        row.stderr = binom_stderr(row.raw, n);
        row.scaled = row.t * row.raw;
        out.rows.push_back(row);
    }
    out.insufficient_tail = hits.back() < 10;
    return out;
}

namespace {

ScanResult joint_scan_crude(const SampleBatch& batch, const Vec2& xi,
                            const std::vector<double>& t_grid, bool use_log_factor) {
    const std::size_t n = batch.size();
    std::vector<std::uint64_t> bucket(t_grid.size() + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::min(batch.block_norm(i, 0), batch.block_norm(i, 1));
        const std::size_t k =
            std::lower_bound(t_grid.begin(), t_grid.end(), v) - t_grid.begin();
        ++bucket[k];
    }
    std::vector<std::uint64_t> hits(t_grid.size(), 0);
    std::uint64_t acc = 0;
    for (std::size_t j = t_grid.size(); j-- > 0;) {
        acc += bucket[j + 1];
        hits[j] = acc;
    }
    ScanResult out;
    out.estimator = "crude";
    out.exponent = xi;
    out.log_factor = use_log_factor;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        ScanRow row;
        row.t = t_grid[j];
        row.raw = static_cast<double>(hits[j]) / static_cast<double>(n);
        row.stderr = binom_stderr(row.raw, n);
        row.scaled = out.rescale(row.t, row.raw);
        out.rows.push_back(row);
    }
    out.insufficient_tail = hits.back() < 10;
    return out;
}

ScanResult joint_scan_is(const IsEngine& engine, const Vec2& xi, const std::vector<double>& t_grid,
                         bool use_log_factor) {
    ScanResult out;
    out.estimator = "importance";
    out.exponent = xi;
    out.log_factor = use_log_factor;
    for (double t : t_grid) {
        const JointExceedanceResult res = joint_exceedance_prob(
            *engine.spec, *engine.alpha, *engine.ev, engine.xi_star, t, 1.0, engine.opts);
        ScanRow row;
        row.t = t;
        row.raw = res.importance.value;
        row.stderr = res.importance.stderr;
        row.scaled = out.rescale(t, row.raw);
        out.rows.push_back(row);
        if (res.importance.zero_hits) out.insufficient_tail = true;
    }
    return out;
}

}  // namespace

ScanResult joint_tail_scan(const SampleBatch* batch, const IsEngine* engine, const Vec2& xi,
                           const std::vector<double>& t_grid, bool use_log_factor) {
    check_grid(t_grid);
    if (!batch && !engine) throw ConfigError("joint_tail_scan needs a batch or an engine");
    if (batch) {
        ScanResult crude = joint_scan_crude(*batch, xi, t_grid, use_log_factor);
        if (!crude.insufficient_tail || !engine) {
            const char* desc = use_log_factor ? "t^(xi1+xi2) * sqrt(log t) * raw"
                                              : "t^(xi1+xi2) * raw";
            crude.scaling = desc;
            return crude;
        }
    }
    ScanResult is = joint_scan_is(*engine, xi, t_grid, use_log_factor);
    is.scaling = use_log_factor ? "t^(xi1+xi2) * sqrt(log t) * raw" : "t^(xi1+xi2) * raw";
    return is;
}

namespace {

// Orbit of a sign pair under the batch's coefficient sign group.
std::vector<std::array<int, 2>> orbit_of(const std::vector<std::array<int, 2>>& group,
                                         const std::array<int, 2>& sec) {
    std::set<std::array<int, 2>> orbit;
    for (const auto& k : group) orbit.insert({k[0] * sec[0], k[1] * sec[1]});
    return {orbit.begin(), orbit.end()};
}

}  // namespace

SpectralEstimate spectral_measure(const SampleBatch& batch, double s0, int bins, double margin) {
    if (bins < 1) throw ConfigError("bins must be >= 1");
    SpectralEstimate est;
    est.s0 = s0;
    est.bins = bins;
    est.margin = margin;

    std::map<std::array<int, 2>, std::vector<double>> hist;
    std::map<std::array<int, 2>, std::uint64_t> counts;
    std::uint64_t near_axes = 0, binned = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double b0 = batch.block_norm(i, 0), b1 = batch.block_norm(i, 1);
        const double s = std::max(b0, b1);
        if (!(s > s0)) continue;
        ++est.n_exceed;
        const double q0 = b0 / s, q1 = b1 / s;
        if (std::min(q0, q1) < margin) {
            ++near_axes;
            continue;
        }
        const std::array<int, 2> sec{batch.x(i, 0) >= 0 ? 1 : -1, batch.x(i, 1) >= 0 ? 1 : -1};
        auto& h = hist[sec];
        if (h.empty()) h.assign(bins, 0.0);
        const double v = 0.5 * (1.0 + q0 - q1);
        int bin = static_cast<int>(v * bins);
        bin = std::clamp(bin, 0, bins - 1);
        h[bin] += 1.0;
        ++counts[sec];
        ++binned;
    }
    // Each observed sector's full sign orbit is present, zero-filled if unseen.
    for (const auto& [sec, h] : hist) {
        (void)h;
        for (const auto& other : orbit_of(batch.sign_group(), sec)) {
            if (!hist.count(other)) hist[other].assign(bins, 0.0);
            counts.emplace(other, 0);
        }
    }
    for (auto& [sec, h] : hist) {
        if (binned > 0)
            for (double& v : h) v /= static_cast<double>(binned);
        est.sectors.push_back(sec);
        est.histogram.push_back(h);
        est.sector_counts.push_back(counts[sec]);
    }
    est.mass_near_axes =
        est.n_exceed ? static_cast<double>(near_axes) / static_cast<double>(est.n_exceed) : 0.0;
    est.insufficient = est.n_exceed < 500;
    return est;
}

QuadrantTable k_invariance_check(const SampleBatch& batch, double tau) {
    QuadrantTable table;
    table.tau = tau;
    table.sectors = orbit_of(batch.sign_group(), {1, 1});
    table.counts.assign(table.sectors.size(), 0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double x1 = batch.x(i, 0), x2 = batch.x(i, 1);
        for (std::size_t k = 0; k < table.sectors.size(); ++k)
            if (table.sectors[k][0] * x1 > tau && table.sectors[k][1] * x2 > tau)
                ++table.counts[k];
    }
    const std::size_t cells = table.sectors.size();
    table.dof = static_cast<double>(cells) - 1.0;
    if (cells <= 1) {
        table.p_value = 1.0;  // trivial group: vacuous
        return table;
    }
    double total = 0;
    for (auto c : table.counts) total += static_cast<double>(c);
    const double expected = total / static_cast<double>(cells);
    if (expected <= 0) {
        table.p_value = 1.0;
        return table;
    }
    for (auto c : table.counts) {
        const double d = static_cast<double>(c) - expected;
        table.chi2 += d * d / expected;
    }
    table.p_value = chi_square_sf(table.chi2, table.dof);
    return table;
}

MixedMomentResult mixed_moment(const SampleBatch& batch, const Vec2& theta) {
    const std::size_t n = batch.size();
    if (n < 4) throw ConfigError("mixed_moment needs at least 4 samples");
    const double a0 = batch.per_coord_alpha()[0], a1 = batch.per_coord_alpha()[1];
    const Vec2 xi{theta[0] / a0, theta[1] / a1};

    MeanVar half1, half2;
    double max_term = 0, running = 0;
    MixedMomentResult out;
    std::size_t next_quarter = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w =
            std::pow(batch.block_norm(i, 0), xi[0]) * std::pow(batch.block_norm(i, 1), xi[1]);
        (i < n / 2 ? half1 : half2).add(w);
        running += w;
        max_term = std::max(max_term, w);
        if (i + 1 == (next_quarter + 1) * n / 4 && next_quarter < 4) {
            out.running_quarter_means[next_quarter] = running / static_cast<double>(i + 1);
            ++next_quarter;
        }
    }
    MeanVar total = half1;
    total.combine(half2);
    out.estimate = total.mean();
    out.stderr = total.stderr_mean();
    out.max_share = total.sum > 0 ? max_term / total.sum : 0.0;

    // Thresholds include a rounding floor so exactly-constant samples, whose
    // running means wander by ulps, do not flag as drifting.
    const double floor = 1e-12 * std::max(std::abs(out.estimate), 1e-300);
    const double se = std::sqrt(half1.stderr_mean() * half1.stderr_mean() +
                                half2.stderr_mean() * half2.stderr_mean());
    const bool halves_ok = std::abs(half1.mean() - half2.mean()) <= 4.0 * se + floor;
    const auto& q = out.running_quarter_means;
    const bool growing = q[0] < q[1] && q[1] < q[2] && q[2] < q[3] &&
                         (q[3] - q[0]) > 4.0 * out.stderr + floor;
    const bool share_ok = out.max_share <= 0.02;
    out.stable = halves_ok && share_ok && !growing;
    return out;
}

}  // namespace hrv
