#include "hrv/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hrv/parallel.hpp"
#include "hrv/rng.hpp"

namespace hrv {

namespace {

constexpr std::size_t kPathChunk = 512;
constexpr std::int64_t kHardStepCap = 50000000;

std::vector<std::array<int, 2>> close_group(const std::set<std::array<int, 2>>& support) {
    std::set<std::array<int, 2>> group(support);
    group.insert({1, 1});
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::array<int, 2>> items(group.begin(), group.end());
        for (const auto& g : items)
            for (const auto& h : items)
                if (group.insert({g[0] * h[0], g[1] * h[1]}).second) grew = true;
    }
    return {group.begin(), group.end()};
}

struct WalkSampler {
    Vec2 mean;
    Mat2 chol;
    std::vector<SignAtom> signs;
    std::vector<double> cum;

    explicit WalkSampler(const IncrementSpec& inc)
        : mean(inc.mean), chol(inc.cov.cholesky()), signs(inc.sign_law) {
        double acc = 0;
        for (const auto& s : signs) {
            acc += s.prob;
            cum.push_back(acc);
        }
    }

    Vec2 step(RandomStream& stream) const {
        const double n1 = stream.normal(), n2 = stream.normal();
        return {mean[0] + chol.m00 * n1, mean[1] + chol.m10 * n1 + chol.m11 * n2};
    }

    std::array<int, 2> sign_step(RandomStream& stream) const {
        if (signs.empty()) return {1, 1};
        const double x = stream.uniform() * cum.back();
        for (std::size_t i = 0; i < cum.size(); ++i)
            if (x < cum[i]) return signs[i].pattern;
        return signs.back().pattern;
    }
};

void transience_check(const IncrementSpec& inc, std::uint64_t seed) {
    const WalkSampler sampler(inc);
    RandomStream stream = RandomStream(seed).substream(0x7217ULL);
    MeanVar comp[2];
    for (int i = 0; i < 10000; ++i) {
        const Vec2 y = sampler.step(stream);
        comp[0].add(y[0]);
        comp[1].add(y[1]);
    }
    const bool sig0 = std::abs(comp[0].mean()) > 3.0 * comp[0].stderr_mean();
    const bool sig1 = std::abs(comp[1].mean()) > 3.0 * comp[1].stderr_mean();
    if (!sig0 && !sig1)
        throw NonTransientError("increment drift is indistinguishable from zero at 3 sigma");
}

double max_step_sd(const IncrementSpec& inc) {
    return std::sqrt(std::max(inc.cov.m00, inc.cov.m11));
}

}  // namespace

void IncrementSpec::validate() const {
    if (!cov.symmetric(1e-12) || !cov.positive_definite())
        throw ConfigError("increment covariance must be symmetric positive definite");
    double total = 0;
    for (const auto& s : sign_law) {
        if (s.prob < 0) throw ConfigError("sign probabilities must be nonnegative");
        if (std::abs(s.pattern[0]) != 1 || std::abs(s.pattern[1]) != 1)
            throw ConfigError("sign patterns must have entries +-1");
        total += s.prob;
    }
    if (!sign_law.empty() && std::abs(total - 1.0) > 1e-9)
        throw ConfigError("sign probabilities must sum to 1");
}

std::vector<std::array<int, 2>> IncrementSpec::group() const {
    std::set<std::array<int, 2>> support;
    for (const auto& s : sign_law)
        if (s.prob > 0) support.insert(s.pattern);
    return close_group(support);
}

namespace {

// Shared path loop. visit(k_index, t_index) is called for every walk visit.
template <class Visit>
void run_paths(const IncrementSpec& inc, const Rect& region, const std::vector<double>& t_grid,
               const RenewalOptions& opts, bool track_signs, std::size_t n_groups,
               std::vector<std::vector<MeanVar>>& per_chunk_acc, Visit&& classify_sign) {
    const WalkSampler sampler(inc);
    const double drift_norm = norm(inc.mean);
    const Vec2 unit{inc.mean[0] / drift_norm, inc.mean[1] / drift_norm};
    const double sigma = max_step_sd(inc);
    const std::size_t n_t = t_grid.size();
    const std::size_t n_chunks = chunk_count(opts.n_paths, kPathChunk);
    per_chunk_acc.assign(n_chunks, std::vector<MeanVar>(n_t * n_groups));
    const RandomStream master(opts.seed);

    run_chunked(opts.n_paths, kPathChunk, opts.workers,
                [&](std::size_t c, std::size_t b, std::size_t e) {
        RandomStream stream = master.substream(c);
        std::vector<double> counts(n_t * n_groups);
        // Far corner projections along the drift, one per t.
        std::vector<double> far(n_t);
        for (std::size_t j = 0; j < n_t; ++j) {
            const Vec2 corner{t_grid[j] * inc.mean[0] + region.hi1,
                              t_grid[j] * inc.mean[1] + region.hi2};
            far[j] = dot(corner, unit);
        }
        const double far_max = *std::max_element(far.begin(), far.end());
        for (std::size_t i = b; i < e; ++i) {
            std::fill(counts.begin(), counts.end(), 0.0);
            Vec2 s{0, 0};
            std::array<int, 2> l{1, 1};
            for (std::int64_t n = 0;; ++n) {
                const double proj = dot(s, unit);
                if (proj - far_max > 10.0 * sigma * std::sqrt(static_cast<double>(n + 1)) ||
                    n > kHardStepCap)
                    break;
                for (std::size_t j = 0; j < n_t; ++j) {
                    const double r1 = s[0] - t_grid[j] * inc.mean[0];
                    const double r2 = s[1] - t_grid[j] * inc.mean[1];
                    if (r1 >= region.lo1 && r1 <= region.hi1 && r2 >= region.lo2 &&
                        r2 <= region.hi2) {
                        const std::size_t k = track_signs ? classify_sign(l) : 0;
                        counts[k * n_t + j] += 1.0;
                        // Last slot carries the sign-marginalized total.
                        if (track_signs && n_groups > 1) counts[(n_groups - 1) * n_t + j] += 1.0;
                    }
                }
                s = add(s, sampler.step(stream));
                if (track_signs) {
                    const std::array<int, 2> ks = sampler.sign_step(stream);
                    l = {l[0] * ks[0], l[1] * ks[1]};
                }
            }
            for (std::size_t k = 0; k < counts.size(); ++k) per_chunk_acc[c][k].add(counts[k]);
        }
    });
}

std::vector<Estimate> reduce_scaled(const std::vector<std::vector<MeanVar>>& per_chunk,
                                    const std::vector<double>& t_grid, std::size_t group_index,
                                    std::size_t n_groups) {
    const std::size_t n_t = t_grid.size();
    std::vector<Estimate> out(n_t);
    for (std::size_t j = 0; j < n_t; ++j) {
        MeanVar total;
        for (const auto& chunk : per_chunk) total.combine(chunk[group_index * n_t + j]);
        const double scale = std::sqrt(t_grid[j]);
        out[j].value = scale * total.mean();
        out[j].stderr = scale * total.stderr_mean();
        out[j].n = total.n;
        out[j].zero_hits = total.sum == 0.0;
        (void)n_groups;
    }
    return out;
}

void check_grid_positive(const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw ConfigError("t grid must be nonempty");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1])) throw ConfigError("t grid must be strictly increasing");
    if (!(t_grid.front() > 0)) throw ConfigError("t grid must be positive");
}

}  // namespace

RenewalEstimate renewal_measure_estimate(const IncrementSpec& inc, const Rect& region,
                                         const std::vector<double>& t_grid,
                                         const RenewalOptions& opts) {
    inc.validate();
    check_grid_positive(t_grid);
    transience_check(inc, opts.seed);
    RenewalEstimate out;
    out.region = region;
    out.t_grid = t_grid;
    std::vector<std::vector<MeanVar>> acc;
    run_paths(inc, region, t_grid, opts, /*track_signs=*/false, 1, acc,
              [](const std::array<int, 2>&) { return std::size_t{0}; });
    out.values = reduce_scaled(acc, t_grid, 0, 1);
    return out;
}

CarlssonTable carlsson_bound_check(const IncrementSpec& inc, const std::vector<double>& offsets,
                                   const std::vector<double>& t_grid,
                                   const RenewalOptions& opts) {
    inc.validate();
    check_grid_positive(t_grid);
    transience_check(inc, opts.seed);
    const double drift_norm = norm(inc.mean);
    const Vec2 perp{-inc.mean[1] / drift_norm, inc.mean[0] / drift_norm};
    CarlssonTable table;
    table.offsets = offsets;
    table.t_grid = t_grid;
    for (double r : offsets) {
        const Rect box{r * perp[0], r * perp[0] + 1.0, r * perp[1], r * perp[1] + 1.0};
        std::vector<std::vector<MeanVar>> acc;
        RenewalOptions o = opts;
        o.seed = splitmix64(opts.seed ^ static_cast<std::uint64_t>(std::llround(r * 1024.0)));
        run_paths(inc, box, t_grid, o, false, 1, acc,
                  [](const std::array<int, 2>&) { return std::size_t{0}; });
        table.values.push_back(reduce_scaled(acc, t_grid, 0, 1));
        for (const Estimate& e : table.values.back()) {
            table.max_value = std::max(table.max_value, e.value);
            if (r == 0.0) table.on_axis_max = std::max(table.on_axis_max, e.value);
        }
    }
    return table;
}

RenewalEstimate group_renewal_estimate(const IncrementSpec& inc, const Rect& region,
                                       const std::vector<double>& t_grid,
                                       const RenewalOptions& opts) {
    inc.validate();
    check_grid_positive(t_grid);
    transience_check(inc, opts.seed);

    const auto closure = inc.group();
    if (!inc.declared_group.empty()) {
        const auto declared = close_group(
            std::set<std::array<int, 2>>(inc.declared_group.begin(), inc.declared_group.end()));
        if (closure.size() < declared.size())
            throw GroupMismatchError("sign support generates a strict subgroup of the declared group");
    }
    std::map<std::array<int, 2>, std::size_t> index;
    for (std::size_t k = 0; k < closure.size(); ++k) index[closure[k]] = k;

    RenewalEstimate out;
    out.region = region;
    out.t_grid = t_grid;
    out.group = closure;
    // One extra slot accumulates the per-path total, so the marginal estimate
    // carries a proper path-level standard error.
    const std::size_t n_slots = closure.size() + 1;
    std::vector<std::vector<MeanVar>> acc;
    run_paths(inc, region, t_grid, opts, /*track_signs=*/true, n_slots, acc,
              [&](const std::array<int, 2>& l) { return index.at(l); });
    out.group_slices.resize(closure.size());
    for (std::size_t k = 0; k < closure.size(); ++k)
        out.group_slices[k] = reduce_scaled(acc, t_grid, k, n_slots);
    out.values = reduce_scaled(acc, t_grid, closure.size(), n_slots);
    return out;
}

}  // namespace hrv
