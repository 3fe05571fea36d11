#include "hrv/mc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include "hrv/parallel.hpp"

namespace hrv {

namespace {

constexpr std::size_t kSampleChunk = 8192;
constexpr std::size_t kPathChunk = 1024;

double pow_alpha(double x, double a) {
    const double ax = std::abs(x);
    return a == 1.0 ? ax : std::pow(ax, a);
}

// Runs chunked work and rethrows the first worker exception.
template <class Fn>
void run_chunked_checked(std::size_t n, std::size_t chunk, int workers, Fn&& fn) {
    std::exception_ptr first_error;
    std::mutex mu;
    run_chunked(n, chunk, workers, [&](std::size_t c, std::size_t b, std::size_t e) {
        try {
            fn(c, b, e);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::array<int, 2>> representative_sign_group(const ModelSpec& spec,
                                                          std::uint64_t seed) {
    std::vector<std::array<int, 2>> out;
    for (const auto& pattern : observed_sign_group(spec, splitmix64(seed ^ 0x516EULL))) {
        const std::array<int, 2> rep{pattern[0], pattern[1]};
        if (std::find(out.begin(), out.end(), rep) == out.end()) out.push_back(rep);
    }
    return out;
}

void drift_pilot_check(const ModelSpec& spec, const SimulationConfig& cfg) {
    const std::int64_t n = std::min<std::int64_t>(std::max<std::int64_t>(cfg.burn_in, 1000), 20000);
    RandomStream stream = RandomStream(cfg.seed).substream(0xD21F7ULL);
    MeanVar drift[2];
    for (std::int64_t i = 0; i < n; ++i) {
        const AbDraw d = sample_ab(spec, stream);
        drift[0].add(d.log_abs_a[0]);
        drift[1].add(d.log_abs_a[1]);
    }
    for (int j = 0; j < 2; ++j) {
        const double m = drift[j].mean(), se = drift[j].stderr_mean();
        if (m >= 0.0 && m >= -3.0 * se)
            throw NonContractingError("estimated E log|A_" + std::to_string(j + 1) + "| = " +
                                      std::to_string(m) + " is nonnegative at 3 sigma");
    }
}

}  // namespace

double SampleBatch::block_norm(std::size_t row, int block) const {
    const auto& cls = block == 0 ? blocks_.first : blocks_.second;
    double v = 0;
    for (int c : cls) v = std::max(v, pow_alpha(x(row, c), alpha_[c]));
    return v;
}

double SampleBatch::polar_s(std::size_t row) const {
    return std::max(block_norm(row, 0), block_norm(row, 1));
}

double SampleBatch::omega(std::size_t row, int col) const {
    const double s = polar_s(row);
    return x(row, col) * std::pow(s, -1.0 / alpha_[col]);
}

SampleBatch simulate_stationary(const ModelSpec& spec, const TailIndices& alpha,
                                const SimulationConfig& cfg) {
    spec.validate();
    cfg.validate();
    drift_pilot_check(spec, cfg);

    SampleBatch batch(spec.dim,
                      alpha.per_coord.empty() ? per_coordinate_alpha(spec, alpha.alpha)
                                              : alpha.per_coord,
                      spec.blocks, spec.canonical_text(), cfg,
                      representative_sign_group(spec, cfg.seed));
    const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
    const int d = spec.dim;
    batch.data().assign(n * d, 0.0);
    const RandomStream master(cfg.seed);

    run_chunked_checked(n, kSampleChunk, cfg.workers, [&](std::size_t c, std::size_t b, std::size_t e) {
        RandomStream stream = master.substream(c);
        std::vector<double> state(d, 0.0);
        for (std::int64_t k = 0; k < cfg.burn_in; ++k) {
            const AbDraw draw = sample_ab(spec, stream);
            for (int j = 0; j < d; ++j) state[j] = draw.a[j] * state[j] + draw.b[j];
        }
        for (std::size_t i = b; i < e; ++i) {
            for (std::int64_t k = 0; k < cfg.thinning; ++k) {
                const AbDraw draw = sample_ab(spec, stream);
                for (int j = 0; j < d; ++j) state[j] = draw.a[j] * state[j] + draw.b[j];
            }
            for (int j = 0; j < d; ++j) batch.data()[i * d + j] = state[j];
        }
    });
    return batch;
}

PerpetuityResult perpetuity_truncated(const ModelSpec& spec, const TailIndices& alpha,
                                      int n_terms, const SimulationConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (n_terms < 1) throw ConfigError("n_terms must be >= 1");
    drift_pilot_check(spec, cfg);

    const std::vector<double> pca =
        alpha.per_coord.empty() ? per_coordinate_alpha(spec, alpha.alpha) : alpha.per_coord;
    SampleBatch batch(spec.dim, pca, spec.blocks, spec.canonical_text(), cfg,
                      representative_sign_group(spec, cfg.seed));
    const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
    const int d = spec.dim;
    batch.data().assign(n * d, 0.0);
    const RandomStream master(cfg.seed);

    const std::size_t n_chunks = chunk_count(n, kSampleChunk);
    std::vector<MeanVar> prod_rep(2 * n_chunks), abs_rep(2 * n_chunks);

    run_chunked_checked(n, kSampleChunk, cfg.workers, [&](std::size_t c, std::size_t b, std::size_t e) {
        RandomStream stream = master.substream(c ^ 0x9D5ULL);
        std::vector<double> x(d), prod(d);
        for (std::size_t i = b; i < e; ++i) {
            std::fill(x.begin(), x.end(), 0.0);
            std::fill(prod.begin(), prod.end(), 1.0);
            for (int k = 0; k < n_terms; ++k) {
                const AbDraw draw = sample_ab(spec, stream);
                for (int j = 0; j < d; ++j) {
                    x[j] += prod[j] * draw.b[j];
                    prod[j] *= draw.a[j];
                }
            }
            for (int j = 0; j < d; ++j) batch.data()[i * d + j] = x[j];
            for (int j = 0; j < 2; ++j) {
                prod_rep[c * 2 + j].add(std::abs(prod[j]));
                abs_rep[c * 2 + j].add(std::abs(x[j]));
            }
        }
    });

    PerpetuityResult out{std::move(batch), {0.0, 0.0}};
    for (int j = 0; j < 2; ++j) {
        MeanVar prod_total, abs_total;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            prod_total.combine(prod_rep[c * 2 + j]);
            abs_total.combine(abs_rep[c * 2 + j]);
        }
        out.remainder_estimate[j] = prod_total.mean() * abs_total.mean();
    }
    return out;
}

double batch_ks_distance(const SampleBatch& a, const SampleBatch& b, int col) {
    std::vector<double> xa(a.size()), xb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) xa[i] = a.x(i, col);
    for (std::size_t i = 0; i < b.size(); ++i) xb[i] = b.x(i, col);
    return ks_distance(std::move(xa), std::move(xb));
}

EsscherTilt make_tilt(const MgfEvaluator& ev, const Vec2& xi, TiltOptions opts) {
    const ModelSpec& spec = ev.spec();
    const Vec2 alpha = ev.tail_indices().alpha;
    const double p = ev.phi(xi).value;
    if (std::abs(p - 1.0) > opts.certify_tol)
        throw std::invalid_argument("tilt point must satisfy phi(xi) = 1, got phi = " +
                                    std::to_string(p));
    EsscherTilt tilt;
    tilt.xi = xi;
    tilt.options = opts;
    tilt.theta = {xi[0] * alpha[0], xi[1] * alpha[1]};
    tilt.drift = ev.tilted_mean(xi);

    switch (spec.family) {
        case Family::LogGaussian: {
            const auto& prm = spec.log_gaussian();
            tilt.lg_mean = add(prm.m, prm.C.mul(tilt.theta));
            tilt.lg_chol = prm.C.cholesky();
            return tilt;  // exact Gaussian mean shift, no rejection
        }
        case Family::CccGarch: {
            const auto& prm = spec.ccc_garch();
            const double r = opts.z_window;
            const double q = std::sqrt(1.0 - prm.eta * prm.eta);
            const double r2 = std::abs(prm.eta) * r + q * r;
            tilt.reject_bound = std::pow(prm.b[0] + prm.c[0] * r * r, tilt.theta[0]) *
                                std::pow(prm.b[1] + prm.c[1] * r2 * r2, tilt.theta[1]);
            break;
        }
        case Family::BekkDiag: {
            const auto& prm = spec.bekk_diag();
            double g00 = 0, g01 = 0, g11 = 0;
            for (const auto& lag : prm.lags) {
                g00 += lag[0] * lag[0];
                g01 += lag[0] * lag[1];
                g11 += lag[1] * lag[1];
            }
            tilt.sigma_a1 = std::sqrt(g00);
            tilt.sigma_a2 = std::sqrt(g11);
            tilt.corr_a = g01 / (tilt.sigma_a1 * tilt.sigma_a2);
            const double r = opts.z_window;
            tilt.reject_bound = std::pow(r * tilt.sigma_a1, tilt.theta[0]) *
                                std::pow(r * tilt.sigma_a2, tilt.theta[1]);
            break;
        }
        case Family::Custom: {
            tilt.reject_bound = std::exp(dot(xi, opts.custom_u_cap));
            break;
        }
    }

    // Stall probe with a dedicated stream; catches misconfigured windows
    // before a long run burns through rejections.
    RandomStream probe(splitmix64(0xBADCAFEULL));
    std::int64_t accepted = 0, attempts = 0;
    while (attempts < opts.stall_probe) {
        tilted_step(spec, ev.tail_indices(), tilt, probe, &attempts);
        ++accepted;
    }
    if (static_cast<double>(accepted) < 1e-4 * static_cast<double>(attempts))
        throw RejectionStallError("tilted sampler acceptance rate below 1e-4");
    return tilt;
}

TiltedStep tilted_step(const ModelSpec& spec, const TailIndices& alpha, const EsscherTilt& tilt,
                       RandomStream& stream, std::int64_t* attempt_counter) {
    TiltedStep step;
    std::int64_t local_attempts = 0;
    auto attempt = [&]() {
        ++local_attempts;
        if (attempt_counter) ++*attempt_counter;
        if (local_attempts > 10 * tilt.options.stall_probe)
            throw RejectionStallError("tilted sampler stalled");
    };
    switch (spec.family) {
        case Family::LogGaussian: {
            const double n1 = stream.normal(), n2 = stream.normal();
            const double z1 = tilt.lg_mean[0] + tilt.lg_chol.m00 * n1;
            const double z2 = tilt.lg_mean[1] + tilt.lg_chol.m10 * n1 + tilt.lg_chol.m11 * n2;
            step.u = {alpha.alpha[0] * z1, alpha.alpha[1] * z2};
            step.sign.assign(spec.dim, 1);
            if (attempt_counter) ++*attempt_counter;
            return step;
        }
        case Family::CccGarch: {
            const auto& prm = spec.ccc_garch();
            const double r = tilt.options.z_window;
            const double q = std::sqrt(1.0 - prm.eta * prm.eta);
            for (;;) {
                attempt();
                const double z1 = stream.normal(), zp = stream.normal();
                if (std::abs(z1) > r || std::abs(zp) > r) continue;
                const double z2 = prm.eta * z1 + q * zp;
                const double a1 = prm.b[0] + prm.c[0] * z1 * z1;
                const double a2 = prm.b[1] + prm.c[1] * z2 * z2;
                const double w = std::pow(a1, tilt.theta[0]) * std::pow(a2, tilt.theta[1]);
                if (stream.uniform() * tilt.reject_bound < w) {
                    step.u = {alpha.alpha[0] * std::log(a1), alpha.alpha[1] * std::log(a2)};
                    step.sign.assign(spec.dim, 1);
                    return step;
                }
            }
        }
        case Family::BekkDiag: {
            const double r = tilt.options.z_window;
            const double q = std::sqrt(1.0 - tilt.corr_a * tilt.corr_a);
            for (;;) {
                attempt();
                const double n1 = stream.normal(), n2 = stream.normal();
                const double a1 = tilt.sigma_a1 * n1;
                const double a2 = tilt.sigma_a2 * (tilt.corr_a * n1 + q * n2);
                if (std::abs(a1) > r * tilt.sigma_a1 || std::abs(a2) > r * tilt.sigma_a2) continue;
                if (a1 == 0.0 || a2 == 0.0) continue;
                const double w =
                    std::pow(std::abs(a1), tilt.theta[0]) * std::pow(std::abs(a2), tilt.theta[1]);
                if (stream.uniform() * tilt.reject_bound < w) {
                    step.u = {alpha.alpha[0] * std::log(std::abs(a1)),
                              alpha.alpha[1] * std::log(std::abs(a2))};
                    step.sign.assign(spec.dim, 1);
                    step.sign[0] = a1 > 0 ? 1 : -1;
                    step.sign[1] = a2 > 0 ? 1 : -1;
                    return step;
                }
            }
        }
        case Family::Custom: {
            for (;;) {
                attempt();
                const AbDraw d = sample_ab(spec, stream);
                const Vec2 u = d.exponent_scaled(alpha.alpha);
                if (u[0] > tilt.options.custom_u_cap[0] || u[1] > tilt.options.custom_u_cap[1])
                    continue;
                const double w = std::exp(dot(tilt.xi, u));
                if (stream.uniform() * tilt.reject_bound < w) {
                    step.u = u;
                    step.sign = d.sign;
                    return step;
                }
            }
        }
    }
    throw Error("unreachable family");
}

WalkPath tilted_walk(const ModelSpec& spec, const TailIndices& alpha, const EsscherTilt& tilt,
                     int n_steps, RandomStream& stream) {
    WalkPath path;
    path.s.reserve(n_steps);
    path.l.reserve(n_steps);
    Vec2 s{0, 0};
    std::vector<int> l(spec.dim, 1);
    for (int k = 0; k < n_steps; ++k) {
        const TiltedStep st = tilted_step(spec, alpha, tilt, stream);
        s = add(s, st.u);
        for (int j = 0; j < spec.dim; ++j) l[j] *= st.sign[j];
        path.s.push_back(s);
        path.l.push_back(l);
    }
    return path;
}

namespace {

struct PathStats {
    std::vector<MeanVar> per_chunk;
    std::uint64_t hits = 0;
};

Estimate reduce_chunks(const std::vector<MeanVar>& per_chunk) {
    MeanVar total;
    for (const auto& mv : per_chunk) total.combine(mv);
    Estimate est;
    est.value = total.mean();
    est.stderr = total.stderr_mean();
    est.n = total.n;
    est.zero_hits = total.sum == 0.0;
    return est;
}

}  // namespace

JointExceedanceResult joint_exceedance_prob(const ModelSpec& spec, const TailIndices& alpha,
                                            const MgfEvaluator& ev, const Vec2& xi_star, double t,
                                            double eps, const ExceedanceOptions& opts) {
    if (!(t > 1.0)) throw std::invalid_argument("joint_exceedance_prob requires t > 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const EsscherTilt tilt = make_tilt(ev, xi_star);
    const double rho = 0.5 * (tilt.drift[0] + tilt.drift[1]);
    if (!(rho > 0)) throw Error("tilted drift must be positive");
    const std::int64_t cap = static_cast<std::int64_t>(std::ceil(4.0 * std::log(t) / rho));
    const double lt1 = std::log(t), lt2 = std::log(eps * t);

    JointExceedanceResult out;
    out.rho = rho;
    out.step_cap = cap;

    const std::size_t n_paths = opts.n_paths;
    const std::size_t n_chunks = chunk_count(n_paths, kPathChunk);
    const RandomStream master(opts.seed);
    {
        std::vector<MeanVar> chunks(n_chunks);
        run_chunked_checked(n_paths, kPathChunk, opts.workers,
                            [&](std::size_t c, std::size_t b, std::size_t e) {
            RandomStream stream = master.substream(c);
            for (std::size_t i = b; i < e; ++i) {
                Vec2 s{0, 0};
                double w = 0.0;
                for (std::int64_t k = 0; k < cap; ++k) {
                    const TiltedStep st = tilted_step(spec, alpha, tilt, stream);
                    s = add(s, st.u);
                    if (s[0] > lt1 && s[1] > lt2) {
                        w = std::exp(-dot(xi_star, s));
                        break;
                    }
                }
                chunks[c].add(w);
            }
        });
        out.importance = reduce_chunks(chunks);
    }
    if (t <= opts.crude_max_t) {
        std::vector<MeanVar> chunks(n_chunks);
        run_chunked_checked(n_paths, kPathChunk, opts.workers,
                            [&](std::size_t c, std::size_t b, std::size_t e) {
            RandomStream stream = master.substream(c ^ 0xC01DULL);
            for (std::size_t i = b; i < e; ++i) {
                Vec2 s{0, 0};
                double hit = 0.0;
                for (std::int64_t k = 0; k < cap; ++k) {
                    const AbDraw d = sample_ab(spec, stream);
                    s = add(s, d.exponent_scaled(alpha.alpha));
                    if (s[0] > lt1 && s[1] > lt2) {
                        hit = 1.0;
                        break;
                    }
                }
                chunks[c].add(hit);
            }
        });
        out.crude = reduce_chunks(chunks);
    }
    return out;
}

WalkBoxResult walk_box_prob(const ModelSpec& spec, const TailIndices& alpha,
                            const MgfEvaluator& ev, const Vec2& xi_star, double t, int ell,
                            double eps, const ExceedanceOptions& opts, Vec2 shift) {
    if (!(t > 1.0)) throw std::invalid_argument("walk_box_prob requires t > 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const EsscherTilt tilt = make_tilt(ev, xi_star);
    const double rho = 0.5 * (tilt.drift[0] + tilt.drift[1]);
    const std::int64_t n0 = static_cast<std::int64_t>(std::ceil(std::log(t) / rho));
    if (!(ell >= 0 && static_cast<double>(ell) <= std::sqrt(static_cast<double>(n0))))
        throw std::invalid_argument("ell must satisfy 0 <= ell <= sqrt(n0)");
    const std::int64_t n = n0 + ell;
    const double c1 = static_cast<double>(n0) * rho + shift[0];
    const double c2 = static_cast<double>(n0) * rho + std::log(eps) + shift[1];

    WalkBoxResult out;
    out.n0 = n0;
    out.n = n;
    out.rho = rho;

    const std::size_t n_paths = opts.n_paths;
    const std::size_t n_chunks = chunk_count(n_paths, kPathChunk);
    const RandomStream master(opts.seed);
    std::vector<MeanVar> chunks(n_chunks);
    run_chunked_checked(n_paths, kPathChunk, opts.workers,
                        [&](std::size_t c, std::size_t b, std::size_t e) {
        RandomStream stream = master.substream(c ^ 0xB0C5ULL);
        for (std::size_t i = b; i < e; ++i) {
            Vec2 s{0, 0};
            for (std::int64_t k = 0; k < n; ++k)
                s = add(s, tilted_step(spec, alpha, tilt, stream).u);
            const bool in_box = s[0] > c1 && s[0] < c1 + 1.0 && s[1] > c2 && s[1] < c2 + 1.0;
            chunks[c].add(in_box ? std::exp(-dot(xi_star, s)) : 0.0);
        }
    });
    out.mc = reduce_chunks(chunks);

    // Gaussian local term: exact exponential-weight integral over the box
    // times the limiting standardized density at the drift-centered box.
    const Mat2 cov = ev.tilted_cov(xi_star);
    const double s1 = std::sqrt(cov.m00), s2 = std::sqrt(cov.m11);
    const double r = cov.m01 / (s1 * s2);
    const double w1 = (shift[0] + 0.5 - static_cast<double>(ell) * rho) / (s1 * std::sqrt(n));
    const double w2 = (shift[1] + 0.5 - static_cast<double>(ell) * rho) / (s2 * std::sqrt(n));
    const double det = 1.0 - r * r;
    const double dens = std::exp(-0.5 * (w1 * w1 - 2.0 * r * w1 * w2 + w2 * w2) / det) /
                        (2.0 * std::acos(-1.0) * std::sqrt(det));
    const double boxw1 = (1.0 - std::exp(-xi_star[0])) / xi_star[0];
    const double boxw2 = (1.0 - std::exp(-xi_star[1])) / xi_star[1];
    out.gauss = std::exp(-(xi_star[0] + xi_star[1]) * static_cast<double>(n0) * rho -
                         dot(xi_star, shift)) *
                std::pow(eps, -xi_star[1]) * boxw1 * boxw2 * dens /
                (s1 * s2 * static_cast<double>(n));
    return out;
}

}  // namespace hrv
