#include "hrv/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace hrv {

std::string family_name(Family f) {
    switch (f) {
        case Family::LogGaussian: return "log_gaussian";
        case Family::CccGarch: return "ccc_garch";
        case Family::BekkDiag: return "bekk_diag";
        case Family::Custom: return "custom";
    }
    return "?";
}

namespace {

void validate_blocks_shape(const Blocks& blocks, int dim) {
    if (blocks.first.empty() || blocks.second.empty())
        throw ConfigError("blocks: both classes must be nonempty");
    std::set<int> seen;
    for (int i : blocks.first) seen.insert(i);
    for (int i : blocks.second) seen.insert(i);
    if (static_cast<int>(seen.size()) != static_cast<int>(blocks.first.size() + blocks.second.size()))
        throw ConfigError("blocks: classes must be disjoint");
    if (static_cast<int>(seen.size()) != dim || *seen.begin() != 0 || *seen.rbegin() != dim - 1)
        throw ConfigError("blocks: classes must cover coordinates 0..dim-1");
    if (std::find(blocks.first.begin(), blocks.first.end(), 0) == blocks.first.end())
        throw ConfigError("blocks: coordinate 0 must lie in the first class");
    if (std::find(blocks.second.begin(), blocks.second.end(), 1) == blocks.second.end())
        throw ConfigError("blocks: coordinate 1 must lie in the second class");
}

void append_num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
    out += ';';
}

}  // namespace

void ModelSpec::validate() const {
    if (dim < 2) throw ConfigError("dim must be >= 2");
    validate_blocks_shape(blocks, dim);
    switch (family) {
        case Family::LogGaussian: {
            const auto& p = log_gaussian();
            if (dim != 2) throw ConfigError("log_gaussian: dim must be 2");
            if (!p.C.symmetric(1e-12) || !p.C.positive_definite())
                throw ConfigError("log_gaussian: C must be symmetric positive definite");
            break;
        }
        case Family::CccGarch: {
            const auto& p = ccc_garch();
            if (dim != 2) throw ConfigError("ccc_garch: dim must be 2");
            for (int i = 0; i < 2; ++i)
                if (p.a[i] <= 0 || p.b[i] <= 0 || p.c[i] <= 0)
                    throw ConfigError("ccc_garch: a, b, c must be strictly positive");
            if (!(p.eta > -1.0 && p.eta < 1.0))
                throw ConfigError("ccc_garch: eta must lie in (-1, 1)");
            break;
        }
        case Family::BekkDiag: {
            const auto& p = bekk_diag();
            if (dim != 2) throw ConfigError("bekk_diag: dim must be 2");
            if (p.lags.size() < 2) throw ConfigError("bekk_diag: need at least two lag matrices");
            if (!p.cov.symmetric(1e-12) || !p.cov.positive_definite())
                throw ConfigError("bekk_diag: Cov must be symmetric positive definite");
            // Gram matrix of the 2 x m lag-entry matrix; rank 2 <=> SPD.
            double g00 = 0, g01 = 0, g11 = 0;
            for (const auto& lag : p.lags) {
                g00 += lag[0] * lag[0];
                g01 += lag[0] * lag[1];
                g11 += lag[1] * lag[1];
            }
            const double det = g00 * g11 - g01 * g01;
            if (!(det > 1e-12 * std::max(1.0, g00 * g11)))
                throw ConfigError("bekk_diag: lag entry matrix must have rank 2");
            break;
        }
        case Family::Custom: {
            const auto& p = custom();
            if (p.dim != dim) throw ConfigError("custom: dim mismatch");
            if (!p.sampler) throw ConfigError("custom: sampler is required");
            if (!p.alpha_ext.empty() && static_cast<int>(p.alpha_ext.size()) != dim)
                throw ConfigError("custom: alpha_ext must have dim entries");
            break;
        }
    }
}

int ModelSpec::block_of(int coord) const {
    for (int i : blocks.first)
        if (i == coord) return 0;
    for (int i : blocks.second)
        if (i == coord) return 1;
    throw ConfigError("coordinate outside declared blocks");
}

bool ModelSpec::ab_independent() const {
    switch (family) {
        case Family::LogGaussian: return true;   // B drawn independently of A
        case Family::CccGarch: return true;      // B constant
        case Family::BekkDiag: return true;
        case Family::Custom: return custom().ab_independent;
    }
    return false;
}

std::string ModelSpec::canonical_text() const {
    std::string out = family_name(family);
    out += '|';
    out += "dim=" + std::to_string(dim) + '|';
    out += "blocks=";
    for (int i : blocks.first) out += std::to_string(i) + ',';
    out += '/';
    for (int i : blocks.second) out += std::to_string(i) + ',';
    out += '|';
    switch (family) {
        case Family::LogGaussian: {
            const auto& p = log_gaussian();
            append_num(out, p.m[0]);
            append_num(out, p.m[1]);
            append_num(out, p.C.m00);
            append_num(out, p.C.m01);
            append_num(out, p.C.m11);
            break;
        }
        case Family::CccGarch: {
            const auto& p = ccc_garch();
            for (int i = 0; i < 2; ++i) append_num(out, p.a[i]);
            for (int i = 0; i < 2; ++i) append_num(out, p.b[i]);
            for (int i = 0; i < 2; ++i) append_num(out, p.c[i]);
            append_num(out, p.eta);
            break;
        }
        case Family::BekkDiag: {
            const auto& p = bekk_diag();
            for (const auto& lag : p.lags) {
                append_num(out, lag[0]);
                append_num(out, lag[1]);
            }
            append_num(out, p.cov.m00);
            append_num(out, p.cov.m01);
            append_num(out, p.cov.m11);
            break;
        }
        case Family::Custom:
            out += "user-sampler";
            break;
    }
    return out;
}

AbDraw sample_ab(const ModelSpec& spec, RandomStream& stream) {
    AbDraw draw;
    draw.a.resize(spec.dim);
    draw.b.resize(spec.dim);
    draw.sign.resize(spec.dim);
    switch (spec.family) {
        case Family::LogGaussian: {
            const auto& p = spec.log_gaussian();
            const Mat2 l = p.C.cholesky();
            const double n1 = stream.normal(), n2 = stream.normal();
            const double z1 = p.m[0] + l.m00 * n1;
            const double z2 = p.m[1] + l.m10 * n1 + l.m11 * n2;
            draw.a[0] = std::exp(z1);
            draw.a[1] = std::exp(z2);
            draw.log_abs_a = {z1, z2};
            draw.b[0] = stream.normal();
            draw.b[1] = stream.normal();
            break;
        }
        case Family::CccGarch: {
            const auto& p = spec.ccc_garch();
            const double z1 = stream.normal();
            const double zp = stream.normal();
            const double z2 = p.eta * z1 + std::sqrt(1.0 - p.eta * p.eta) * zp;
            draw.a[0] = p.b[0] + p.c[0] * z1 * z1;
            draw.a[1] = p.b[1] + p.c[1] * z2 * z2;
            draw.log_abs_a = {std::log(draw.a[0]), std::log(draw.a[1])};
            draw.b[0] = p.a[0];
            draw.b[1] = p.a[1];
            break;
        }
        case Family::BekkDiag: {
            const auto& p = spec.bekk_diag();
            double a1 = 0, a2 = 0;
            for (const auto& lag : p.lags) {
                const double m = stream.normal();
                a1 += lag[0] * m;
                a2 += lag[1] * m;
            }
            draw.a[0] = a1;
            draw.a[1] = a2;
            draw.log_abs_a = {std::log(std::abs(a1)), std::log(std::abs(a2))};
            const Mat2 l = p.cov.cholesky();
            const double n1 = stream.normal(), n2 = stream.normal();
            draw.b[0] = l.m00 * n1;
            draw.b[1] = l.m10 * n1 + l.m11 * n2;
            break;
        }
        case Family::Custom: {
            spec.custom().sampler(stream, draw.a, draw.b);
            if (static_cast<int>(draw.a.size()) != spec.dim ||
                static_cast<int>(draw.b.size()) != spec.dim)
                throw DegenerateModelError("custom sampler produced wrong dimension");
            draw.log_abs_a = {std::log(std::abs(draw.a[0])), std::log(std::abs(draw.a[1]))};
            break;
        }
    }
    for (int i = 0; i < spec.dim; ++i) {
        if (draw.a[i] == 0.0)
            throw DegenerateModelError("sampled coefficient is exactly zero");
        draw.sign[i] = draw.a[i] > 0 ? 1 : -1;
    }
    return draw;
}

std::optional<double> closed_form_log_mgf(const ModelSpec& spec, const Vec2& theta) {
    if (spec.family != Family::LogGaussian) return std::nullopt;
    const auto& p = spec.log_gaussian();
    const Vec2 ct = p.C.mul(theta);
    return dot(p.m, theta) + 0.5 * dot(theta, ct);
}

std::vector<double> per_coordinate_alpha(const ModelSpec& spec, const Vec2& alpha_rep) {
    std::vector<double> out(spec.dim);
    out[0] = alpha_rep[0];
    out[1] = alpha_rep[1];
    const std::vector<double>* ext = nullptr;
    if (spec.family == Family::Custom && !spec.custom().alpha_ext.empty())
        ext = &spec.custom().alpha_ext;
    for (int i = 2; i < spec.dim; ++i)
        out[i] = ext ? (*ext)[i] : alpha_rep[spec.block_of(i)];
    return out;
}

void validate_blocks(const ModelSpec& spec, const std::vector<double>& per_coord_alpha,
                     std::uint64_t seed, int n_draws, double rel_tol) {
    spec.validate();
    RandomStream stream(seed);
    for (int k = 0; k < n_draws; ++k) {
        const AbDraw draw = sample_ab(spec, stream);
        for (int j = 0; j < 2; ++j) {
            const auto& cls = (j == 0) ? spec.blocks.first : spec.blocks.second;
            const int rep = j;
            const double ref = per_coord_alpha[rep] * draw.log_abs_a[rep];
            for (int i : cls) {
                const double v = per_coord_alpha[i] * std::log(std::abs(draw.a[i]));
                if (std::abs(v - ref) > rel_tol * std::max(1.0, std::abs(ref)))
                    throw ConfigError("blocks: coordinate " + std::to_string(i) +
                                      " breaks the within-block magnitude identity");
            }
        }
    }
}

std::vector<std::vector<int>> observed_sign_group(const ModelSpec& spec, std::uint64_t seed,
                                                  int n_draws) {
    RandomStream stream(seed);
    std::set<std::vector<int>> support;
    for (int k = 0; k < n_draws; ++k) support.insert(sample_ab(spec, stream).sign);
    // Close under componentwise product (elements are involutions).
    std::set<std::vector<int>> group(support.begin(), support.end());
    group.insert(std::vector<int>(spec.dim, 1));
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::vector<int>> items(group.begin(), group.end());
        for (const auto& g : items)
            for (const auto& h : items) {
                std::vector<int> prod(spec.dim);
                for (int i = 0; i < spec.dim; ++i) prod[i] = g[i] * h[i];
                if (group.insert(prod).second) grew = true;
            }
    }
    return {group.begin(), group.end()};
}

}  // namespace hrv
