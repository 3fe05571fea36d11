#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hrv/common.hpp"
#include "hrv/rng.hpp"

namespace hrv {

enum class Family { LogGaussian, CccGarch, BekkDiag, Custom };

std::string family_name(Family f);

struct LogGaussianParams {
    Vec2 m{};
    Mat2 C = Mat2::identity();
};

struct CccGarchParams {
    Vec2 a{};
    Vec2 b{};
    Vec2 c{};
    double eta = 0.0;
};

struct BekkDiagParams {
    std::vector<Vec2> lags;  // diagonal entries of each lag matrix
    Mat2 cov = Mat2::identity();
};

// User-supplied model. The sampler fills the diagonal coefficients and the
// additive term for all dim coordinates; coordinates 0 and 1 are the block
// representatives. Moment callbacks are optional; absent ones fall back to
// fixed-seed Monte Carlo.
struct CustomParams {
    int dim = 2;
    std::function<void(RandomStream&, std::vector<double>&, std::vector<double>&)> sampler;
    bool ab_independent = false;
    std::function<double(int, double)> abs_a_moment;   // E|A_i|^s, i in {0,1}
    std::function<double(int)> log_abs_a_mean;         // E log|A_i|
    std::vector<double> alpha_ext;                     // per-coordinate exponents, size dim (0/1 ignored)
};

// Two declared coordinate classes, 0-based. Coordinate 0 represents the first
// class and coordinate 1 the second.
struct Blocks {
    std::vector<int> first{0};
    std::vector<int> second{1};
};

struct ModelSpec {
    Family family = Family::LogGaussian;
    std::variant<LogGaussianParams, CccGarchParams, BekkDiagParams, CustomParams> params =
        LogGaussianParams{};
    int dim = 2;
    Blocks blocks;

    const LogGaussianParams& log_gaussian() const { return std::get<LogGaussianParams>(params); }
    const CccGarchParams& ccc_garch() const { return std::get<CccGarchParams>(params); }
    const BekkDiagParams& bekk_diag() const { return std::get<BekkDiagParams>(params); }
    const CustomParams& custom() const { return std::get<CustomParams>(params); }

    void validate() const;
    int block_of(int coord) const;
    bool ab_independent() const;

    // Canonical textual form of the parameters, hashed into run manifests and
    // batch headers.
    std::string canonical_text() const;
};

struct AbDraw {
    std::vector<double> a;
    std::vector<double> b;
    Vec2 log_abs_a{};        // log|a_i| for the two representatives
    std::vector<int> sign;   // sign(a_i) per coordinate

    Vec2 exponent_scaled(const Vec2& alpha) const {
        return {alpha[0] * log_abs_a[0], alpha[1] * log_abs_a[1]};
    }
};

AbDraw sample_ab(const ModelSpec& spec, RandomStream& stream);

// log Phi(theta) = log E[|A_1|^{theta_1} |A_2|^{theta_2}] where a closed form
// exists; absent otherwise.
std::optional<double> closed_form_log_mgf(const ModelSpec& spec, const Vec2& theta);

// Checks the declared block structure on n draws: within a block, the scaled
// coefficient magnitudes |a_i|^{alpha_i} must agree with the representative's
// shared factor. Built-in families share it by construction; the tolerance
// absorbs pow/exp rounding for user samplers.
void validate_blocks(const ModelSpec& spec, const std::vector<double>& per_coord_alpha,
                     std::uint64_t seed, int n_draws = 10000, double rel_tol = 1e-12);

// Per-coordinate exponent vector of length dim, given the representative pair.
std::vector<double> per_coordinate_alpha(const ModelSpec& spec, const Vec2& alpha_rep);

// Sign patterns observed on n draws, closed under componentwise product.
std::vector<std::vector<int>> observed_sign_group(const ModelSpec& spec, std::uint64_t seed,
                                                  int n_draws = 1000);

}  // namespace hrv
