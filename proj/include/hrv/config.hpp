#pragma once

#include <optional>
#include <string>

#include "hrv/mc.hpp"
#include "hrv/models.hpp"
#include "hrv/renewal.hpp"

namespace hrv {

struct RenewalConfig {
    IncrementSpec increments;
    Rect region{0, 1, 0, 1};
    std::vector<double> offsets{0.0};
    std::vector<double> t_grid{50, 100, 200, 500};
    std::uint64_t n_paths = 20000;
};

struct AppConfig {
    std::optional<ModelSpec> model;
    std::uint64_t seed = 1;
    std::int64_t burn_in = 10000;
    std::int64_t thinning = 1;
    std::int64_t n_samples = 100000;
    std::optional<RenewalConfig> renewal;
};

// Strict parse: unknown keys are errors.
AppConfig load_config(const std::string& path);
AppConfig parse_config_text(const std::string& text);

}  // namespace hrv
