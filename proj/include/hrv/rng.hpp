#pragma once

#include <cstdint>
#include <random>

namespace hrv {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seeded stream with explicit substream derivation. Substreams are a pure
// function of (key, id), so chunked Monte Carlo gives identical output for
// any worker count. Gaussians use the polar method rather than
// std::normal_distribution to keep the draw sequence under our control.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t key) : key_(key) {
        std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(key)),
                          static_cast<std::uint32_t>(splitmix64(key) >> 32),
                          static_cast<std::uint32_t>(splitmix64(key + 1)),
                          static_cast<std::uint32_t>(splitmix64(key + 1) >> 32)};
        engine_.seed(seq);
    }

    RandomStream substream(std::uint64_t id) const {
        return RandomStream(splitmix64(key_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t key() const { return key_; }

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (-1, 1), excluding exact 0 endpoints only with prob 0.
    double uniform_sym() { return 2.0 * uniform() - 1.0; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform_sym();
            v = uniform_sym();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

  private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hrv
