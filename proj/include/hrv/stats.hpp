#pragma once

#include <cstdint>
#include <vector>

namespace hrv {

// Plain-sum accumulator. Combination order is the caller's responsibility;
// combining chunk accumulators in chunk-index order keeps results
// reproducible regardless of thread scheduling.
struct MeanVar {
    double sum = 0.0;
    double sumsq = 0.0;
    std::uint64_t n = 0;

    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    void combine(const MeanVar& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const;
    double stderr_mean() const;
};

struct Estimate {
    double value = 0.0;
    double stderr = 0.0;
    std::uint64_t n = 0;
    bool zero_hits = false;
};

struct SlopeFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
};

// Weighted least squares of y on x with per-point standard deviations.
SlopeFit weighted_ls_slope(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& sigma);

// Two-sample Kolmogorov-Smirnov distance; inputs need not be sorted.
double ks_distance(std::vector<double> a, std::vector<double> b);

// Regularized incomplete gamma functions and the chi-square survival function.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double chi_square_sf(double x, double dof);

double digamma(double x);

// Empirical quantile (linear interpolation); v need not be sorted.
double quantile(std::vector<double> v, double p);

}  // namespace hrv
