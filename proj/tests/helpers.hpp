#pragma once

#include <cmath>
#include <vector>

#include "hrv/mgf.hpp"
#include "hrv/models.hpp"

namespace hrv::testing {

inline ModelSpec log_gaussian_spec(double m1 = -0.5, double m2 = -0.5, double eta = 0.5) {
    ModelSpec spec;
    spec.family = Family::LogGaussian;
    LogGaussianParams p;
    p.m = {m1, m2};
    p.C = {1.0, eta, eta, 1.0};
    spec.params = p;
    return spec;
}

inline ModelSpec ccc_garch_spec(double eta = 0.5, Vec2 a = {1.0, 1.0}, Vec2 b = {0.5, 0.5},
                                Vec2 c = {0.5, 0.5}) {
    ModelSpec spec;
    spec.family = Family::CccGarch;
    CccGarchParams p;
    p.a = a;
    p.b = b;
    p.c = c;
    p.eta = eta;
    spec.params = p;
    return spec;
}

inline ModelSpec bekk_spec(Vec2 lag1 = {0.85, 0.25}, Vec2 lag2 = {0.35, 0.75}) {
    ModelSpec spec;
    spec.family = Family::BekkDiag;
    BekkDiagParams p;
    p.lags = {lag1, lag2};
    p.cov = Mat2::identity();
    spec.params = p;
    return spec;
}

// Deterministic recursion x <- a x + b.
inline ModelSpec constant_spec(Vec2 a, Vec2 b) {
    ModelSpec spec;
    spec.family = Family::Custom;
    CustomParams p;
    p.dim = 2;
    p.ab_independent = true;
    p.sampler = [a, b](RandomStream&, std::vector<double>& av, std::vector<double>& bv) {
        av = {a[0], a[1]};
        bv = {b[0], b[1]};
    };
    p.abs_a_moment = [a](int comp, double s) { return std::pow(std::abs(a[comp]), s); };
    p.log_abs_a_mean = [a](int comp) { return std::log(std::abs(a[comp])); };
    spec.params = p;
    return spec;
}

inline TailIndices unit_alpha(const ModelSpec& spec) {
    TailIndices ti;
    ti.alpha = {1.0, 1.0};
    ti.per_coord = per_coordinate_alpha(spec, ti.alpha);
    return ti;
}

// Independent oracle for E|sigma N(0,1)|^t: trapezoid rule in log coordinates,
// where the integrand of the half-line integral is smooth and decays fast.
inline double abs_normal_moment_oracle(double t, double sigma = 1.0) {
    const double h = 0.05;
    double acc = 0;
    for (double y = -60.0; y <= 6.0; y += h) {
        const double x = std::exp(y);
        acc += std::exp((t + 1.0) * y - 0.5 * x * x);
    }
    return std::pow(sigma, t) * 2.0 * h * acc / std::sqrt(2.0 * std::acos(-1.0));
}

}  // namespace hrv::testing
