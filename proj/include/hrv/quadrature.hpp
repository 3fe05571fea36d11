#pragma once

#include <vector>

namespace hrv {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Hermite rule for weight exp(-x^2) on the real line (physicists'
// convention): sum w_i f(x_i) ~ integral f(x) e^{-x^2} dx.
QuadRule gauss_hermite(int n);

// Nodes/weights such that sum w_i f(z_i) ~ E[f(Z)] for Z ~ N(0,1).
QuadRule standard_normal_rule(int n);

}  // namespace hrv
