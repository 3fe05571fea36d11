#include "hrv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hrv {

namespace {

// Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes, weights come
// from the first eigenvector components. Implicit-shift QL on the symmetric
// tridiagonal matrix, tracking only the first row of the eigenvector matrix.
void tridiag_nodes_weights(std::vector<double>& d, std::vector<double>& e, double mu0,
                           std::vector<double>& nodes, std::vector<double>& weights) {
    const int n = static_cast<int>(d.size());
    std::vector<double> z(n, 0.0);
    z[0] = 1.0;
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("quadrature: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = d[order[i]];
        weights[i] = mu0 * z[order[i]] * z[order[i]];
    }
}

}  // namespace

QuadRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    std::vector<double> d(n, 0.0), e(n - 1);
    for (int i = 1; i < n; ++i) e[i - 1] = std::sqrt(0.5 * i);
    QuadRule rule;
    tridiag_nodes_weights(d, e, std::sqrt(std::acos(-1.0)), rule.nodes, rule.weights);
    return rule;
}

QuadRule standard_normal_rule(int n) {
    QuadRule gh = gauss_hermite(n);
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));
    for (int i = 0; i < n; ++i) {
        gh.nodes[i] *= sqrt2;
        gh.weights[i] *= inv_sqrt_pi;
    }
    return gh;
}

}  // namespace hrv
