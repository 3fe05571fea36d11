#pragma once

#include <vector>

#include "hrv/common.hpp"
#include "hrv/mgf.hpp"

namespace hrv {

struct LevelSetTrace {
    std::vector<Vec2> points;      // ordered along the arc, endpoints included
    std::vector<double> residuals; // |phi - 1| per point
    Vec2 endpoint_start{};
    Vec2 endpoint_end{};
    bool open = false;             // arc left the unit square before closing
};

// Predictor-corrector continuation of {phi = 1} inside [0,1]^2, starting from
// (1,0). Throws OpenArcError when the arc exits the square and
// TraceDivergedError when the Newton corrector fails repeatedly.
LevelSetTrace trace_level_set(const MgfEvaluator& ev, double step = 1e-2);

struct Certification {
    bool interior = false;
    bool on_level = false;
    bool parallel = false;
    bool all() const { return interior && on_level && parallel; }
};

struct CriticalPoint {
    Vec2 xi_star{};
    double h = 0.0;      // xi1 + xi2
    Vec2 grad{};
    Certification certified;
};

// Solves { phi(xi) = 1, d1 phi(xi) = d2 phi(xi) } inside (0,1)^2 by Newton,
// seeding from the traced arc and falling back to a golden-section maximum of
// xi1 + xi2 along the arc when Newton stalls. Throws NotFoundError when no
// certified interior point exists.
CriticalPoint find_xi_star(const MgfEvaluator& ev, double tol = 1e-10);

}  // namespace hrv
