#include "hrv/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace hrv {

namespace {

constexpr double kCorrectorTol = 1e-10;

// Newton projection back onto {phi = 1} along the gradient direction.
bool correct_onto_level(const MgfEvaluator& ev, Vec2& p, int max_iters = 12) {
    for (int it = 0; it < max_iters; ++it) {
        const double r = ev.phi(p).value - 1.0;
        if (std::abs(r) < kCorrectorTol) return true;
        const Vec2 g = ev.grad_phi(p);
        const double g2 = dot(g, g);
        if (!(g2 > 1e-300)) return false;
        p = sub(p, scale(g, r / g2));
    }
    return std::abs(ev.phi(p).value - 1.0) < kCorrectorTol;
}

// Root of phi along one edge of the square, used to pin axis endpoints.
double axis_root(const MgfEvaluator& ev, int axis, double start) {
    double s = std::clamp(start, 1e-9, 2.0);
    for (int it = 0; it < 60; ++it) {
        const Vec2 p = axis == 0 ? Vec2{s, 0.0} : Vec2{0.0, s};
        const double r = ev.phi(p).value - 1.0;
        if (std::abs(r) < 1e-13) break;
        const Vec2 g = ev.grad_phi(p);
        const double d = axis == 0 ? g[0] : g[1];
        if (!(std::abs(d) > 1e-300)) break;
        s -= r / d;
    }
    return s;
}

LevelSetTrace trace_impl(const MgfEvaluator& ev, double step, bool throw_on_exit) {
    if (!ev.deterministic())
        throw UnsupportedError("level-set tracing requires a deterministic backend");
    if (!(step > 0)) throw std::invalid_argument("trace step must be positive");
    const double phi11 = ev.phi({1.0, 1.0}).value;
    if (!std::isfinite(phi11)) throw OutsideDomainError("phi(1,1) is not finite");

    LevelSetTrace trace;
    Vec2 p{axis_root(ev, 0, 1.0), 0.0};
    trace.endpoint_start = p;
    trace.points.push_back(p);
    trace.residuals.push_back(std::abs(ev.phi(p).value - 1.0));

    Vec2 prev_tangent{0.0, 1.0};  // move upward off the xi1-axis first
    int consecutive_failures = 0;
    const int max_points = static_cast<int>(6.0 / step) + 16;
    double step_now = step;

    while (static_cast<int>(trace.points.size()) < max_points) {
        const Vec2 g = ev.grad_phi(p);
        Vec2 t{-g[1], g[0]};
        const double tn = norm(t);
        if (!(tn > 1e-300)) throw TraceDivergedError("vanishing gradient on the level set");
        t = scale(t, 1.0 / tn);
        if (dot(t, prev_tangent) < 0) t = scale(t, -1.0);

        Vec2 q = add(p, scale(t, step_now));
        if (!correct_onto_level(ev, q)) {
            ++consecutive_failures;
            if (consecutive_failures >= 5)
                throw TraceDivergedError("corrector failed near (" + std::to_string(p[0]) + ", " +
                                         std::to_string(p[1]) + ")");
            step_now *= 0.5;
            continue;
        }
        consecutive_failures = 0;
        step_now = step;
        prev_tangent = t;

        if (q[0] <= 0.0) {  // reached the second axis
            const double s = axis_root(ev, 1, std::max(q[1], 0.5));
            trace.endpoint_end = {0.0, s};
            trace.points.push_back(trace.endpoint_end);
            trace.residuals.push_back(std::abs(ev.phi(trace.endpoint_end).value - 1.0));
            return trace;
        }
        if (q[1] < -1e-12 || q[0] > 1.0 + 1e-9 || q[1] > 1.0 + 1e-9) {
            trace.open = true;
            trace.endpoint_end = q;
            if (throw_on_exit)
                throw OpenArcError("level set exits the unit square near (" +
                                   std::to_string(q[0]) + ", " + std::to_string(q[1]) + ")");
            return trace;
        }
        p = q;
        trace.points.push_back(p);
        trace.residuals.push_back(std::abs(ev.phi(p).value - 1.0));
    }
    throw TraceDivergedError("trace exceeded the maximum number of points");
}

std::optional<CriticalPoint> newton_critical(const MgfEvaluator& ev, Vec2 seed, double tol) {
    Vec2 xi = seed;
    for (int it = 0; it < 80; ++it) {
        const double f1 = ev.phi(xi).value - 1.0;
        const Vec2 g = ev.grad_phi(xi);
        const double f2 = g[0] - g[1];
        const Mat2 h = ev.hess_phi(xi);
        const Mat2 jac{g[0], g[1], h.m00 - h.m01, h.m01 - h.m11};
        Vec2 delta;
        try {
            delta = jac.solve({f1, f2});
        } catch (const std::runtime_error&) {
            return std::nullopt;
        }
        // Keep iterates inside a slightly padded square.
        Vec2 next = sub(xi, delta);
        next[0] = std::clamp(next[0], 1e-6, 1.0 - 1e-9);
        next[1] = std::clamp(next[1], 1e-6, 1.0 - 1e-9);
        const double moved = norm(sub(next, xi));
        xi = next;
        if (moved < 1e-14 && std::abs(f1) < 10 * tol) break;
    }
    const double on = std::abs(ev.phi(xi).value - 1.0);
    const Vec2 g = ev.grad_phi(xi);
    CriticalPoint cp;
    cp.xi_star = xi;
    cp.h = xi[0] + xi[1];
    cp.grad = g;
    cp.certified.interior = xi[0] > 0.0 && xi[0] < 1.0 && xi[1] > 0.0 && xi[1] < 1.0;
    cp.certified.on_level = on < tol;
    cp.certified.parallel = std::abs(g[0] - g[1]) < tol * std::max(norm(g), 1e-300);
    if (!cp.certified.all()) return std::nullopt;
    return cp;
}

// Point on the arc at fractional index s, re-projected onto the level set.
Vec2 arc_point(const MgfEvaluator& ev, const std::vector<Vec2>& pts, double s) {
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s), pts.size() - 2);
    const double frac = s - static_cast<double>(k);
    Vec2 p = add(scale(pts[k], 1.0 - frac), scale(pts[k + 1], frac));
    correct_onto_level(ev, p);
    return p;
}

}  // namespace

LevelSetTrace trace_level_set(const MgfEvaluator& ev, double step) {
    return trace_impl(ev, step, /*throw_on_exit=*/true);
}

CriticalPoint find_xi_star(const MgfEvaluator& ev, double tol) {
    if (!ev.deterministic())
        throw UnsupportedError("critical point search requires a deterministic backend");

    const Vec2 seeds[] = {{0.6, 0.6}, {0.7, 0.7}, {0.5, 0.5}, {0.75, 0.55}, {0.55, 0.75}};
    for (const Vec2& seed : seeds)
        if (auto cp = newton_critical(ev, seed, tol)) return *cp;

    // Newton stalled everywhere: maximize h along the traced arc instead.
    LevelSetTrace trace = trace_impl(ev, 1e-2, /*throw_on_exit=*/false);
    const auto& pts = trace.points;
    if (pts.size() < 3) throw NotFoundError("level-set arc too short to search");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i][0] + pts[i][1] > pts[best][0] + pts[best][1]) best = i;

    if (auto cp = newton_critical(ev, pts[best], tol)) return *cp;

    double lo = best > 0 ? static_cast<double>(best - 1) : 0.0;
    double hi = std::min<double>(static_cast<double>(best + 1), static_cast<double>(pts.size() - 1));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    auto hval = [&](double s) {
        const Vec2 p = arc_point(ev, pts, s);
        return p[0] + p[1];
    };
    double fa = hval(a), fb = hval(b);
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = hval(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = hval(a);
        }
    }
    const Vec2 xi = arc_point(ev, pts, 0.5 * (lo + hi));
    if (auto cp = newton_critical(ev, xi, tol)) return *cp;

    CriticalPoint cp;
    cp.xi_star = xi;
    cp.h = xi[0] + xi[1];
    cp.grad = ev.grad_phi(xi);
    cp.certified.interior = xi[0] > 0.0 && xi[0] < 1.0 && xi[1] > 0.0 && xi[1] < 1.0;
    cp.certified.on_level = std::abs(ev.phi(xi).value - 1.0) < tol;
    cp.certified.parallel =
        std::abs(cp.grad[0] - cp.grad[1]) < tol * std::max(norm(cp.grad), 1e-300);
    if (!cp.certified.all())
        throw NotFoundError("no certified critical point inside the open unit square");
    return cp;
}

}  // namespace hrv
