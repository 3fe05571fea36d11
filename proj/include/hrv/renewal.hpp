#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hrv/common.hpp"
#include "hrv/stats.hpp"

namespace hrv {

struct SignAtom {
    std::array<int, 2> pattern{1, 1};
    double prob = 1.0;
};

// Positive-drift planar walk with an optional independent sign component.
struct IncrementSpec {
    Vec2 mean{1.0, 1.0};
    Mat2 cov = Mat2::identity();
    std::vector<SignAtom> sign_law;                    // empty: trivial group
    std::vector<std::array<int, 2>> declared_group;    // empty: derived from sign_law

    void validate() const;
    std::vector<std::array<int, 2>> group() const;     // closure of the sign support
};

struct Rect {
    double lo1 = 0, hi1 = 1, lo2 = 0, hi2 = 1;
    double area() const { return (hi1 - lo1) * (hi2 - lo2); }
};

struct RenewalEstimate {
    Rect region;
    std::vector<double> t_grid;
    std::vector<Estimate> values;                       // t^{1/2} (mean visits)
    std::vector<std::array<int, 2>> group;              // populated by the group variant
    std::vector<std::vector<Estimate>> group_slices;    // [k][t]
};

struct RenewalOptions {
    std::uint64_t n_paths = 20000;
    std::uint64_t seed = 1;
    int workers = 1;
};

// Counts visits of the walk to t*mean + region, averaged over paths and
// scaled by t^{1/2}. Counting stops once the walk has passed the region along
// the drift by a 10-sigma-sqrt(n) margin. Throws NonTransientError when the
// pilot drift estimate is indistinguishable from zero at 3 sigma.
RenewalEstimate renewal_measure_estimate(const IncrementSpec& inc, const Rect& region,
                                         const std::vector<double>& t_grid,
                                         const RenewalOptions& opts);

struct CarlssonTable {
    std::vector<double> offsets;                 // multiples of the unit drift-orthogonal vector
    std::vector<double> t_grid;
    std::vector<std::vector<Estimate>> values;   // [offset][t], t^{1/2}-scaled visits to the unit box
    double max_value = 0;
    double on_axis_max = 0;
};

// t^{1/2}-scaled visit counts to t*mean + offset*e_perp + [0,1]^2 over a grid
// of drift-orthogonal offsets. Reported, not asserted against a constant.
CarlssonTable carlsson_bound_check(const IncrementSpec& inc, const std::vector<double>& offsets,
                                   const std::vector<double>& t_grid, const RenewalOptions& opts);

// As renewal_measure_estimate, with visits split by the running sign product.
// Throws GroupMismatchError when the sign support generates a strict subgroup
// of the declared group.
RenewalEstimate group_renewal_estimate(const IncrementSpec& inc, const Rect& region,
                                       const std::vector<double>& t_grid,
                                       const RenewalOptions& opts);

}  // namespace hrv
