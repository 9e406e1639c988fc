#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xros/geometry.hpp"
#include "xros/world_model.hpp"

namespace xros {

struct DisplayBudget {
    int max_items = 7;            // simultaneous non-Safety overlays
    double max_solid_angle = 0.35;  // fraction of frustum solid angle
};

// Deterministic quadrature over the frustum's direction space. Directions are
// laid out on a tangent-plane grid and weighted by the solid-angle Jacobian,
// so covered fractions are measured in solid angle. Per-placement hit masks
// make union coverage (no double counting of overlap) a bitwise OR.
class CoverageGrid {
public:
    CoverageGrid(const Frustum& frustum, int resolution = 64);

    using Mask = std::vector<uint64_t>;

    Mask empty_mask() const { return Mask(words_, 0); }
    Mask mask_for(const Aabb& box) const;
    static void merge(Mask& into, const Mask& other);
    double fraction(const Mask& mask) const;

    int resolution() const { return res_; }

private:
    Frustum frustum_;
    int res_;
    size_t words_;
    std::vector<Vec3> dirs_;
    std::vector<double> weights_;
    double total_weight_ = 0.0;
};

// Fraction of the frustum's solid angle subtended by the union of the given
// placements' bounds. Empty list -> 0.
double coverage(std::span<const ContentPlacement> rendered, const Frustum& frustum,
                int grid_resolution = 64);

// Picks the per-frame render list. Safety placements always render and are
// exempt from both budget caps; the rest are admitted greedily by descending
// relevance (ties: smaller app id, then placement id) while the item count and
// solid-angle caps hold.
std::vector<ContentPlacement> select_visible(std::span<const ContentPlacement> placements,
                                             const Frustum& frustum, const DisplayBudget& budget,
                                             int grid_resolution = 64);

}  // namespace xros
