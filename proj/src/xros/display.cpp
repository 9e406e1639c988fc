#include "xros/display.hpp"

#include <algorithm>
#include <cmath>

namespace xros {

CoverageGrid::CoverageGrid(const Frustum& frustum, int resolution)
    : frustum_(frustum), res_(std::max(resolution, 2)) {
    size_t n = static_cast<size_t>(res_) * res_;
    words_ = (n + 63) / 64;
    dirs_.reserve(n);
    weights_.reserve(n);
    for (int iy = 0; iy < res_; ++iy) {
        for (int ix = 0; ix < res_; ++ix) {
            double a = frustum.tan_h * ((ix + 0.5) / res_ * 2.0 - 1.0);
            double b = frustum.tan_v * ((iy + 0.5) / res_ * 2.0 - 1.0);
            Vec3 dir = frustum.forward + frustum.right * a + frustum.up * b;
            // solid-angle measure of the tangent-plane cell
            double w = std::pow(1.0 + a * a + b * b, -1.5);
            dirs_.push_back(dir);
            weights_.push_back(w);
            total_weight_ += w;
        }
    }
}

CoverageGrid::Mask CoverageGrid::mask_for(const Aabb& box) const {
    Mask mask(words_, 0);
    for (size_t i = 0; i < dirs_.size(); ++i) {
        if (ray_aabb({frustum_.origin, dirs_[i]}, box)) mask[i >> 6] |= 1ull << (i & 63);
    }
    return mask;
}

void CoverageGrid::merge(Mask& into, const Mask& other) {
    for (size_t i = 0; i < into.size(); ++i) into[i] |= other[i];
}

double CoverageGrid::fraction(const Mask& mask) const {
    double covered = 0.0;
    for (size_t i = 0; i < dirs_.size(); ++i) {
        if (mask[i >> 6] & (1ull << (i & 63))) covered += weights_[i];
    }
    return total_weight_ > 0.0 ? covered / total_weight_ : 0.0;
}

double coverage(std::span<const ContentPlacement> rendered, const Frustum& frustum,
                int grid_resolution) {
    if (rendered.empty()) return 0.0;
    CoverageGrid grid(frustum, grid_resolution);
    auto mask = grid.empty_mask();
    for (const auto& p : rendered) CoverageGrid::merge(mask, grid.mask_for(p.bounds));
    return grid.fraction(mask);
}

std::vector<ContentPlacement> select_visible(std::span<const ContentPlacement> placements,
                                             const Frustum& frustum, const DisplayBudget& budget,
                                             int grid_resolution) {
    std::vector<ContentPlacement> out;
    std::vector<ContentPlacement> normal;
    for (const auto& p : placements) {
        if (p.priority == PlacePriority::Safety)
            out.push_back(p);
        else
            normal.push_back(p);
    }
    std::sort(normal.begin(), normal.end(), [](const ContentPlacement& a, const ContentPlacement& b) {
        if (a.relevance != b.relevance) return a.relevance > b.relevance;
        if (a.app != b.app) return a.app < b.app;
        return a.placement_id < b.placement_id;
    });

    CoverageGrid grid(frustum, grid_resolution);
    auto admitted = grid.empty_mask();
    int count = 0;
    for (const auto& p : normal) {
        if (count >= budget.max_items) break;
        auto mask = grid.mask_for(p.bounds);
        CoverageGrid::merge(mask, admitted);
        if (grid.fraction(mask) > budget.max_solid_angle) continue;  // skip, try the next
        admitted = std::move(mask);
        out.push_back(p);
        ++count;
    }
    return out;
}

}  // namespace xros
