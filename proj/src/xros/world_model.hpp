#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "xros/geometry.hpp"
#include "xros/sim_core.hpp"

namespace xros {

enum class ElementKind { FeaturePoint, Plane, Anchor, SemanticObject };
enum class Sensitivity { None, Private, Bystander };

const char* to_string(ElementKind k);
const char* to_string(Sensitivity s);
std::optional<ElementKind> element_kind_from(std::string_view s);
std::optional<Sensitivity> sensitivity_from(std::string_view s);

// One XR primitive in the physical-digital world model.
struct WorldElement {
    uint64_t id = 0;
    ElementKind kind = ElementKind::FeaturePoint;
    Pose pose;
    Aabb extent;           // world frame
    std::string source;    // originating device/node
    SimTime timestamp = 0; // virtual time of last update
    Sensitivity tag = Sensitivity::None;
    std::vector<std::string> labels;

    bool operator==(const WorldElement& o) const = default;
};

enum class LeaseMode { Read, Write };

struct RegionLease {
    uint64_t lease_id = 0;
    uint64_t app = 0;
    Aabb region;
    LeaseMode mode = LeaseMode::Read;
    SimTime granted_at = 0;
};

struct LeaseDenied {
    uint64_t blocker_app = 0;  // owner of the conflicting Write lease
};

using AcquireResult = std::variant<RegionLease, LeaseDenied>;

enum class PlacePriority { Safety, Normal, Ambient };

const char* to_string(PlacePriority p);
std::optional<PlacePriority> place_priority_from(std::string_view s);

struct ContentPlacement {
    uint64_t placement_id = 0;
    uint64_t app = 0;
    uint64_t anchor_id = 0;  // must refer to a stored Anchor
    Aabb bounds;
    PlacePriority priority = PlacePriority::Normal;
    double relevance = 0.5;  // display selection score, scenario-provided

    bool operator==(const ContentPlacement& o) const = default;
};

enum class PlaceOutcome { Placed, Relocated, Rejected };

struct PlaceResult {
    PlaceOutcome outcome = PlaceOutcome::Rejected;
    Aabb bounds;  // final bounds when Placed/Relocated
};

// Relocation probe offsets for colliding placements: deterministic square
// spiral in the anchor plane, ring by ring, 0.05 m per step.
constexpr double kRelocationStepM = 0.05;
constexpr int kRelocationProbes = 32;
std::vector<std::pair<int, int>> relocation_spiral(int probes);

// Merge rule shared by ingest and multi-device aggregation: latest timestamp
// wins, ties broken by lexicographically smallest source id.
bool update_wins(const WorldElement& incoming, const WorldElement& existing);
std::vector<WorldElement> merge_sets(std::span<const std::vector<WorldElement>> sets);

class WorldModel {
public:
    explicit WorldModel(double grid_cell_m = 0.5);

    void register_app(uint64_t app, bool private_clearance);
    bool app_registered(uint64_t app) const { return apps_.count(app) > 0; }

    // Upserts filtered sensor observations. The frame must already be clean:
    // any Bystander-tagged element means the privacy layer was bypassed and
    // throws TaintViolation.
    size_t ingest_sensor_frame(std::span<const WorldElement> frame, SimTime now,
                               Ledger* ledger = nullptr);

    AcquireResult acquire_lease(uint64_t app, const Aabb& region, LeaseMode mode, SimTime now);
    bool release_lease(uint64_t lease_id);
    const std::vector<RegionLease>& leases() const { return leases_; }

    PlaceResult place_content(uint64_t app, const ContentPlacement& placement);
    bool remove_placement(uint64_t placement_id);
    const std::vector<ContentPlacement>& placements() const { return placements_; }
    std::vector<ContentPlacement> placements_of(uint64_t app) const;

    // Elements of the requested kinds whose extent intersects the region,
    // sorted by id. Requires a covering Read or Write lease. Bystander-tagged
    // elements are never returned; Private ones only with clearance.
    std::vector<WorldElement> query_primitives(uint64_t app, const Aabb& region,
                                               std::span<const ElementKind> kinds) const;

    // Aggregates per-device models into the store; returns the store size.
    size_t merge_remote(std::span<const std::vector<WorldElement>> models,
                        Ledger* ledger = nullptr);

    // At most `budget` elements ranked Anchor > Plane > SemanticObject >
    // FeaturePoint, then most recent first.
    std::vector<WorldElement> simplified_copy(size_t budget) const;

    const WorldElement* find(uint64_t id) const;
    size_t size() const { return store_.size(); }
    std::vector<WorldElement> all_elements() const;

    // Line-delimited persistence, `XROSWM v1` header.
    void save(std::ostream& os) const;
    static WorldModel load(std::istream& is, double grid_cell_m = 0.5);

private:
    void validate_element(const WorldElement& e, SimTime now) const;
    void upsert(const WorldElement& e);
    void index_insert(const WorldElement& e);
    void index_remove(const WorldElement& e);
    std::vector<uint64_t> index_candidates(const Aabb& region) const;
    bool has_lease_covering(uint64_t app, const Aabb& region, bool write_needed) const;
    const ContentPlacement* first_collision(const Aabb& bounds, uint64_t app) const;

    double cell_m_;
    std::map<uint64_t, WorldElement> store_;
    std::unordered_map<int64_t, std::vector<uint64_t>> grid_;
    std::map<uint64_t, bool> apps_;  // app id -> private clearance
    std::vector<RegionLease> leases_;
    std::vector<ContentPlacement> placements_;
    uint64_t next_lease_id_ = 1;
};

}  // namespace xros
