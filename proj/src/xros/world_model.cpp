#include "xros/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace xros {

const char* to_string(ElementKind k) {
    switch (k) {
        case ElementKind::FeaturePoint: return "feature";
        case ElementKind::Plane: return "plane";
        case ElementKind::Anchor: return "anchor";
        case ElementKind::SemanticObject: return "object";
    }
    return "?";
}

const char* to_string(Sensitivity s) {
    switch (s) {
        case Sensitivity::None: return "none";
        case Sensitivity::Private: return "private";
        case Sensitivity::Bystander: return "bystander";
    }
    return "?";
}

const char* to_string(PlacePriority p) {
    switch (p) {
        case PlacePriority::Safety: return "safety";
        case PlacePriority::Normal: return "normal";
        case PlacePriority::Ambient: return "ambient";
    }
    return "?";
}

std::optional<ElementKind> element_kind_from(std::string_view s) {
    if (s == "feature") return ElementKind::FeaturePoint;
    if (s == "plane") return ElementKind::Plane;
    if (s == "anchor") return ElementKind::Anchor;
    if (s == "object") return ElementKind::SemanticObject;
    return std::nullopt;
}

std::optional<Sensitivity> sensitivity_from(std::string_view s) {
    if (s == "none") return Sensitivity::None;
    if (s == "private") return Sensitivity::Private;
    if (s == "bystander") return Sensitivity::Bystander;
    return std::nullopt;
}

std::optional<PlacePriority> place_priority_from(std::string_view s) {
    if (s == "safety") return PlacePriority::Safety;
    if (s == "normal") return PlacePriority::Normal;
    if (s == "ambient") return PlacePriority::Ambient;
    return std::nullopt;
}

std::vector<std::pair<int, int>> relocation_spiral(int probes) {
    std::vector<std::pair<int, int>> out;
    for (int r = 1; static_cast<int>(out.size()) < probes; ++r) {
        // ring of cells with max(|x|,|y|) == r, fixed walk order
        for (int y = 0; y <= r && static_cast<int>(out.size()) < probes; ++y) out.emplace_back(r, y);
        for (int x = r - 1; x >= -r && static_cast<int>(out.size()) < probes; --x) out.emplace_back(x, r);
        for (int y = r - 1; y >= -r && static_cast<int>(out.size()) < probes; --y) out.emplace_back(-r, y);
        for (int x = -r + 1; x <= r && static_cast<int>(out.size()) < probes; ++x) out.emplace_back(x, -r);
        for (int y = -r + 1; y < 0 && static_cast<int>(out.size()) < probes; ++y) out.emplace_back(r, y);
    }
    return out;
}

bool update_wins(const WorldElement& incoming, const WorldElement& existing) {
    if (incoming.timestamp != existing.timestamp) return incoming.timestamp > existing.timestamp;
    return incoming.source < existing.source;
}

std::vector<WorldElement> merge_sets(std::span<const std::vector<WorldElement>> sets) {
    std::map<uint64_t, WorldElement> merged;
    for (const auto& set : sets) {
        for (const auto& e : set) {
            auto it = merged.find(e.id);
            if (it == merged.end()) {
                merged.emplace(e.id, e);
            } else if (update_wins(e, it->second)) {
                it->second = e;
            }
        }
    }
    std::vector<WorldElement> out;
    out.reserve(merged.size());
    for (auto& [_, e] : merged) out.push_back(std::move(e));
    return out;
}

WorldModel::WorldModel(double grid_cell_m) : cell_m_(grid_cell_m > 0 ? grid_cell_m : 0.5) {}

void WorldModel::register_app(uint64_t app, bool private_clearance) {
    apps_[app] = private_clearance;
}

namespace {
int64_t floor_div(double v, double cell) { return static_cast<int64_t>(std::floor(v / cell)); }

int64_t pack_cell(int64_t x, int64_t y, int64_t z) {
    // 21 bits per axis, offset binary
    auto enc = [](int64_t v) { return (v + (1ll << 20)) & 0x1fffff; };
    return (enc(x) << 42) | (enc(y) << 21) | enc(z);
}
}  // namespace

void WorldModel::validate_element(const WorldElement& e, SimTime now) const {
    if (!e.extent.valid()) throw SimError("element " + std::to_string(e.id) + ": invalid extent");
    if (e.timestamp > now)
        throw SimError("element " + std::to_string(e.id) + ": timestamp ahead of clock");
    if (std::abs(norm(e.pose.orientation) - 1.0) > 1e-6)
        throw SimError("element " + std::to_string(e.id) + ": quaternion not normalized");
    Vec3 sz = e.extent.size();
    if (e.kind == ElementKind::Plane) {
        int positive = (sz.x > 0) + (sz.y > 0) + (sz.z > 0);
        if (positive < 2) throw SimError("element " + std::to_string(e.id) + ": plane without area");
    } else if (e.kind == ElementKind::SemanticObject) {
        if (sz.x <= 0 || sz.y <= 0 || sz.z <= 0)
            throw SimError("element " + std::to_string(e.id) + ": object without volume");
    }
}

void WorldModel::index_insert(const WorldElement& e) {
    int64_t x0 = floor_div(e.extent.lo.x, cell_m_), x1 = floor_div(e.extent.hi.x, cell_m_);
    int64_t y0 = floor_div(e.extent.lo.y, cell_m_), y1 = floor_div(e.extent.hi.y, cell_m_);
    int64_t z0 = floor_div(e.extent.lo.z, cell_m_), z1 = floor_div(e.extent.hi.z, cell_m_);
    for (int64_t x = x0; x <= x1; ++x)
        for (int64_t y = y0; y <= y1; ++y)
            for (int64_t z = z0; z <= z1; ++z) grid_[pack_cell(x, y, z)].push_back(e.id);
}

void WorldModel::index_remove(const WorldElement& e) {
    int64_t x0 = floor_div(e.extent.lo.x, cell_m_), x1 = floor_div(e.extent.hi.x, cell_m_);
    int64_t y0 = floor_div(e.extent.lo.y, cell_m_), y1 = floor_div(e.extent.hi.y, cell_m_);
    int64_t z0 = floor_div(e.extent.lo.z, cell_m_), z1 = floor_div(e.extent.hi.z, cell_m_);
    for (int64_t x = x0; x <= x1; ++x)
        for (int64_t y = y0; y <= y1; ++y)
            for (int64_t z = z0; z <= z1; ++z) {
                auto it = grid_.find(pack_cell(x, y, z));
                if (it == grid_.end()) continue;
                std::erase(it->second, e.id);
                if (it->second.empty()) grid_.erase(it);
            }
}

std::vector<uint64_t> WorldModel::index_candidates(const Aabb& region) const {
    int64_t x0 = floor_div(region.lo.x, cell_m_), x1 = floor_div(region.hi.x, cell_m_);
    int64_t y0 = floor_div(region.lo.y, cell_m_), y1 = floor_div(region.hi.y, cell_m_);
    int64_t z0 = floor_div(region.lo.z, cell_m_), z1 = floor_div(region.hi.z, cell_m_);
    // A region spanning more cells than the store has entries is cheaper to
    // answer by scanning ids directly (also covers whole-space queries).
    double cells = double(x1 - x0 + 1) * double(y1 - y0 + 1) * double(z1 - z0 + 1);
    if (cells > 8.0 * static_cast<double>(store_.size()) + 64.0) {
        std::vector<uint64_t> out;
        out.reserve(store_.size());
        for (const auto& [id, _] : store_) out.push_back(id);
        return out;
    }
    std::set<uint64_t> ids;
    for (int64_t x = x0; x <= x1; ++x)
        for (int64_t y = y0; y <= y1; ++y)
            for (int64_t z = z0; z <= z1; ++z) {
                auto it = grid_.find(pack_cell(x, y, z));
                if (it == grid_.end()) continue;
                ids.insert(it->second.begin(), it->second.end());
            }
    return {ids.begin(), ids.end()};
}

void WorldModel::upsert(const WorldElement& e) {
    auto it = store_.find(e.id);
    if (it == store_.end()) {
        store_.emplace(e.id, e);
        index_insert(e);
        return;
    }
    if (!update_wins(e, it->second)) return;
    index_remove(it->second);
    it->second = e;
    index_insert(e);
}

size_t WorldModel::ingest_sensor_frame(std::span<const WorldElement> frame, SimTime now,
                                       Ledger* ledger) {
    for (const auto& e : frame) {
        if (e.tag == Sensitivity::Bystander)
            throw TaintViolation("bystander element " + std::to_string(e.id) +
                                 " reached world model ingest");
        validate_element(e, now);
    }
    size_t applied = 0;
    for (const auto& e : frame) {
        auto it = store_.find(e.id);
        if (it == store_.end() || update_wins(e, it->second)) {
            upsert(e);
            ++applied;
        }
    }
    if (ledger) ledger->count("world_updates", applied);
    return applied;
}

bool WorldModel::has_lease_covering(uint64_t app, const Aabb& region, bool write_needed) const {
    for (const auto& l : leases_) {
        if (l.app != app) continue;
        if (write_needed && l.mode != LeaseMode::Write) continue;
        if (l.region.contains(region)) return true;
    }
    return false;
}

AcquireResult WorldModel::acquire_lease(uint64_t app, const Aabb& region, LeaseMode mode,
                                        SimTime now) {
    if (!app_registered(app)) throw UnknownAppError("app " + std::to_string(app) + " not registered");
    if (mode == LeaseMode::Write) {
        for (const auto& l : leases_) {
            if (l.mode != LeaseMode::Write || l.app == app) continue;
            if (l.region.overlaps_interior(region)) return LeaseDenied{l.app};
        }
    }
    RegionLease lease{next_lease_id_++, app, region, mode, now};
    leases_.push_back(lease);
    return lease;
}

bool WorldModel::release_lease(uint64_t lease_id) {
    auto it = std::find_if(leases_.begin(), leases_.end(),
                           [&](const RegionLease& l) { return l.lease_id == lease_id; });
    if (it == leases_.end()) return false;
    leases_.erase(it);
    return true;
}

const ContentPlacement* WorldModel::first_collision(const Aabb& bounds, uint64_t app) const {
    for (const auto& p : placements_) {
        if (p.app == app) continue;
        if (p.bounds.overlaps_interior(bounds)) return &p;
    }
    return nullptr;
}

PlaceResult WorldModel::place_content(uint64_t app, const ContentPlacement& placement) {
    const RegionLease* covering = nullptr;
    for (const auto& l : leases_) {
        if (l.app == app && l.mode == LeaseMode::Write && l.region.contains(placement.bounds)) {
            covering = &l;
            break;
        }
    }
    if (!covering) throw NoLeaseError("app " + std::to_string(app) + " holds no covering Write lease");

    const WorldElement* anchor = find(placement.anchor_id);
    if (!anchor || anchor->kind != ElementKind::Anchor)
        throw SimError("placement anchor " + std::to_string(placement.anchor_id) + " not found");

    auto commit = [&](const Aabb& bounds, PlaceOutcome outcome) {
        ContentPlacement p = placement;
        p.app = app;
        p.bounds = bounds;
        placements_.push_back(p);
        return PlaceResult{outcome, bounds};
    };

    if (!first_collision(placement.bounds, app)) return commit(placement.bounds, PlaceOutcome::Placed);

    // Slide along the anchor plane: probe offsets live in the plane spanned by
    // the anchor's local X/Y axes.
    Vec3 tx = rotate(anchor->pose.orientation, {1, 0, 0});
    Vec3 ty = rotate(anchor->pose.orientation, {0, 1, 0});
    for (auto [ix, iy] : relocation_spiral(kRelocationProbes)) {
        Vec3 offset = tx * (ix * kRelocationStepM) + ty * (iy * kRelocationStepM);
        Aabb candidate = placement.bounds.translated(offset);
        if (!has_lease_covering(app, candidate, /*write_needed=*/true)) continue;
        if (first_collision(candidate, app)) continue;
        return commit(candidate, PlaceOutcome::Relocated);
    }
    return {PlaceOutcome::Rejected, placement.bounds};
}

bool WorldModel::remove_placement(uint64_t placement_id) {
    auto it = std::find_if(placements_.begin(), placements_.end(),
                           [&](const ContentPlacement& p) { return p.placement_id == placement_id; });
    if (it == placements_.end()) return false;
    placements_.erase(it);
    return true;
}

std::vector<ContentPlacement> WorldModel::placements_of(uint64_t app) const {
    std::vector<ContentPlacement> out;
    for (const auto& p : placements_)
        if (p.app == app) out.push_back(p);
    return out;
}

std::vector<WorldElement> WorldModel::query_primitives(uint64_t app, const Aabb& region,
                                                       std::span<const ElementKind> kinds) const {
    if (!has_lease_covering(app, region, /*write_needed=*/false))
        throw NoLeaseError("app " + std::to_string(app) + " holds no covering lease for query");
    bool clearance = false;
    if (auto it = apps_.find(app); it != apps_.end()) clearance = it->second;

    std::vector<WorldElement> out;
    for (uint64_t id : index_candidates(region)) {
        const auto& e = store_.at(id);
        if (!e.extent.intersects(region)) continue;
        if (!kinds.empty() && std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) continue;
        if (e.tag == Sensitivity::Bystander) continue;  // taint barrier, belt and braces
        if (e.tag == Sensitivity::Private && !clearance) continue;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const WorldElement& a, const WorldElement& b) { return a.id < b.id; });
    return out;
}

size_t WorldModel::merge_remote(std::span<const std::vector<WorldElement>> models, Ledger* ledger) {
    std::vector<std::vector<WorldElement>> clean;
    clean.reserve(models.size());
    size_t refused = 0;
    for (const auto& set : models) {
        std::vector<WorldElement> s;
        for (const auto& e : set) {
            if (e.tag == Sensitivity::Bystander) {
                ++refused;  // remote peer failed to minimise; never store it
                continue;
            }
            s.push_back(e);
        }
        clean.push_back(std::move(s));
    }
    for (const auto& e : merge_sets(clean)) upsert(e);
    if (ledger && refused) ledger->count("merge_bystander_refused", refused);
    return store_.size();
}

namespace {
int kind_rank(ElementKind k) {
    switch (k) {
        case ElementKind::Anchor: return 0;
        case ElementKind::Plane: return 1;
        case ElementKind::SemanticObject: return 2;
        case ElementKind::FeaturePoint: return 3;
    }
    return 4;
}
}  // namespace

std::vector<WorldElement> WorldModel::simplified_copy(size_t budget) const {
    std::vector<WorldElement> all = all_elements();
    std::sort(all.begin(), all.end(), [](const WorldElement& a, const WorldElement& b) {
        int ra = kind_rank(a.kind), rb = kind_rank(b.kind);
        if (ra != rb) return ra < rb;
        if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
        return a.id < b.id;
    });
    if (all.size() > budget) all.resize(budget);
    return all;
}

const WorldElement* WorldModel::find(uint64_t id) const {
    auto it = store_.find(id);
    return it == store_.end() ? nullptr : &it->second;
}

std::vector<WorldElement> WorldModel::all_elements() const {
    std::vector<WorldElement> out;
    out.reserve(store_.size());
    for (const auto& [_, e] : store_) out.push_back(e);
    return out;
}

namespace {
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_labels(const std::vector<std::string>& labels) {
    if (labels.empty()) return "-";
    std::string out;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ',';
        out += labels[i];
    }
    return out;
}
}  // namespace

void WorldModel::save(std::ostream& os) const {
    os << "XROSWM v1\n";
    for (const auto& [_, e] : store_) {
        os << e.id << ' ' << to_string(e.kind) << ' ' << fmt(e.pose.position.x) << ' '
           << fmt(e.pose.position.y) << ' ' << fmt(e.pose.position.z) << ' '
           << fmt(e.pose.orientation.w) << ' ' << fmt(e.pose.orientation.x) << ' '
           << fmt(e.pose.orientation.y) << ' ' << fmt(e.pose.orientation.z) << ' '
           << fmt(e.extent.lo.x) << ' ' << fmt(e.extent.lo.y) << ' ' << fmt(e.extent.lo.z) << ' '
           << fmt(e.extent.hi.x) << ' ' << fmt(e.extent.hi.y) << ' ' << fmt(e.extent.hi.z) << ' '
           << (e.source.empty() ? "-" : e.source) << ' ' << e.timestamp << ' ' << to_string(e.tag)
           << ' ' << join_labels(e.labels) << '\n';
    }
}

WorldModel WorldModel::load(std::istream& is, double grid_cell_m) {
    std::string header;
    if (!std::getline(is, header) || header != "XROSWM v1")
        throw SimError("world model file: bad header, expected 'XROSWM v1'");
    WorldModel wm(grid_cell_m);
    std::string line;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        WorldElement e;
        std::string kind, source, tag, labels;
        ss >> e.id >> kind >> e.pose.position.x >> e.pose.position.y >> e.pose.position.z >>
            e.pose.orientation.w >> e.pose.orientation.x >> e.pose.orientation.y >>
            e.pose.orientation.z >> e.extent.lo.x >> e.extent.lo.y >> e.extent.lo.z >>
            e.extent.hi.x >> e.extent.hi.y >> e.extent.hi.z >> source >> e.timestamp >> tag >>
            labels;
        if (!ss) throw SimError("world model file: malformed line " + std::to_string(lineno));
        auto k = element_kind_from(kind);
        auto t = sensitivity_from(tag);
        if (!k || !t)
            throw SimError("world model file: unknown kind/tag on line " + std::to_string(lineno));
        e.kind = *k;
        e.tag = *t;
        e.source = source == "-" ? "" : source;
        if (labels != "-") {
            std::istringstream ls(labels);
            std::string item;
            while (std::getline(ls, item, ',')) e.labels.push_back(item);
        }
        wm.upsert(e);
    }
    return wm;
}

}  // namespace xros
