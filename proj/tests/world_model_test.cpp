#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "xros/rng.hpp"
#include "xros/world_model.hpp"

using namespace xros;

namespace {

WorldElement make_element(uint64_t id, ElementKind kind, Vec3 pos, double half, SimTime t,
                          std::string source = "seed") {
    WorldElement e;
    e.id = id;
    e.kind = kind;
    e.pose.position = pos;
    e.extent = {pos - Vec3{half, half, half}, pos + Vec3{half, half, half}};
    e.source = std::move(source);
    e.timestamp = t;
    return e;
}

WorldElement random_element(RngStream& rng, uint64_t id, SimTime t) {
    ElementKind kinds[] = {ElementKind::FeaturePoint, ElementKind::Plane, ElementKind::Anchor,
                           ElementKind::SemanticObject};
    ElementKind kind = kinds[rng.uniform_int(0, 3)];
    Vec3 pos{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
    double half = rng.uniform(0.05, 1.5);
    return make_element(id, kind, pos, half, t, rng.bernoulli(0.5) ? "devA" : "devB");
}

// independent linear-scan oracle for spatial queries
std::vector<WorldElement> scan_oracle(const std::vector<WorldElement>& all, const Aabb& region,
                                      std::span<const ElementKind> kinds) {
    std::vector<WorldElement> out;
    for (const auto& e : all) {
        if (!e.extent.intersects(region)) continue;
        if (!kinds.empty() && std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end())
            continue;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const WorldElement& a, const WorldElement& b) { return a.id < b.id; });
    return out;
}

// reference merge: last-writer-wins with the (timestamp, source) rule, order-free
std::vector<WorldElement> merge_oracle(const std::vector<std::vector<WorldElement>>& sets) {
    std::map<uint64_t, WorldElement> m;
    for (const auto& set : sets) {
        for (const auto& e : set) {
            auto it = m.find(e.id);
            if (it == m.end() || e.timestamp > it->second.timestamp ||
                (e.timestamp == it->second.timestamp && e.source < it->second.source))
                m[e.id] = e;
        }
    }
    std::vector<WorldElement> out;
    for (auto& [_, e] : m) out.push_back(e);
    return out;
}

}  // namespace

TEST_CASE("ingest upserts by id with latest-timestamp-wins") {
    WorldModel wm;
    SUBCASE("empty frame is the identity") {
        std::vector<WorldElement> frame;
        CHECK(wm.ingest_sensor_frame(frame, 0) == 0);
        CHECK(wm.size() == 0);
    }
    SUBCASE("new anchor is stored and queryable") {
        wm.register_app(1, false);
        std::vector<WorldElement> frame{make_element(7, ElementKind::Anchor, {1, 1, 1}, 0.1, 0)};
        CHECK(wm.ingest_sensor_frame(frame, 0) == 1);
        wm.acquire_lease(1, {{0, 0, 0}, {2, 2, 2}}, LeaseMode::Read, 0);
        auto out = wm.query_primitives(1, {{0, 0, 0}, {2, 2, 2}}, {});
        REQUIRE(out.size() == 1);
        CHECK(out[0].id == 7);
    }
    SUBCASE("stale update loses") {
        auto newer = make_element(3, ElementKind::FeaturePoint, {5, 0, 0}, 0.1, 10);
        auto older = make_element(3, ElementKind::FeaturePoint, {9, 0, 0}, 0.1, 5);
        std::vector<WorldElement> f1{newer};
        wm.ingest_sensor_frame(f1, 10);
        std::vector<WorldElement> f2{older};
        wm.ingest_sensor_frame(f2, 10);
        CHECK(wm.find(3)->pose.position.x == 5);
    }
    SUBCASE("bystander-tagged input is a hard taint failure") {
        auto e = make_element(1, ElementKind::FeaturePoint, {0, 0, 0}, 0.1, 0);
        e.tag = Sensitivity::Bystander;
        std::vector<WorldElement> frame{e};
        CHECK_THROWS_AS(wm.ingest_sensor_frame(frame, 0), TaintViolation);
    }
    SUBCASE("timestamps ahead of the clock are rejected") {
        std::vector<WorldElement> frame{make_element(1, ElementKind::FeaturePoint, {0, 0, 0}, 0.1, 5)};
        CHECK_THROWS_AS(wm.ingest_sensor_frame(frame, 4), SimError);
    }
}

TEST_CASE("write leases conflict only when regions overlap") {
    WorldModel wm;
    wm.register_app(1, false);
    wm.register_app(2, false);
    SUBCASE("disjoint writes are both granted") {
        auto a = wm.acquire_lease(1, {{0, 0, 0}, {1, 1, 1}}, LeaseMode::Write, 0);
        auto b = wm.acquire_lease(2, {{2, 2, 2}, {3, 3, 3}}, LeaseMode::Write, 0);
        CHECK(std::holds_alternative<RegionLease>(a));
        CHECK(std::holds_alternative<RegionLease>(b));
    }
    SUBCASE("intersecting write is denied and names the blocker") {
        wm.acquire_lease(1, {{0, 0, 0}, {1, 1, 1}}, LeaseMode::Write, 0);
        auto b = wm.acquire_lease(2, {{0.5, 0.5, 0.5}, {1.5, 1.5, 1.5}}, LeaseMode::Write, 0);
        REQUIRE(std::holds_alternative<LeaseDenied>(b));
        CHECK(std::get<LeaseDenied>(b).blocker_app == 1);
    }
    SUBCASE("reads never conflict") {
        wm.acquire_lease(1, {{0, 0, 0}, {1, 1, 1}}, LeaseMode::Write, 0);
        auto b = wm.acquire_lease(2, {{0, 0, 0}, {1, 1, 1}}, LeaseMode::Read, 0);
        CHECK(std::holds_alternative<RegionLease>(b));
    }
}

TEST_CASE("write-lease disjointness survives random acquire/release interleavings") {
    RngStream rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        WorldModel wm;
        for (uint64_t app = 1; app <= 4; ++app) wm.register_app(app, false);
        std::vector<uint64_t> held;
        for (int step = 0; step < 30; ++step) {
            if (!held.empty() && rng.bernoulli(0.3)) {
                size_t pick = rng.uniform_int(0, held.size() - 1);
                wm.release_lease(held[pick]);
                held.erase(held.begin() + pick);
                continue;
            }
            uint64_t app = rng.uniform_int(1, 4);
            Vec3 lo{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
            Vec3 hi = lo + Vec3{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3)};
            auto res = wm.acquire_lease(app, {lo, hi}, LeaseMode::Write, step);
            if (auto* lease = std::get_if<RegionLease>(&res)) held.push_back(lease->lease_id);
        }
        // invariant: write leases of distinct apps never overlap
        const auto& leases = wm.leases();
        for (size_t i = 0; i < leases.size(); ++i)
            for (size_t j = i + 1; j < leases.size(); ++j) {
                if (leases[i].mode != LeaseMode::Write || leases[j].mode != LeaseMode::Write)
                    continue;
                if (leases[i].app == leases[j].app) continue;
                REQUIRE(!leases[i].region.overlaps_interior(leases[j].region));
            }
    }
}

namespace {
WorldModel with_anchor(uint64_t app) {
    WorldModel wm;
    wm.register_app(app, false);
    std::vector<WorldElement> frame{make_element(100, ElementKind::Anchor, {0, 0, 0}, 0.05, 0)};
    wm.ingest_sensor_frame(frame, 0);
    return wm;
}

ContentPlacement placement(uint64_t id, uint64_t app, Aabb bounds, PlacePriority prio) {
    ContentPlacement p;
    p.placement_id = id;
    p.app = app;
    p.anchor_id = 100;
    p.bounds = bounds;
    p.priority = prio;
    return p;
}
}  // namespace

TEST_CASE("content placement keeps apps' bounds disjoint") {
    SUBCASE("first placement in an empty lease") {
        WorldModel wm = with_anchor(1);
        wm.acquire_lease(1, {{-1, -1, -1}, {1, 1, 1}}, LeaseMode::Write, 0);
        auto res = wm.place_content(1, placement(1, 1, {{-0.1, -0.1, 0}, {0.1, 0.1, 0.2}},
                                                 PlacePriority::Normal));
        CHECK(res.outcome == PlaceOutcome::Placed);
    }
    SUBCASE("exactly overlapping placement relocates or rejects, never overlaps") {
        WorldModel wm = with_anchor(1);
        wm.register_app(2, false);
        auto l1 = wm.acquire_lease(1, {{-1, -1, -1}, {1, 1, 1}}, LeaseMode::Write, 0);
        Aabb box{{0, 0, 0}, {0.1, 0.1, 0.1}};
        auto r1 = wm.place_content(1, placement(1, 1, box, PlacePriority::Normal));
        REQUIRE(r1.outcome == PlaceOutcome::Placed);
        wm.release_lease(std::get<RegionLease>(l1).lease_id);
        wm.acquire_lease(2, {{-1, -1, -1}, {1, 1, 1}}, LeaseMode::Write, 0);
        auto r2 = wm.place_content(2, placement(2, 2, box, PlacePriority::Normal));
        CHECK(r2.outcome != PlaceOutcome::Placed);  // Relocated or Rejected, never overlapping
        for (const auto& a : wm.placements())
            for (const auto& b : wm.placements()) {
                if (a.placement_id == b.placement_id || a.app == b.app) continue;
                REQUIRE(!a.bounds.overlaps_interior(b.bounds));
            }
    }
    SUBCASE("placement without a covering write lease errors") {
        WorldModel wm = with_anchor(1);
        CHECK_THROWS_AS(
            wm.place_content(1, placement(1, 1, {{0, 0, 0}, {0.1, 0.1, 0.1}}, PlacePriority::Normal)),
            NoLeaseError);
    }
}

TEST_CASE("relocation slides along the spiral to the first free probe") {
    WorldModel wm = with_anchor(1);
    wm.register_app(2, false);
    // app 2 owns the box at the origin, then releases its lease
    auto lease2 = wm.acquire_lease(2, {{-1, -1, -1}, {1, 1, 1}}, LeaseMode::Write, 0);
    auto first =
        wm.place_content(2, placement(1, 2, {{0, 0, 0}, {0.1, 0.1, 0.1}}, PlacePriority::Normal));
    REQUIRE(first.outcome == PlaceOutcome::Placed);
    wm.release_lease(std::get<RegionLease>(lease2).lease_id);

    wm.acquire_lease(1, {{-1, -1, -1}, {1, 1, 1}}, LeaseMode::Write, 0);
    auto res =
        wm.place_content(1, placement(2, 1, {{0, 0, 0}, {0.1, 0.1, 0.1}}, PlacePriority::Normal));
    REQUIRE(res.outcome == PlaceOutcome::Relocated);
    // ring 1 probes all overlap the 0.1 m blocker at 0.05 m steps; the first
    // free candidate is ring 2's (2, 0): slid +0.1 m in x, touching faces only
    CHECK(res.bounds == Aabb{{0.1, 0, 0}, {0.2, 0.1, 0.1}});
}

TEST_CASE("relocation rejects when every spiral probe collides") {
    WorldModel wm = with_anchor(1);
    wm.register_app(2, false);
    auto lease2 = wm.acquire_lease(2, {{-10, -10, -10}, {10, 10, 10}}, LeaseMode::Write, 0);
    auto big = wm.place_content(2, placement(1, 2, {{-8, -8, -8}, {8, 8, 8}}, PlacePriority::Normal));
    REQUIRE(big.outcome == PlaceOutcome::Placed);
    wm.release_lease(std::get<RegionLease>(lease2).lease_id);

    wm.acquire_lease(1, {{-2, -2, -2}, {2, 2, 2}}, LeaseMode::Write, 0);
    auto res = wm.place_content(1, placement(2, 1, {{-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}},
                                             PlacePriority::Normal));
    CHECK(res.outcome == PlaceOutcome::Rejected);

    // oracle: exhaustively enumerate the probe pattern and confirm saturation
    auto spiral = relocation_spiral(kRelocationProbes);
    REQUIRE(spiral.size() == kRelocationProbes);
    std::set<std::pair<int, int>> seen(spiral.begin(), spiral.end());
    CHECK(seen.size() == kRelocationProbes);  // no probe repeats
    Aabb want{{-0.1, -0.1, -0.1}, {0.1, 0.1, 0.1}};
    Aabb blocker{{-8, -8, -8}, {8, 8, 8}};
    for (auto [ix, iy] : spiral) {
        Aabb candidate = want.translated({ix * kRelocationStepM, iy * kRelocationStepM, 0});
        REQUIRE(candidate.overlaps_interior(blocker));
    }
}

TEST_CASE("query matches the linear-scan oracle on random stores") {
    RngStream rng(123);
    for (int trial = 0; trial < 40; ++trial) {
        WorldModel wm;
        wm.register_app(1, true);
        std::vector<WorldElement> all;
        int n = static_cast<int>(rng.uniform_int(1, 250));
        for (int i = 0; i < n; ++i) all.push_back(random_element(rng, i + 1, 0));
        wm.ingest_sensor_frame(all, 0);

        Aabb whole{{-100, -100, -100}, {100, 100, 100}};
        wm.acquire_lease(1, whole, LeaseMode::Read, 0);

        for (int q = 0; q < 20; ++q) {
            Aabb region;
            if (q == 0) {
                region = whole;
            } else {
                Vec3 lo{rng.uniform(-25, 20), rng.uniform(-25, 20), rng.uniform(-25, 20)};
                region = {lo, lo + Vec3{rng.uniform(0.5, 10), rng.uniform(0.5, 10),
                                        rng.uniform(0.5, 10)}};
            }
            std::vector<ElementKind> kinds;
            if (rng.bernoulli(0.5)) kinds = {ElementKind::Anchor, ElementKind::Plane};
            auto got = wm.query_primitives(1, region, kinds);
            auto want = scan_oracle(all, region, kinds);
            REQUIRE(got == want);
        }
    }
}

TEST_CASE("query requires a covering lease and honors privacy tags") {
    WorldModel wm;
    wm.register_app(1, false);  // no clearance
    wm.register_app(2, true);   // clearance
    auto secret = make_element(5, ElementKind::SemanticObject, {1, 1, 1}, 0.2, 0);
    secret.tag = Sensitivity::Private;
    std::vector<WorldElement> frame{secret};
    wm.ingest_sensor_frame(frame, 0);

    CHECK_THROWS_AS(wm.query_primitives(1, {{0, 0, 0}, {2, 2, 2}}, {}), NoLeaseError);

    wm.acquire_lease(1, {{0, 0, 0}, {2, 2, 2}}, LeaseMode::Read, 0);
    wm.acquire_lease(2, {{0, 0, 0}, {2, 2, 2}}, LeaseMode::Read, 0);
    CHECK(wm.query_primitives(1, {{0, 0, 0}, {2, 2, 2}}, {}).empty());
    CHECK(wm.query_primitives(2, {{0, 0, 0}, {2, 2, 2}}, {}).size() == 1);
}

TEST_CASE("merge examples") {
    SUBCASE("disjoint sets union") {
        WorldModel wm;
        std::vector<std::vector<WorldElement>> sets(2);
        for (int i = 0; i < 3; ++i)
            sets[0].push_back(make_element(i + 1, ElementKind::FeaturePoint, {1. * i, 0, 0}, 0.1, 1, "X"));
        for (int i = 0; i < 4; ++i)
            sets[1].push_back(make_element(i + 10, ElementKind::FeaturePoint, {1. * i, 2, 0}, 0.1, 1, "Y"));
        CHECK(wm.merge_remote(sets) == 7);
    }
    SUBCASE("latest timestamp wins across devices") {
        WorldModel wm;
        auto x = make_element(4, ElementKind::Plane, {0, 0, 0}, 0.5, 9, "X");
        auto y = make_element(4, ElementKind::Plane, {5, 0, 0}, 0.5, 12, "Y");
        std::vector<std::vector<WorldElement>> sets{{x}, {y}};
        wm.merge_remote(sets);
        CHECK(wm.find(4)->source == "Y");
    }
    SUBCASE("timestamp ties go to the smallest source id") {
        WorldModel wm;
        auto x = make_element(4, ElementKind::Plane, {0, 0, 0}, 0.5, 9, "X");
        auto y = make_element(4, ElementKind::Plane, {5, 0, 0}, 0.5, 9, "Y");
        std::vector<std::vector<WorldElement>> sets{{y}, {x}};
        wm.merge_remote(sets);
        CHECK(wm.find(4)->source == "X");
    }
}

TEST_CASE("merge is commutative, associative and idempotent") {
    RngStream rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::vector<WorldElement>> sets(3);
        for (auto& set : sets) {
            int n = static_cast<int>(rng.uniform_int(0, 8));
            for (int i = 0; i < n; ++i)
                set.push_back(random_element(rng, rng.uniform_int(1, 12),
                                             static_cast<SimTime>(rng.uniform_int(0, 5))));
        }
        auto want = merge_oracle(sets);

        // associativity: merge(A, merge(B, C)) == merge(merge(A, B), C)
        std::vector<std::vector<WorldElement>> bc{sets[1], sets[2]};
        std::vector<std::vector<WorldElement>> a_bc{sets[0], merge_sets(bc)};
        std::vector<std::vector<WorldElement>> ab{sets[0], sets[1]};
        std::vector<std::vector<WorldElement>> ab_c{merge_sets(ab), sets[2]};
        REQUIRE(merge_sets(a_bc) == merge_sets(ab_c));
        REQUIRE(merge_sets(a_bc) == want);

        // commutativity
        std::vector<std::vector<WorldElement>> rev{sets[2], sets[1], sets[0]};
        REQUIRE(merge_sets(rev) == want);

        // idempotence
        std::vector<std::vector<WorldElement>> twice{sets[0], sets[0], sets[1], sets[2]};
        REQUIRE(merge_sets(twice) == want);
    }
}

TEST_CASE("simplified copy ranks by kind then recency") {
    WorldModel wm;
    std::vector<WorldElement> frame{
        make_element(1, ElementKind::Anchor, {0, 0, 0}, 0.1, 1),
        make_element(2, ElementKind::FeaturePoint, {1, 0, 0}, 0.1, 9),
        make_element(3, ElementKind::Plane, {2, 0, 0}, 0.5, 5),
    };
    wm.ingest_sensor_frame(frame, 10);
    SUBCASE("budget zero is empty") { CHECK(wm.simplified_copy(0).empty()); }
    SUBCASE("budget beyond size returns everything") { CHECK(wm.simplified_copy(10).size() == 3); }
    SUBCASE("budget two keeps anchor and plane") {
        auto copy = wm.simplified_copy(2);
        REQUIRE(copy.size() == 2);
        CHECK(copy[0].id == 1);
        CHECK(copy[1].id == 3);
    }
}

TEST_CASE("persistence round-trips the store") {
    RngStream rng(5);
    WorldModel wm;
    std::vector<WorldElement> frame;
    for (int i = 0; i < 50; ++i) frame.push_back(random_element(rng, i + 1, 3));
    frame[0].labels = {"chair", "wood"};
    frame[1].tag = Sensitivity::Private;
    wm.ingest_sensor_frame(frame, 3);

    std::stringstream ss;
    wm.save(ss);
    WorldModel loaded = WorldModel::load(ss);
    CHECK(loaded.all_elements() == wm.all_elements());

    std::stringstream bad("XROSWM v2\n");
    CHECK_THROWS_AS(WorldModel::load(bad), SimError);
}
