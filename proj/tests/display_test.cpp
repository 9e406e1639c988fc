#include <doctest.h>

#include <cmath>

#include "xros/display.hpp"
#include "xros/rng.hpp"

using namespace xros;

namespace {

constexpr double kPi = 3.14159265358979323846;

Frustum test_frustum() {
    return make_frustum({{0, 0, 0}, {1, 0, 0, 0}}, 90 * kPi / 180, 60 * kPi / 180, 0.1, 100);
}

ContentPlacement pl(uint64_t id, uint64_t app, Aabb bounds, double relevance,
                    PlacePriority prio = PlacePriority::Normal) {
    ContentPlacement p;
    p.placement_id = id;
    p.app = app;
    p.bounds = bounds;
    p.relevance = relevance;
    p.priority = prio;
    return p;
}

Aabb small_box_ahead(double y_off, double z_off) {
    return {{4.9, y_off - 0.05, z_off - 0.05}, {5.1, y_off + 0.05, z_off + 0.05}};
}

// Monte-Carlo oracle: directions uniform on the sphere, rejected to the
// frustum; covered fraction = hits / accepted.
double mc_coverage(std::span<const ContentPlacement> rendered, const Frustum& fr, int accepted_n,
                   uint64_t seed) {
    RngStream rng(seed);
    int accepted = 0, hits = 0;
    while (accepted < accepted_n) {
        // Marsaglia uniform direction
        double u = rng.uniform(-1, 1), v = rng.uniform(-1, 1);
        double s = u * u + v * v;
        if (s >= 1.0) continue;
        double f = 2.0 * std::sqrt(1.0 - s);
        Vec3 dir{u * f, v * f, 1.0 - 2.0 * s};
        double fd = dot(dir, fr.forward);
        if (fd <= 0) continue;
        if (std::abs(dot(dir, fr.right)) > fd * fr.tan_h) continue;
        if (std::abs(dot(dir, fr.up)) > fd * fr.tan_v) continue;
        ++accepted;
        for (const auto& p : rendered) {
            if (ray_aabb({fr.origin, dir}, p.bounds)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / accepted_n;
}

}  // namespace

TEST_CASE("selection under budget keeps everything") {
    Frustum fr = test_frustum();
    std::vector<ContentPlacement> ps{
        pl(1, 1, small_box_ahead(0, 0), 0.9),
        pl(2, 2, small_box_ahead(1, 0), 0.5),
        pl(3, 3, small_box_ahead(-1, 0), 0.1),
    };
    auto out = select_visible(ps, fr, DisplayBudget{}, 64);
    CHECK(out.size() == 3);
}

TEST_CASE("count cap keeps the most relevant items") {
    Frustum fr = test_frustum();
    std::vector<ContentPlacement> ps;
    for (int i = 0; i < 10; ++i)
        ps.push_back(pl(i + 1, i + 1, small_box_ahead((i - 5) * 0.4, 0), 0.1 * i));
    auto out = select_visible(ps, fr, DisplayBudget{7, 0.35}, 64);
    REQUIRE(out.size() == 7);
    for (const auto& p : out) CHECK(p.relevance >= 0.3);  // the 7 highest of 0.0..0.9
}

TEST_CASE("safety placements are exempt from the budget") {
    Frustum fr = test_frustum();
    std::vector<ContentPlacement> ps;
    ps.push_back(pl(99, 9, small_box_ahead(0, 0.5), 0.0, PlacePriority::Safety));
    for (int i = 0; i < 7; ++i)
        ps.push_back(pl(i + 1, i + 1, small_box_ahead((i - 3) * 0.4, 0), 0.2 + 0.1 * i));
    auto out = select_visible(ps, fr, DisplayBudget{7, 0.35}, 64);
    CHECK(out.size() == 8);  // safety + all 7 normal
    bool safety_present = false;
    for (const auto& p : out)
        if (p.placement_id == 99) safety_present = true;
    CHECK(safety_present);
}

TEST_CASE("solid-angle cap blocks oversized overlays") {
    Frustum fr = test_frustum();
    // a wall filling most of the view
    std::vector<ContentPlacement> ps{pl(1, 1, {{2, -50, -50}, {3, 50, 50}}, 0.9)};
    auto out = select_visible(ps, fr, DisplayBudget{7, 0.35}, 64);
    CHECK(out.empty());
}

TEST_CASE("coverage") {
    Frustum fr = test_frustum();
    SUBCASE("empty render list covers nothing") {
        std::vector<ContentPlacement> none;
        CHECK(coverage(none, fr, 64) == 0.0);
    }
    SUBCASE("a frustum-filling wall covers ~1 (vs Monte-Carlo oracle)") {
        std::vector<ContentPlacement> ps{pl(1, 1, {{1, -500, -500}, {2, 500, 500}}, 1.0)};
        double got = coverage(ps, fr, 64);
        double want = mc_coverage(ps, fr, 100'000, 42);
        CHECK(got == doctest::Approx(1.0).epsilon(0.05));
        CHECK(got == doctest::Approx(want).epsilon(0.05));
    }
    SUBCASE("duplicates do not double-count overlapping angle") {
        Aabb box{{4, -1.5, -1}, {5, 1.5, 1}};
        std::vector<ContentPlacement> once{pl(1, 1, box, 1.0)};
        std::vector<ContentPlacement> twice{pl(1, 1, box, 1.0), pl(2, 2, box, 1.0)};
        double c1 = coverage(once, fr, 64);
        double c2 = coverage(twice, fr, 64);
        CHECK(c2 == doctest::Approx(c1).epsilon(1e-9));  // exact under the grid
        double want = mc_coverage(twice, fr, 100'000, 77);
        CHECK(c2 == doctest::Approx(want).epsilon(0.05));
    }
    SUBCASE("partial coverage agrees with the oracle") {
        std::vector<ContentPlacement> ps{pl(1, 1, {{3, -1, -1}, {4, 1, 1}}, 1.0),
                                         pl(2, 2, {{6, 0.5, -2}, {7, 4, 2}}, 1.0)};
        double got = coverage(ps, fr, 96);
        double want = mc_coverage(ps, fr, 200'000, 7);
        CHECK(got == doctest::Approx(want).epsilon(0.05));
    }
}

TEST_CASE("selection invariants") {
    Frustum fr = test_frustum();
    RngStream rng(2025);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ContentPlacement> ps;
        int n = static_cast<int>(rng.uniform_int(1, 12));
        for (int i = 0; i < n; ++i) {
            double y = rng.uniform(-4, 4), z = rng.uniform(-2, 2);
            double half = rng.uniform(0.1, 1.2);
            Aabb box{{5 - half, y - half, z - half}, {5 + half, y + half, z + half}};
            auto prio = rng.bernoulli(0.15) ? PlacePriority::Safety : PlacePriority::Normal;
            ps.push_back(pl(i + 1, i + 1, box, rng.uniform01(), prio));
        }
        DisplayBudget budget{4, 0.3};
        auto out = select_visible(ps, fr, budget, 48);

        // render list is a subset; safety always present
        int non_safety = 0;
        for (const auto& o : out) {
            bool found = false;
            for (const auto& p : ps)
                if (p.placement_id == o.placement_id) found = true;
            REQUIRE(found);
            if (o.priority != PlacePriority::Safety) ++non_safety;
        }
        for (const auto& p : ps) {
            if (p.priority != PlacePriority::Safety) continue;
            bool present = false;
            for (const auto& o : out)
                if (o.placement_id == p.placement_id) present = true;
            REQUIRE(present);
        }
        REQUIRE(non_safety <= budget.max_items);

        // coverage cap on the non-safety subset
        std::vector<ContentPlacement> non_safety_list;
        for (const auto& o : out)
            if (o.priority != PlacePriority::Safety) non_safety_list.push_back(o);
        CHECK(coverage(non_safety_list, fr, 48) <= budget.max_solid_angle + 1e-9);

        // monotonicity: raising an admitted item's relevance keeps it admitted
        if (!out.empty()) {
            const auto& keep = out.back();
            if (keep.priority != PlacePriority::Safety) {
                auto boosted = ps;
                for (auto& p : boosted)
                    if (p.placement_id == keep.placement_id) p.relevance = 1.0;
                auto out2 = select_visible(boosted, fr, budget, 48);
                bool still = false;
                for (const auto& o : out2)
                    if (o.placement_id == keep.placement_id) still = true;
                REQUIRE(still);
            }
        }
    }
}
