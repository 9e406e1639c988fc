#include <doctest.h>

#include <cmath>
#include <set>

#include "xros/rng.hpp"
#include "xros/scheduler.hpp"

using namespace xros;

namespace {

Ledger& led_dummy() {
    static Ledger led;
    return led;
}

Frustum default_frustum(Vec3 origin = {0, 0, 0}) {
    return make_frustum({origin, {1, 0, 0, 0}}, 90 * 3.14159265358979 / 180,
                        60 * 3.14159265358979 / 180, 0.1, 50);
}

ContentPlacement box_at(Vec3 center, double half) {
    ContentPlacement p;
    p.bounds = {center - Vec3{half, half, half}, center + Vec3{half, half, half}};
    return p;
}

AppProcess app(uint64_t id, int64_t demand, FovRelation fov, ExecMode mode = ExecMode::SharedModel) {
    AppProcess a;
    a.id = id;
    a.demand_us = demand;
    a.fov = fov;
    a.mode = mode;
    return a;
}

}  // namespace

TEST_CASE("fov classification") {
    Frustum fr = default_frustum();
    double d_near = 3.0;
    SUBCASE("content on the view axis is InView") {
        ContentPlacement p = box_at({1, 0, 0}, 0.1);  // 1 m ahead, yaw 0 faces +x
        std::vector<ContentPlacement> ps{p};
        CHECK(classify_fov(ps, fr, d_near) == FovRelation::InView);
    }
    SUBCASE("content behind but close is NearConcealed") {
        std::vector<ContentPlacement> ps{box_at({-2, 0, 0}, 0.1)};
        CHECK(classify_fov(ps, fr, d_near) == FovRelation::NearConcealed);
    }
    SUBCASE("distant content is Far") {
        std::vector<ContentPlacement> ps{box_at({-50, 0, 0}, 0.1)};
        CHECK(classify_fov(ps, fr, d_near) == FovRelation::Far);
    }
    SUBCASE("no placements is Far") {
        std::vector<ContentPlacement> none;
        CHECK(classify_fov(none, fr, d_near) == FovRelation::Far);
    }
}

TEST_CASE("frame scheduling fills classes in strict order") {
    Ledger led;
    SUBCASE("single app under budget") {
        Scheduler sched;
        sched.register_app(app(1, 5000, FovRelation::InView));
        FrameBudget budget;
        auto grants = sched.schedule_frame(budget, led);
        REQUIRE(grants.size() == 1);
        CHECK(grants[0].granted_us == 5000);
        CHECK(led.counter("deadline_misses") == 0);
        CHECK(budget.spent_us == 5000);
    }
    SUBCASE("three InView apps overflow by one") {
        Scheduler sched;
        for (uint64_t id = 1; id <= 3; ++id) sched.register_app(app(id, 8000, FovRelation::InView));
        FrameBudget budget;
        auto grants = sched.schedule_frame(budget, led);
        REQUIRE(grants.size() == 3);
        CHECK(grants[0].granted_us == 8000);
        CHECK(grants[1].granted_us == 8000);
        CHECK(grants[2].granted_us == 667);
        CHECK(led.counter("deadline_misses") == 1);
    }
    SUBCASE("InView drains before NearConcealed pre-compute") {
        Scheduler sched;
        sched.register_app(app(1, 10000, FovRelation::InView));
        sched.register_app(app(2, 10000, FovRelation::NearConcealed));
        FrameBudget budget;
        auto grants = sched.schedule_frame(budget, led);
        REQUIRE(grants.size() == 2);
        CHECK(grants[0].app == 1);
        CHECK(grants[0].granted_us == 10000);
        CHECK(grants[1].app == 2);
        CHECK(grants[1].granted_us == 6667);
    }
    SUBCASE("pre-compute credit reduces the next InView demand down to the floor") {
        Scheduler sched;
        sched.register_app(app(1, 10000, FovRelation::NearConcealed));
        FrameBudget b1;
        sched.schedule_frame(b1, led);  // earns 8000 credit (cap = 80% of demand)
        sched.update_fov(1, FovRelation::InView);
        FrameBudget b2;
        auto grants = sched.schedule_frame(b2, led);
        REQUIRE(grants.size() == 1);
        CHECK(grants[0].granted_us == 2000);  // floor: 20% of 10000
    }
    SUBCASE("stale budget is rejected") {
        Scheduler sched;
        sched.register_app(app(1, 100, FovRelation::InView));
        FrameBudget budget;
        budget.spent_us = 5;
        CHECK_THROWS_AS(sched.schedule_frame(budget, led), SimError);
    }
}

TEST_CASE("budget safety and class dominance over randomized workloads") {
    RngStream rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        Scheduler sched;
        int n = static_cast<int>(rng.uniform_int(1, 16));
        for (int i = 0; i < n; ++i) {
            FovRelation fov = static_cast<FovRelation>(rng.uniform_int(0, 2));
            sched.register_app(app(i + 1, rng.uniform_int(100, 20000), fov));
        }
        for (int frame = 0; frame < 200; ++frame) {
            // shuffle classes between frames
            for (int i = 0; i < n; ++i)
                if (rng.bernoulli(0.2))
                    sched.update_fov(i + 1, static_cast<FovRelation>(rng.uniform_int(0, 2)));
            FrameBudget budget;
            auto grants = sched.schedule_frame(budget, led_dummy());
            int64_t total = 0;
            int64_t in_view_unmet = 0;
            for (const auto& g : grants) total += g.granted_us;
            REQUIRE(total <= budget.interframe_us);
            REQUIRE(budget.spent_us == total);
            // strict dominance: lower classes only run when InView demand is fully met
            for (const auto& g : grants) {
                if (g.cls == FovRelation::InView) {
                    const AppProcess* a = sched.find(g.app);
                    if (g.granted_us < a->demand_us) in_view_unmet += 1;
                }
            }
            if (in_view_unmet > 0) {
                for (const auto& g : grants)
                    REQUIRE(g.cls == FovRelation::InView);
            }
        }
    }
}

TEST_CASE("round-robin leads every app within class-size frames") {
    Scheduler sched;
    const int k = 5;
    for (uint64_t id = 1; id <= k; ++id) sched.register_app(app(id, 4000, FovRelation::InView));
    std::set<uint64_t> leaders;
    Ledger led;
    for (int frame = 0; frame < k; ++frame) {
        FrameBudget budget;
        auto grants = sched.schedule_frame(budget, led);
        REQUIRE(!grants.empty());
        leaders.insert(grants.front().app);
    }
    CHECK(leaders.size() == k);
}

TEST_CASE("shared-model context switch stays within the interframe time") {
    Scheduler sched;
    sched.register_app(app(1, 1000, FovRelation::InView, ExecMode::SharedModel));
    sched.register_app(app(2, 1000, FovRelation::InView, ExecMode::SharedModel));
    RngStream rng(3);
    Ledger led;
    for (int i = 0; i < 100; ++i) {
        int64_t cost = sched.context_switch(1, 2, MotionCondition::Static, true, 3, kInterframe60Us,
                                            0, rng, led);
        REQUIRE(cost <= kInterframe60Us);
    }
    CHECK(led.counter("tracking_recovery_events") == 0);
}

TEST_CASE("isolated-model recovery follows the configured statistics") {
    Scheduler sched;
    sched.register_app(app(1, 1000, FovRelation::InView, ExecMode::IsolatedModel));
    sched.register_app(app(2, 1000, FovRelation::InView, ExecMode::IsolatedModel));
    RngStream rng(17);
    Ledger led;

    SUBCASE("static mean over 1000 switches within 5%") {
        double total = 0;
        const int n = 1000;
        for (int i = 0; i < n; ++i)
            total += sched.context_switch(1, 2, MotionCondition::Static, true, 1, kInterframe60Us,
                                          0, rng, led);
        double mean = total / n;
        CHECK(mean == doctest::Approx(1'350'000).epsilon(0.05));
        CHECK(led.counter("tracking_recovery_events") == n);
        CHECK(led.timer("tracking_recovery_total") == doctest::Approx(total));
    }
    SUBCASE("moving mean over 1000 switches within 5%") {
        double total = 0;
        const int n = 1000;
        for (int i = 0; i < n; ++i)
            total += sched.context_switch(1, 2, MotionCondition::Moving, true, 1, kInterframe60Us,
                                          0, rng, led);
        CHECK(total / n == doctest::Approx(1'530'000).epsilon(0.05));
    }
    SUBCASE("out-of-view targets pay the full re-localisation penalty") {
        for (int i = 0; i < 100; ++i) {
            int64_t cost = sched.context_switch(1, 2, MotionCondition::Static, false, 1,
                                                kInterframe60Us, 0, rng, led);
            REQUIRE(cost >= 3'000'000);
        }
    }
    SUBCASE("recovery deadline lands on the target app") {
        int64_t cost = sched.context_switch(1, 2, MotionCondition::Static, true, 1,
                                            kInterframe60Us, 500, rng, led);
        REQUIRE(sched.find(2)->recovery_until.has_value());
        CHECK(*sched.find(2)->recovery_until == 500 + cost);
    }
    SUBCASE("switching to an unknown app fails") {
        CHECK_THROWS_AS(sched.context_switch(1, 99, MotionCondition::Static, true, 0,
                                             kInterframe60Us, 0, rng, led),
                        UnknownAppError);
    }
}
