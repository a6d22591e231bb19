#include "metro/error.hpp"
#include "metro/topology.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <functional>

using namespace metro;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("t9 wiring") {
    const LineTopology t = testing::t9();
    REQUIRE(t.size() == 12);
    CHECK(capacity(t) == 12);
    CHECK(t.part_size(Part::Central) == 8);
    CHECK(t.part_size(Part::Branch1) == 2);
    CHECK(t.part_size(Part::Branch2) == 2);
    CHECK(t.convergence_id() == 0);
    CHECK(t.divergence_id() == 7);

    CHECK(t.successor(7, 0) == t.branch_head(Branch::One));
    CHECK(t.successor(7, 1) == t.branch_head(Branch::Two));
    CHECK(t.successor(t.branch_tail(Branch::One)) == 0);
    CHECK(t.successor(t.branch_tail(Branch::Two)) == 0);
    CHECK(t.predecessor(0, 0) == t.branch_tail(Branch::One));
    CHECK(t.predecessor(0, 1) == t.branch_tail(Branch::Two));
    CHECK(t.successor_count(7) == 2);
    CHECK(t.predecessor_count(0) == 2);
    CHECK(t.successor_count(3) == 1);

    // first half of each part runs outbound
    CHECK(t.segment(3).direction == Direction::Outbound);
    CHECK(t.segment(4).direction == Direction::Inbound);
    CHECK(t.segment(8).direction == Direction::Outbound);
    CHECK(t.segment(9).direction == Direction::Inbound);
    CHECK(t.branch_of(9) == Branch::One);
    CHECK(t.branch_of(11) == Branch::Two);
    CHECK_FALSE(t.branch_of(2).has_value());
}

TEST_CASE("every non-junction segment has one neighbour each way") {
    const LineTopology t = testing::t9();
    for (int id = 0; id < t.size(); ++id) {
        for (int parity = 0; parity < t.successor_count(id); ++parity) {
            const int back = id == t.branch_tail(Branch::Two) ? 1 : parity;
            CHECK(t.predecessor(t.successor(id, parity), back) == id);
        }
    }
}

TEST_CASE("mirror swaps the branches") {
    LineDescription d = testing::t9_description();
    d.branch2.push_back(testing::plain(70, 50, 25));
    const LineTopology t = build_line(d);
    const LineTopology m = t.mirrored();
    CHECK(m.part_size(Part::Branch1) == 3);
    CHECK(m.part_size(Part::Branch2) == 2);
    CHECK(m.segment(m.branch_tail(Branch::One)).nominal_run_time == 70);
    CHECK(m.mirrored().description().branch2.size() == 3);
}

TEST_CASE("validation errors") {
    LineDescription d = testing::t9_description();
    SECTION("saturated platform") {
        d.central[1].platform->arrival_rate = 1.0;
        CHECK(code_of([&] { build_line(d); }) == ErrorCode::SaturatedPlatform);
    }
    SECTION("empty part") {
        d.branch2.clear();
        CHECK(code_of([&] { build_line(d); }) == ErrorCode::EmptyPart);
    }
    SECTION("non-positive run time") {
        d.central[0].run_time = 0;
        CHECK(code_of([&] { build_line(d); }) == ErrorCode::NonPositiveRunTime);
    }
    SECTION("min run above nominal") {
        d.central[0].min_run_time = 61;
        CHECK(code_of([&] { build_line(d); }) == ErrorCode::MarginViolation);
    }
    SECTION("branch without a platform") {
        d.branch1[0].platform.reset();
        CHECK(code_of([&] { build_line(d); }) == ErrorCode::MissingPlatform);
    }
}

TEST_CASE("demand scaling") {
    const LineTopology t = testing::t9(0.1);
    const LineTopology s = scale_demand(t, 1.5, 1.0, 2.0);
    CHECK(s.segment(1).platform->arrival_rate == Catch::Approx(0.15));
    CHECK(s.segment(8).platform->arrival_rate == Catch::Approx(0.1));
    CHECK(s.segment(10).platform->arrival_rate == Catch::Approx(0.2));
    CHECK(code_of([&] { scale_demand(t, 10.0, 1.0, 1.0); }) == ErrorCode::SaturatedPlatform);
    const LineTopology w = without_margins(t);
    for (const Segment& seg : w.segments()) CHECK(seg.margin() == 0.0);
}

TEST_CASE("seeding") {
    const LineTopology t = testing::t9();
    SECTION("empty line") {
        const TrainConfiguration c = seed_trains(t, 0, 0);
        CHECK(c.total() == 0);
    }
    SECTION("full line") {
        const TrainConfiguration c = seed_trains(t, 12, 0);
        CHECK(c.total() == 12);
        CHECK(c.imbalance(t) == 0);
    }
    SECTION("counts and imbalance hold for every feasible pair") {
        for (SeedRule rule : {SeedRule::EvenSpacing, SeedRule::Packed}) {
            for (int m = 0; m <= 12; ++m) {
                for (int dm = -4; dm <= 4; ++dm) {
                    try {
                        const TrainConfiguration c = seed_trains(t, m, dm, rule);
                        CHECK(c.total() == m);
                        CHECK(c.imbalance(t) == dm);
                        CHECK(c.count(t, Part::Branch1) <= 2);
                        CHECK(c.count(t, Part::Branch2) <= 2);
                        if (dm > 0) CHECK(c.first_branch == Branch::Two);
                        if (dm < 0) CHECK(c.first_branch == Branch::One);
                    } catch (const Error& e) {
                        CHECK(e.code() == ErrorCode::InfeasibleSeed);
                    }
                }
            }
        }
    }
    SECTION("m = 4, dm = 2") {
        const TrainConfiguration c = seed_trains(t, 4, 2);
        CHECK(c.count(t, Part::Branch2) - c.count(t, Part::Branch1) == 2);
        CHECK(c.total() == 4);
    }
    SECTION("infeasible") {
        CHECK(code_of([&] { seed_trains(t, 13, 0); }) == ErrorCode::InfeasibleSeed);
        CHECK(code_of([&] { seed_trains(t, 1, 3); }) == ErrorCode::InfeasibleSeed);
        CHECK(code_of([&] { seed_trains(t, 12, 1); }) == ErrorCode::InfeasibleSeed);
    }
    SECTION("tie branch") {
        CHECK(seed_trains(t, 4, 0, SeedRule::EvenSpacing, Branch::Two).first_branch == Branch::Two);
    }
}

TEST_CASE("explicit occupancy") {
    const LineTopology t = testing::t9();
    std::vector<bool> occ(12, false);
    occ[0] = occ[8] = occ[11] = true;
    const TrainConfiguration c = make_configuration(t, occ, Branch::Two);
    CHECK(c.total() == 3);
    CHECK(c.imbalance(t) == 0);
    CHECK(code_of([&] { make_configuration(t, std::vector<bool>(5, true)); }) == ErrorCode::InfeasibleSeed);
}
