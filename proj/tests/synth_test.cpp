#include "riskgraph/errors.hpp"
#include "riskgraph/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

using namespace riskgraph;

namespace {

const char* kOneCutIn = R"({
  "duration": 20.0,
  "events": [
    {"type": "cut_in", "t_start": 8.0, "from_lane": 3, "gap": 10.0,
     "rel_speed": -0.5, "severity": 0.8,
     "context": [{"lane": 1, "dy": 25.0}]}
  ]
})";

} // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("scenario defaults survive an empty object") {
    const auto spec = synth::parse_scenario("{}");
    CHECK(spec.duration == 60.0);
    CHECK(spec.dt == 0.04);
    CHECK(spec.host_speed == 16.7);
    CHECK(spec.events.empty());
}

TEST_CASE("scenario parse rejects malformed input") {
    CHECK_THROWS_AS(synth::parse_scenario("not json"), SpecError);
    CHECK_THROWS_AS(synth::parse_scenario("[1,2]"), SpecError);
    CHECK_THROWS_AS(synth::parse_scenario(
                        R"({"events":[{"type":"teleport"}]})"),
                    SpecError);
    // range with lo > hi
    CHECK_THROWS_AS(synth::parse_scenario(
                        R"({"events":[{"type":"cut_in","gap":[9.0, 5.0]}]})"),
                    SpecError);
}

TEST_CASE("generation is a pure function of spec and seed") {
    const auto spec = synth::parse_scenario(kOneCutIn);
    const auto a = synth::generate_synthetic(spec, 5);
    const auto b = synth::generate_synthetic(spec, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ax == b[i].ax);
        CHECK(a[i].steer == b[i].steer);
        REQUIRE(a[i].tracks.size() == b[i].tracks.size());
        for (std::size_t t = 0; t < a[i].tracks.size(); ++t)
            CHECK(a[i].tracks[t].dy == b[i].tracks[t].dy);
    }
    const auto c = synth::generate_synthetic(spec, 6);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size() && !any_diff; ++i)
        any_diff = a[i].steer != c[i].steer;
    CHECK(any_diff);
}

TEST_CASE("record grid matches duration and dt") {
    const auto spec = synth::parse_scenario(R"({"duration": 4.0, "dt": 0.1})");
    const auto recs = synth::generate_synthetic(spec, 1);
    REQUIRE(recs.size() == 40);
    for (std::size_t i = 1; i < recs.size(); ++i)
        CHECK(recs[i].timestamp > recs[i - 1].timestamp);
    CHECK(recs[10].timestamp == doctest::Approx(1.0));
}

TEST_CASE("cut-in crosses the boundary at the trigger and provokes braking") {
    const auto spec = synth::parse_scenario(kOneCutIn);
    const auto recs = synth::generate_synthetic(spec, 3);
    const double w = spec.lane_width;

    // cutter from lane 3 starts near +w and ends near 0 (host lane center)
    auto cutter_dx = [&](double t) -> double {
        const auto idx = static_cast<std::size_t>(t / spec.dt);
        for (const auto& tr : recs[idx].tracks)
            if (tr.track_id == 1) return tr.dx;
        return std::nan("");
    };
    CHECK(cutter_dx(6.0) == doctest::Approx(w).epsilon(0.05));
    // the lateral midpoint -- the boundary itself -- is hit at the trigger
    CHECK(std::abs(cutter_dx(8.0) - w / 2.0) < 0.2);
    CHECK(cutter_dx(9.5) == doctest::Approx(0.0).epsilon(0.05));
    // crossing happens within the maneuver, right around t_start
    CHECK(cutter_dx(7.9) > w / 2.0);
    CHECK(cutter_dx(8.1) < w / 2.0);

    // host response: no braking before trigger+delay, strong braking after
    double min_ax_before = 0.0, min_ax_after = 0.0;
    for (const auto& r : recs) {
        if (r.timestamp < 8.4) min_ax_before = std::min(min_ax_before, r.ax);
        if (r.timestamp >= 8.4 && r.timestamp <= 10.5)
            min_ax_after = std::min(min_ax_after, r.ax);
    }
    CHECK(min_ax_before > -0.5);
    CHECK(min_ax_after < -0.8 * 6.0 * 0.8); // close to max_decel * severity
    // brake pedal mirrors the commanded deceleration
    const auto at_peak = static_cast<std::size_t>(9.6 / spec.dt);
    CHECK(recs[at_peak].brake > 0.0);
}

TEST_CASE("context vehicle rides along in its own lane") {
    const auto spec = synth::parse_scenario(kOneCutIn);
    const auto recs = synth::generate_synthetic(spec, 3);
    const auto idx = static_cast<std::size_t>(8.0 / spec.dt);
    bool found = false;
    for (const auto& tr : recs[idx].tracks) {
        if (tr.track_id == 2) {
            found = true;
            CHECK(tr.dx == doctest::Approx(-spec.lane_width).epsilon(0.05));
            CHECK(tr.dy == doctest::Approx(25.0).epsilon(0.1));
        }
    }
    CHECK(found);
}

TEST_CASE("severity zero provokes no host response") {
    const auto spec = synth::parse_scenario(R"({
      "duration": 20.0,
      "events": [{"type": "cut_in", "t_start": 8.0, "from_lane": 1,
                  "gap": 30.0, "severity": 0.0}]
    })");
    const auto recs = synth::generate_synthetic(spec, 2);
    for (const auto& r : recs) CHECK(r.ax == 0.0);
}

TEST_CASE("braking lead slows down after its trigger") {
    const auto spec = synth::parse_scenario(R"({
      "duration": 20.0,
      "events": [{"type": "braking_lead", "t_start": 6.0, "gap": 35.0,
                  "lead_decel": 3.0, "lead_brake_time": 2.0, "severity": 0.5}]
    })");
    const auto recs = synth::generate_synthetic(spec, 4);
    auto lead_dy = [&](double t) -> double {
        const auto idx = static_cast<std::size_t>(t / spec.dt);
        REQUIRE(!recs[idx].tracks.empty());
        return recs[idx].tracks[0].dy;
    };
    // before the trigger the lead holds distance (same speed as host)
    CHECK(lead_dy(5.0) == doctest::Approx(35.0).epsilon(0.02));
    // afterwards the gap closes even though the host brakes too: the host
    // reacts 0.4 s late and through a first-order lag, so it gives up a
    // few meters while both cars slow down
    CHECK(lead_dy(8.5) < 32.0);
    CHECK(lead_dy(8.5) > 25.0);
}

TEST_CASE("events outside the log are rejected") {
    CHECK_THROWS_AS(
        synth::generate_synthetic(
            synth::parse_scenario(
                R"({"duration": 10.0, "events": [{"type": "cut_in", "t_start": 12.0}]})"),
            1),
        SpecError);
    CHECK_THROWS_AS(
        synth::generate_synthetic(
            synth::parse_scenario(
                R"({"duration": 10.0,
                    "events": [{"type": "cut_in", "t_start": 2.0, "count": 3, "period": 4.0}]})"),
            1),
        SpecError);
}

TEST_CASE("repeated events redraw their sampled parameters") {
    const auto spec = synth::parse_scenario(R"({
      "duration": 40.0,
      "events": [{"type": "cut_in", "t_start": 6.0, "count": 3, "period": 10.0,
                  "from_lane": 3, "gap": [8.0, 20.0], "severity": [0.3, 0.9]}]
    })");
    const auto recs = synth::generate_synthetic(spec, 9);
    // measure each instance's gap at its trigger
    std::vector<double> gaps;
    for (int inst = 0; inst < 3; ++inst) {
        const double t = 6.0 + 10.0 * inst;
        const auto idx = static_cast<std::size_t>(t / spec.dt);
        for (const auto& tr : recs[idx].tracks)
            if (std::abs(tr.dx) < spec.lane_width * 0.51) gaps.push_back(tr.dy);
    }
    REQUIRE(gaps.size() == 3);
    CHECK((gaps[0] != gaps[1] || gaps[1] != gaps[2]));
    for (double g : gaps) {
        CHECK(g >= 7.5);
        CHECK(g <= 20.5);
    }
}

TEST_SUITE_END();
