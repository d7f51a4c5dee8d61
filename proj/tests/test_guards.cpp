#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charda/guards.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"

using namespace charda;

namespace {

ModeSet modeset_of(std::vector<std::vector<Occurrence>> occurrence_lists,
                   const std::vector<double>& values,
                   const SegmentationOptions& opts) {
  const SufficientStats stats(values);
  ModeSet set;
  for (auto& occs : occurrence_lists) {
    Mode m;
    m.occurrences = std::move(occs);
    m.pooled = refit_pooled(stats, m.occurrences, opts.templates,
                            opts.sigma2_floor);
    m.cost = -m.pooled.loglik +
             penalty(opts.criterion, m.pooled.tmpl.dim(), m.pooled.n);
    set.modes.push_back(std::move(m));
  }
  rebuild_assignment(set, values.size());
  return set;
}

// Two zero plateaus around a rising block, with a button pulse on each step
// before a switch.  Mode 0 owns the plateaus, mode 1 the block.
struct SmallFixture {
  Trace trace;
  ModeSet modes;
  SmallFixture() {
    std::vector<double> v{0, 1, 2, 3, -5, -5, -5, -5, 0, 1, 2, 2.8};
    trace.dt = 1.0;
    trace.add_signal("v", v);
    trace.add_predicate("btn", PredicateKind::Exogenous,
                        {0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0});
    SegmentationOptions opts;
    opts.sigma2_floor = 1e-4;
    modes = modeset_of({{{0, 4}, {8, 12}}, {{4, 8}}}, v, opts);
  }
};

// A long source mode with two short target blocks; the "go" pulse precedes
// both switches.  Sized so the pulse scores above the universal threshold.
struct PlantedFixture {
  Trace trace;
  ModeSet modes;
  SegmentationOptions opts;
  explicit PlantedFixture(bool second_pulse = true) {
    const std::size_t n = 1208;
    std::vector<double> v(n, 0.0);
    std::vector<std::uint8_t> go(n, 0);
    for (std::size_t k = 0; k < 4; ++k) {
      v[600 + k] = static_cast<double>(5 + k);
      v[1204 + k] = static_cast<double>(5 + k);
    }
    go[599] = 1;
    if (second_pulse) go[1203] = 1;
    trace.dt = 1.0;
    trace.add_signal("v", v);
    trace.add_predicate("go", PredicateKind::Exogenous, go);
    opts.sigma2_floor = 1e-4;
    modes = modeset_of({{{0, 600}, {604, 1204}}, {{600, 604}}, {{1204, 1208}}},
                       v, opts);
  }
};

}  // namespace

TEST_CASE("npmi endpoints and conventions") {
  CHECK(npmi(0, 3, 2, 6) == -1.0);   // never together
  CHECK(npmi(4, 4, 4, 4) == 1.0);    // the whole space
  CHECK(npmi(0, 0, 0, 5) == 0.0);    // no evidence
  CHECK(npmi(0, 0, 2, 5) == 0.0);
  CHECK(npmi(1, 2, 2, 4) == doctest::Approx(0.0));  // exact independence

  CHECK_THROWS_WITH(npmi(0, 0, 0, 0), "npmi: empty sample space");
  CHECK_THROWS_WITH(npmi(0, 6, 1, 5), "npmi: marginal exceeds sample space");
  CHECK_THROWS_WITH(npmi(2, 1, 3, 5), "npmi: joint exceeds a marginal");
}

TEST_CASE("npmi agrees with the probability oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t total = 1 + rng() % 60;
    const std::size_t cx = rng() % (total + 1);
    const std::size_t cy = rng() % (total + 1);
    const std::size_t cap = std::min(cx, cy);
    const std::size_t joint = cap == 0 ? 0 : rng() % (cap + 1);
    const double got = npmi(joint, cx, cy, total);
    const double want = oracle::npmi(joint, cx, cy, total);
    CHECK(std::fabs(got - want) <= 1e-12);
    CHECK(got >= -1.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("events sit on the last source step") {
  SmallFixture fx;
  const EventAnalysis analysis =
      extract_events(fx.modes, fx.trace, "v", GuardConfig{});

  REQUIRE(analysis.events.size() == 2);
  CHECK(analysis.events[0].source == 0);
  CHECK(analysis.events[0].target == 1);
  CHECK(analysis.events[0].step == 3);
  CHECK(analysis.events[1].source == 1);
  CHECK(analysis.events[1].target == 0);
  CHECK(analysis.events[1].step == 7);

  REQUIRE(analysis.tables.size() == 2);
  CHECK(analysis.tables[0].total == 8);
  CHECK(analysis.tables[1].total == 4);
  CHECK(analysis.tables[0].event_counts.at(1) == 1);
  CHECK(analysis.tables[1].event_counts.at(0) == 1);

  CHECK(analysis.predicate_kinds.at("btn") == PredicateKind::Exogenous);
  CHECK(analysis.predicate_kinds.at("v.at_extremum") ==
        PredicateKind::Endogenous);
}

TEST_CASE("extrema are signed and the band has width eps_ext") {
  SmallFixture fx;
  const EventAnalysis analysis =
      extract_events(fx.modes, fx.trace, "v", GuardConfig{});

  CHECK(analysis.mode_extrema[0] == 3.0);
  CHECK(analysis.mode_extrema[1] == -5.0);
  // steps 3 (3.0) and 11 (2.8) are within 0.25 of the extreme
  CHECK(analysis.tables[0].pred_counts.at("v.at_extremum") == 2);
  // every step of the constant block touches its own extreme
  CHECK(analysis.tables[1].pred_counts.at("v.at_extremum") == 4);
  CHECK(analysis.tables[0].pred_counts.at("btn") == 2);
  CHECK(analysis.tables[0].joint.at("btn").at(1) == 1);
}

TEST_CASE("the dilation window widens predicate support") {
  SmallFixture fx;
  GuardConfig config;
  config.window = 1;
  const EventAnalysis analysis =
      extract_events(fx.modes, fx.trace, "v", config);
  // btn pulses at 3 and 9 dilate to {2,3,4} and {8,9,10}; step 4 belongs to
  // mode 1.
  CHECK(analysis.tables[0].pred_counts.at("btn") == 5);
  CHECK(analysis.tables[1].pred_counts.at("btn") == 1);
}

TEST_CASE("assignment and trace lengths must agree") {
  SmallFixture fx;
  fx.modes.assignment.pop_back();
  CHECK_THROWS_AS(extract_events(fx.modes, fx.trace, "v", GuardConfig{}),
                  std::invalid_argument);
}

TEST_CASE("guard thresholds are validated") {
  PlantedFixture fx;
  const EventAnalysis analysis =
      extract_events(fx.modes, fx.trace, "v", GuardConfig{});
  GuardConfig bad;
  bad.theta_relevant = 0.0;
  CHECK_THROWS_AS(learn_guards(analysis, bad), std::invalid_argument);
  bad = GuardConfig{};
  bad.theta_relevant = 0.95;
  bad.theta_universal = 0.9;
  CHECK_THROWS_AS(learn_guards(analysis, bad), std::invalid_argument);
  bad = GuardConfig{};
  bad.theta_universal = 1.5;
  CHECK_THROWS_AS(learn_guards(analysis, bad), std::invalid_argument);
}

TEST_CASE("a pulse on every exit becomes a universal conjunct") {
  PlantedFixture fx;
  const GuardConfig config;
  const EventAnalysis analysis =
      extract_events(fx.modes, fx.trace, "v", config);
  const GuardMap guards = learn_guards(analysis, config);

  REQUIRE(guards.count({0, 1}) == 1);
  REQUIRE(guards.count({0, 2}) == 1);
  const Guard& g01 = guards.at({0, 1});
  REQUIRE(g01.conjuncts.count("go") == 1);
  // one pulse out of two matches this target over 1200 source steps
  const double expect = oracle::npmi(1, 2, 1, 1200);
  CHECK(g01.conjuncts.at("go").score == doctest::Approx(expect));
  CHECK(expect >= config.theta_universal);
  CHECK(g01.events == 1);
  CHECK(g01.has_conjuncts());
  CHECK_FALSE(g01.unexplained());
}

TEST_CASE("a qualifying external cause discards derived candidates") {
  SmallFixture fx;
  // btn fires on the only exit of the constant block: a perfect conjunct.
  // The block's extremum predicate holds on every step, scores zero, and
  // must not appear.
  const EventAnalysis analysis =
      extract_events(fx.modes, fx.trace, "v", GuardConfig{});
  const GuardMap guards = learn_guards(analysis, GuardConfig{});

  // mode 0 exits at step 3 with btn on: npmi(1, 2, 1, 8) = 2/3, a disjunct;
  // the extremum candidate npmi(1, 2, 1, 8) ties it but is endogenous and
  // gets dropped.
  const Guard& g01 = guards.at({0, 1});
  CHECK(g01.conjuncts.empty());
  REQUIRE(g01.disjuncts.count("btn") == 1);
  CHECK(g01.disjuncts.at("btn").score == doctest::Approx(2.0 / 3.0));
  CHECK(g01.disjuncts.count("v.at_extremum") == 0);

  // mode 1 exits without btn: the endogenous candidates survive.
  const Guard& g10 = guards.at({1, 0});
  CHECK(g10.conjuncts.count("v.at_extremum") == 0);  // scores 0, always true
  CHECK(g10.disjuncts.count("btn") == 0);            // joint 0 scores -1
}

TEST_CASE("derived conjuncts survive when nothing external qualifies") {
  // Signal peaks once right before the only exit; no exogenous predicate.
  std::vector<double> v{0, 1, 2, 9, 4, 4, 4, 4};
  Trace t;
  t.dt = 1.0;
  t.add_signal("v", v);
  SegmentationOptions opts;
  opts.sigma2_floor = 1e-4;
  const ModeSet modes = modeset_of({{{0, 4}}, {{4, 8}}}, v, opts);
  const GuardMap guards =
      learn_guards(extract_events(modes, t, "v", GuardConfig{}), GuardConfig{});
  const Guard& g01 = guards.at({0, 1});
  REQUIRE(g01.conjuncts.count("v.at_extremum") == 1);
  CHECK(g01.conjuncts.at("v.at_extremum").score == 1.0);
  CHECK(g01.conjuncts.at("v.at_extremum").kind == PredicateKind::Endogenous);
}

TEST_CASE("duplicate conjunct sets merge their targets") {
  PlantedFixture fx;
  const GuardConfig config;
  EventAnalysis analysis = extract_events(fx.modes, fx.trace, "v", config);
  GuardMap guards = learn_guards(analysis, config);
  REQUIRE(guards.at({0, 1}).has_conjuncts());
  REQUIRE(guards.at({0, 2}).has_conjuncts());

  resolve_nondeterminism(fx.modes, guards, analysis, fx.trace, "v", fx.opts,
                         config);

  REQUIRE(fx.modes.modes.size() == 2);
  CHECK(fx.modes.modes[1].occurrences ==
        std::vector<Occurrence>{{600, 604}, {1204, 1208}});
  REQUIRE(guards.count({0, 1}) == 1);
  CHECK(guards.count({0, 2}) == 0);
  const Guard& merged = guards.at({0, 1});
  CHECK(merged.events == 2);
  // both pulses now hit the one remaining target
  REQUIRE(merged.conjuncts.count("go") == 1);
  CHECK(merged.conjuncts.at("go").score == 1.0);
  for (std::size_t k = 1204; k < 1208; ++k)
    CHECK(fx.modes.assignment[k] == 1);
}

TEST_CASE("an unexplained sibling does not trigger a merge") {
  PlantedFixture fx(/*second_pulse=*/false);
  const GuardConfig config;
  EventAnalysis analysis = extract_events(fx.modes, fx.trace, "v", config);
  GuardMap guards = learn_guards(analysis, config);
  REQUIRE(guards.at({0, 1}).has_conjuncts());
  REQUIRE(guards.at({0, 2}).unexplained());

  const ModeSet before = fx.modes;
  resolve_nondeterminism(fx.modes, guards, analysis, fx.trace, "v", fx.opts,
                         config);
  CHECK(fx.modes.modes.size() == 3);
  CHECK(fx.modes.assignment == before.assignment);
  CHECK(guards.count({0, 2}) == 1);
}

TEST_CASE("a contained conjunct set also counts as a duplicate") {
  PlantedFixture fx;
  // an extra pulse on the first exit only: conjuncts {go, extra} vs {go}
  std::vector<std::uint8_t> extra(fx.trace.length(), 0);
  extra[599] = 1;
  fx.trace.add_predicate("extra", PredicateKind::Exogenous, extra);

  const GuardConfig config;
  EventAnalysis analysis = extract_events(fx.modes, fx.trace, "v", config);
  GuardMap guards = learn_guards(analysis, config);
  REQUIRE(guards.at({0, 1}).conjuncts.count("extra") == 1);
  REQUIRE(guards.at({0, 1}).conjuncts.count("go") == 1);
  REQUIRE(guards.at({0, 2}).conjuncts.count("go") == 1);
  REQUIRE(guards.at({0, 2}).conjuncts.count("extra") == 0);

  resolve_nondeterminism(fx.modes, guards, analysis, fx.trace, "v", fx.opts,
                         config);
  CHECK(fx.modes.modes.size() == 2);
  CHECK(guards.at({0, 1}).events == 2);
}
