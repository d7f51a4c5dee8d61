#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charda/segmentation.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"

using namespace charda;

namespace {

Trace trace_of(std::vector<double> v, double dt = 1.0) {
  Trace t;
  t.dt = dt;
  t.add_signal("x", std::move(v));
  return t;
}

// flat(8) ramp(8) flat(8) ramp(8) flat(8): every flat block is zeros, every
// ramp block climbs 0.5 per step from 0.5.
std::vector<double> comb_signal() {
  std::vector<double> v;
  for (int block = 0; block < 5; ++block)
    for (int k = 0; k < 8; ++k)
      v.push_back(block % 2 == 0 ? 0.0 : 0.5 * (k + 1));
  return v;
}

SegmentationOptions tight_options() {
  SegmentationOptions opts;
  opts.sigma2_floor = 1e-4;
  return opts;
}

}  // namespace

TEST_CASE("noiseless boundaries are recovered exactly") {
  const Trace t = trace_of(comb_signal());
  const Segmentation seg = optimal_segmentation(t, "x", tight_options());

  REQUIRE(seg.segments.size() == 5);
  CHECK(seg.switchpoints() ==
        std::vector<std::size_t>{8, 16, 24, 32});
  for (std::size_t s = 0; s < 5; ++s) {
    const Segment& piece = seg.segments[s];
    CHECK(piece.model.rss == doctest::Approx(0.0).epsilon(1e-12));
    if (s % 2 == 0) {
      CHECK(piece.model.tmpl.kind == TemplateKind::Constant);
      CHECK(piece.model.coef[0] == doctest::Approx(0.0));
    } else {
      CHECK(piece.model.tmpl.kind == TemplateKind::Linear);
      CHECK(piece.model.coef[1] == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
}

TEST_CASE("segments are contiguous and costs add up") {
  const Trace t = trace_of(comb_signal());
  const SegmentationOptions opts = tight_options();
  const Segmentation seg = optimal_segmentation(t, "x", opts);

  double sum = 0;
  std::size_t expect_start = 0;
  for (const Segment& s : seg.segments) {
    CHECK(s.start == expect_start);
    CHECK(s.end - s.start >= opts.min_segment);
    expect_start = s.end;
    sum += s.cost;
    const auto [cost, model] =
        segment_cost(SufficientStats(t.signal("x")), s.start, s.end,
                     s.model.tmpl, opts.criterion, opts.sigma2_floor);
    CHECK(s.cost == doctest::Approx(cost).epsilon(1e-12));
  }
  CHECK(expect_start == t.length());
  CHECK(seg.total_cost == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("a flat signal stays one constant segment") {
  const Trace t = trace_of(std::vector<double>(40, 2.5));
  const Segmentation seg = optimal_segmentation(t, "x", tight_options());
  REQUIRE(seg.segments.size() == 1);
  CHECK(seg.segments[0].model.tmpl.kind == TemplateKind::Constant);
  CHECK(seg.segments[0].model.coef[0] == doctest::Approx(2.5));
}

TEST_CASE("template cost ties keep the earlier template") {
  // Two copies of the same template produce bitwise-equal interval costs, so
  // the winner is decided purely by the tie rule.
  SegmentationOptions opts = tight_options();
  opts.templates = {template_by_id("linear"), template_by_id("linear")};
  std::vector<double> v;
  for (int k = 0; k < 12; ++k) v.push_back(0.3 * k);
  const Segmentation seg = optimal_segmentation(trace_of(v), "x", opts);
  for (const Segment& s : seg.segments) CHECK(s.model.template_index == 0);
}

TEST_CASE("stride restricts interior boundaries") {
  std::vector<double> v;
  for (int k = 0; k < 36; ++k) v.push_back(k < 13 ? 1.0 : 6.0);
  const Trace t = trace_of(v);

  SegmentationOptions exact = tight_options();
  const Segmentation fine = optimal_segmentation(t, "x", exact);
  REQUIRE(fine.switchpoints() == std::vector<std::size_t>{13});

  SegmentationOptions coarse = exact;
  coarse.stride = 5;
  const Segmentation rough = optimal_segmentation(t, "x", coarse);
  for (std::size_t p : rough.switchpoints()) CHECK(p % 5 == 0);
  // a restricted boundary set cannot beat the exact optimum
  CHECK(rough.total_cost >= fine.total_cost - 1e-9);
}

TEST_CASE("dp matches exhaustive enumeration on random traces") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::uniform_int_distribution<int> len(6, 18);
  std::uniform_real_distribution<double> level(-3.0, 3.0);

  for (int trial = 0; trial < 30; ++trial) {
    const int n = len(rng);
    std::vector<double> v;
    double value = level(rng), slope = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k % 5 == 0) {
        value = level(rng);
        slope = (rng() % 3 == 0) ? level(rng) / 4.0 : 0.0;
      }
      v.push_back(value + slope * (k % 5) + noise(rng));
    }

    for (const auto crit : {PenaltyCriterion::Bic, PenaltyCriterion::Mdl}) {
      SegmentationOptions opts;
      opts.criterion = crit;
      opts.sigma2_floor = trial % 2 == 0 ? 1e-4 : 0.01;
      const Segmentation seg = optimal_segmentation(trace_of(v), "x", opts);
      const double ref = oracle::best_segmentation_cost(
          v, opts.min_segment, crit == PenaltyCriterion::Mdl,
          opts.sigma2_floor);
      CHECK(seg.total_cost == doctest::Approx(ref).epsilon(1e-9));
      for (const Segment& s : seg.segments)
        CHECK(s.end - s.start >= opts.min_segment);
    }
  }
}

TEST_CASE("bad inputs are rejected") {
  const Trace two = trace_of({1.0, 2.0});
  SegmentationOptions opts;
  CHECK_THROWS_WITH(optimal_segmentation(two, "x", opts),
                    "trace too short (2 points, min segment 3)");

  const Trace t = trace_of(comb_signal());
  opts.min_segment = 1;
  CHECK_THROWS_AS(optimal_segmentation(t, "x", opts), std::invalid_argument);
  opts = SegmentationOptions{};
  opts.stride = 0;
  CHECK_THROWS_AS(optimal_segmentation(t, "x", opts), std::invalid_argument);
  opts = SegmentationOptions{};
  opts.sigma2_floor = 0.0;
  CHECK_THROWS_AS(optimal_segmentation(t, "x", opts), std::invalid_argument);
  opts = SegmentationOptions{};
  opts.templates.clear();
  CHECK_THROWS_AS(optimal_segmentation(t, "x", opts), std::invalid_argument);

  // a linear-only template set needs three points per segment
  opts = SegmentationOptions{};
  opts.templates = {template_by_id("linear")};
  opts.min_segment = 2;
  CHECK_THROWS_WITH(
      optimal_segmentation(trace_of({0.0, 1.0}), "x", opts),
      "no feasible segmentation (stride or min segment too coarse)");
}

TEST_CASE("merging pools repeated structure into modes") {
  const Trace t = trace_of(comb_signal());
  const SegmentationOptions opts = tight_options();
  const Segmentation seg = optimal_segmentation(t, "x", opts);
  const ModeSet set = merge_modes(seg, t, "x", opts);

  REQUIRE(set.modes.size() == 2);
  const Mode* flat = &set.modes[0];
  const Mode* ramp = &set.modes[1];
  if (flat->pooled.tmpl.kind != TemplateKind::Constant) std::swap(flat, ramp);
  CHECK(flat->pooled.tmpl.kind == TemplateKind::Constant);
  CHECK(flat->occurrences ==
        std::vector<Occurrence>{{0, 8}, {16, 24}, {32, 40}});
  CHECK(flat->steps() == 24);
  CHECK(flat->pooled.n == 24);
  CHECK(ramp->pooled.tmpl.kind == TemplateKind::Linear);
  CHECK(ramp->occurrences == std::vector<Occurrence>{{8, 16}, {24, 32}});
  CHECK(ramp->pooled.coef[1] == doctest::Approx(0.5).epsilon(1e-9));

  REQUIRE(set.assignment.size() == t.length());
  for (std::size_t k = 0; k < t.length(); ++k) {
    const bool in_flat = (k / 8) % 2 == 0;
    CHECK(set.assignment[k] ==
          (in_flat ? flat - set.modes.data() : ramp - set.modes.data()));
  }
}

TEST_CASE("merge rounds never increase the objective and stop at a fixpoint") {
  const Trace t = trace_of(comb_signal());
  const SegmentationOptions opts = tight_options();
  const Segmentation seg = optimal_segmentation(t, "x", opts);
  const SufficientStats stats(t.signal("x"));

  ModeSet set;
  for (const Segment& s : seg.segments) {
    Mode m;
    m.occurrences = {{s.start, s.end}};
    m.pooled = s.model;
    m.cost = s.cost;
    set.modes.push_back(std::move(m));
  }

  double objective = set.objective();
  while (merge_round(set, stats, opts)) {
    const double next = set.objective();
    CHECK(next <= objective + 1e-9);
    objective = next;
  }
  CHECK_FALSE(merge_round(set, stats, opts));  // fixpoint is stable
  CHECK(set.modes.size() == 2);

  rebuild_assignment(set, t.length());
  const ModeSet direct = merge_modes(seg, t, "x", opts);
  CHECK(set.assignment == direct.assignment);
}

TEST_CASE("equal merge gains keep the lowest pair") {
  // Three bitwise-identical flat modes and two ramps of opposite slope; the
  // flat pair gains are exactly equal, so (0, 1) must merge first.
  std::vector<double> v;
  for (int block = 0; block < 5; ++block)
    for (int k = 0; k < 8; ++k) {
      const double slope = block == 1 ? 0.5 : -0.5;
      v.push_back(block % 2 == 0 ? 0.0 : slope * (k + 1));
    }
  const SufficientStats stats(v);
  const SegmentationOptions opts = tight_options();

  ModeSet set;
  for (int block : {0, 2, 4, 1, 3}) {
    Mode m;
    m.occurrences = {{static_cast<std::size_t>(block) * 8,
                      static_cast<std::size_t>(block) * 8 + 8}};
    m.pooled = refit_pooled(stats, m.occurrences, opts.templates,
                            opts.sigma2_floor);
    m.cost = -m.pooled.loglik +
             penalty(opts.criterion, m.pooled.tmpl.dim(), m.pooled.n);
    set.modes.push_back(std::move(m));
  }

  REQUIRE(merge_round(set, stats, opts));
  REQUIRE(set.modes.size() == 4);
  CHECK(set.modes[0].occurrences ==
        std::vector<Occurrence>{{0, 8}, {16, 24}});
}

TEST_CASE("pooled refit breaks likelihood ties toward the earlier template") {
  // All-zero occurrences fit both templates with zero residual; the floored
  // likelihoods tie and the constant template must win.
  const std::vector<double> v(24, 0.0);
  const SufficientStats stats(v);
  const FittedModel m = refit_pooled(stats, {{0, 8}, {16, 24}},
                                     default_templates(), 1e-4);
  CHECK(m.tmpl.kind == TemplateKind::Constant);
  CHECK(m.n == 16);
  CHECK(m.rss == doctest::Approx(0.0));

  CHECK_THROWS_AS(refit_pooled(stats, {{0, 1}}, default_templates(), 1e-4),
                  std::invalid_argument);
}

TEST_CASE("pooled stats equal the sum of rebased interval sums") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> v(30);
  for (auto& x : v) x = noise(rng);
  const SufficientStats stats(v);

  const std::vector<Occurrence> occs{{2, 9}, {14, 20}, {25, 30}};
  const IntervalStats pooled = pooled_stats(stats, occs);
  double n = 0, s1 = 0, sk = 0, skk = 0, skv = 0, svv = 0;
  for (const auto& o : occs)
    for (std::size_t t = o.start; t < o.end; ++t) {
      const double rel = static_cast<double>(t - o.start);
      n += 1; s1 += v[t]; sk += rel; skk += rel * rel; skv += rel * v[t];
      svv += v[t] * v[t];
    }
  CHECK(pooled.n == doctest::Approx(n));
  CHECK(pooled.s1 == doctest::Approx(s1).epsilon(1e-9));
  CHECK(pooled.sk == doctest::Approx(sk).epsilon(1e-9));
  CHECK(pooled.skk == doctest::Approx(skk).epsilon(1e-9));
  CHECK(pooled.skv == doctest::Approx(skv).epsilon(1e-9));
  CHECK(pooled.svv == doctest::Approx(svv).epsilon(1e-9));
}
