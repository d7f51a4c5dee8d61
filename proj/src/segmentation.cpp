#include "charda/segmentation.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace charda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_options(const SegmentationOptions& opts) {
  if (opts.templates.empty())
    throw std::invalid_argument("template set must not be empty");
  if (opts.min_segment < 2)
    throw std::invalid_argument("min segment length must be >= 2");
  if (opts.stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (!(opts.sigma2_floor > 0.0))
    throw std::invalid_argument("sigma2 floor must be positive");
}

}  // namespace

std::vector<std::size_t> Segmentation::switchpoints() const {
  std::vector<std::size_t> pts;
  for (std::size_t s = 1; s < segments.size(); ++s)
    pts.push_back(segments[s].start);
  return pts;
}

Segmentation optimal_segmentation(const Trace& trace, const std::string& signal,
                                  const SegmentationOptions& opts) {
  validate_options(opts);
  const auto& values = trace.signal(signal);
  const std::size_t n = values.size();
  if (n < opts.min_segment)
    throw std::invalid_argument("trace too short (" + std::to_string(n) +
                                " points, min segment " +
                                std::to_string(opts.min_segment) + ")");
  SufficientStats stats(values);

  // Candidate boundaries: multiples of the stride, plus both ends.
  std::vector<std::size_t> allowed;
  for (std::size_t p = 0; p < n; p += opts.stride) allowed.push_back(p);
  if (allowed.back() != n) allowed.push_back(n);

  struct Cell {
    double cost = kInf;
    std::size_t segs = 0;
    std::size_t prev = 0;
    int tmpl = -1;
  };
  std::vector<Cell> table(n + 1);
  table[0].cost = 0.0;

  for (std::size_t jx = 1; jx < allowed.size(); ++jx) {
    const std::size_t j = allowed[jx];
    Cell& cell = table[j];
    for (std::size_t ix = 0; ix < jx; ++ix) {
      const std::size_t i = allowed[ix];
      if (j - i < opts.min_segment) continue;
      if (table[i].cost == kInf) continue;
      for (std::size_t m = 0; m < opts.templates.size(); ++m) {
        const ModelTemplate& tmpl = opts.templates[m];
        if (j - i < static_cast<std::size_t>(tmpl.basis_size()) + 1) continue;
        const double cost =
            table[i].cost +
            segment_cost(stats, i, j, tmpl, opts.criterion, opts.sigma2_floor)
                .first;
        const std::size_t segs = table[i].segs + 1;
        bool better = false;
        if (cost < cell.cost) {
          better = true;
        } else if (cost == cell.cost) {
          // Ties: fewer segments, then earlier template, then later boundary.
          if (segs != cell.segs)
            better = segs < cell.segs;
          else if (static_cast<int>(m) != cell.tmpl)
            better = static_cast<int>(m) < cell.tmpl;
          else
            better = i > cell.prev;
        }
        if (better) {
          cell.cost = cost;
          cell.segs = segs;
          cell.prev = i;
          cell.tmpl = static_cast<int>(m);
        }
      }
    }
  }

  if (table[n].cost == kInf)
    throw std::invalid_argument(
        "no feasible segmentation (stride or min segment too coarse)");

  Segmentation seg;
  seg.total_cost = table[n].cost;
  std::size_t j = n;
  while (j > 0) {
    const Cell& cell = table[j];
    Segment s;
    s.start = cell.prev;
    s.end = j;
    auto [cost, model] =
        segment_cost(stats, s.start, s.end, opts.templates[cell.tmpl],
                     opts.criterion, opts.sigma2_floor);
    s.cost = cost;
    s.model = model;
    s.model.template_index = cell.tmpl;
    seg.segments.push_back(s);
    j = cell.prev;
  }
  std::reverse(seg.segments.begin(), seg.segments.end());
  return seg;
}

std::size_t Mode::steps() const {
  std::size_t total = 0;
  for (const auto& o : occurrences) total += o.end - o.start;
  return total;
}

double ModeSet::objective() const {
  double total = 0;
  for (const auto& m : modes) total += m.cost;
  return total;
}

IntervalStats pooled_stats(const SufficientStats& stats,
                           const std::vector<Occurrence>& occurrences) {
  IntervalStats pooled;
  for (const auto& o : occurrences) pooled += stats.interval(o.start, o.end);
  return pooled;
}

FittedModel refit_pooled(const SufficientStats& stats,
                         const std::vector<Occurrence>& occurrences,
                         const std::vector<ModelTemplate>& templates,
                         double sigma2_floor) {
  const IntervalStats pooled = pooled_stats(stats, occurrences);
  FittedModel best;
  bool have = false;
  for (std::size_t m = 0; m < templates.size(); ++m) {
    if (pooled.n < templates[m].basis_size() + 1) continue;
    FittedModel cand = fit(templates[m], pooled, sigma2_floor);
    cand.template_index = static_cast<int>(m);
    // Template re-selection is by likelihood alone; ties keep the earlier one.
    if (!have || cand.loglik > best.loglik) {
      best = cand;
      have = true;
    }
  }
  if (!have)
    throw std::invalid_argument("no feasible template for pooled occurrences");
  return best;
}

namespace {

double mode_cost(const FittedModel& pooled, PenaltyCriterion criterion) {
  return -pooled.loglik + penalty(criterion, pooled.tmpl.dim(), pooled.n);
}

std::vector<Occurrence> merge_occurrences(const std::vector<Occurrence>& a,
                                          const std::vector<Occurrence>& b) {
  std::vector<Occurrence> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
             [](const Occurrence& x, const Occurrence& y) {
               return x.start < y.start;
             });
  return out;
}

}  // namespace

// One merge per round, best improvement first; ties keep the lowest pair.
bool merge_round(ModeSet& set, const SufficientStats& stats,
                 const SegmentationOptions& opts) {
  if (set.modes.size() < 2) return false;
  double best_gain = 0.0;
  std::size_t best_a = 0, best_b = 0;
  FittedModel best_model;
  for (std::size_t a = 0; a + 1 < set.modes.size(); ++a) {
    for (std::size_t b = a + 1; b < set.modes.size(); ++b) {
      auto occs =
          merge_occurrences(set.modes[a].occurrences, set.modes[b].occurrences);
      FittedModel merged =
          refit_pooled(stats, occs, opts.templates, opts.sigma2_floor);
      const double gain = set.modes[a].cost + set.modes[b].cost -
                          mode_cost(merged, opts.criterion);
      if (gain > best_gain) {
        best_gain = gain;
        best_a = a;
        best_b = b;
        best_model = merged;
      }
    }
  }
  if (best_gain <= 0.0) return false;
  Mode& target = set.modes[best_a];
  target.occurrences =
      merge_occurrences(target.occurrences, set.modes[best_b].occurrences);
  target.pooled = best_model;
  target.cost = mode_cost(best_model, opts.criterion);
  set.modes.erase(set.modes.begin() + static_cast<std::ptrdiff_t>(best_b));
  return true;
}

void rebuild_assignment(ModeSet& set, std::size_t n) {
  set.assignment.assign(n, -1);
  for (std::size_t m = 0; m < set.modes.size(); ++m)
    for (const auto& o : set.modes[m].occurrences)
      for (std::size_t t = o.start; t < o.end; ++t)
        set.assignment[t] = static_cast<int>(m);
}

ModeSet merge_modes(const Segmentation& seg, const Trace& trace,
                    const std::string& signal, const SegmentationOptions& opts) {
  validate_options(opts);
  const auto& values = trace.signal(signal);
  SufficientStats stats(values);

  ModeSet set;
  for (const auto& s : seg.segments) {
    Mode m;
    m.occurrences = {{s.start, s.end}};
    m.pooled = s.model;
    m.cost = s.cost;
    set.modes.push_back(std::move(m));
  }

  while (merge_round(set, stats, opts)) {
  }

  rebuild_assignment(set, trace.length());
  return set;
}

}  // namespace charda
