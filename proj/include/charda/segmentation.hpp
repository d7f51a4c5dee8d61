#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "charda/models.hpp"
#include "charda/trace.hpp"

namespace charda {

struct Segment {
  std::size_t start = 0, end = 0;  // [start, end)
  FittedModel model;
  double cost = 0;  // -loglik + penalty
};

struct Segmentation {
  std::vector<Segment> segments;  // contiguous, covering [0, n)
  double total_cost = 0;
  std::vector<std::size_t> switchpoints() const;  // interior boundaries
};

struct SegmentationOptions {
  std::vector<ModelTemplate> templates = default_templates();
  PenaltyCriterion criterion = PenaltyCriterion::Mdl;
  std::size_t min_segment = 3;
  double sigma2_floor = kDefaultSigma2Floor;
  std::size_t stride = 1;  // switchpoint granularity; 1 is exact
};

// Penalized-likelihood-optimal segmentation of one signal.  Cost ties break
// toward fewer segments, then the earlier template, then the later boundary.
Segmentation optimal_segmentation(const Trace& trace, const std::string& signal,
                                  const SegmentationOptions& opts);

struct Occurrence {
  std::size_t start = 0, end = 0;
  bool operator==(const Occurrence&) const = default;
};

struct Mode {
  std::vector<Occurrence> occurrences;  // disjoint, ascending
  FittedModel pooled;                   // refit over all occurrences
  double cost = 0;                      // -loglik + penalty at pooled size
  std::size_t steps() const;
};

struct ModeSet {
  std::vector<Mode> modes;
  std::vector<int> assignment;  // per step, index into modes
  double objective() const;     // sum of per-mode costs
};

// Bottom-up greedy merging: one mode per segment initially; each round merges
// the pair whose pooled refit most improves the penalized likelihood, until
// no pair improves it.
ModeSet merge_modes(const Segmentation& seg, const Trace& trace,
                    const std::string& signal, const SegmentationOptions& opts);

// One best-improvement round over an existing mode set; false when no pair
// improves the objective.  Ties keep the lowest (a, b) pair.
bool merge_round(ModeSet& set, const SufficientStats& stats,
                 const SegmentationOptions& opts);

// Recomputes the per-step assignment from the occurrence lists.
void rebuild_assignment(ModeSet& set, std::size_t n);

// Pooled refit of a set of occurrences: per-occurrence relative index, best
// template by likelihood alone (ties to the earlier template).
FittedModel refit_pooled(const SufficientStats& stats,
                         const std::vector<Occurrence>& occurrences,
                         const std::vector<ModelTemplate>& templates,
                         double sigma2_floor);

IntervalStats pooled_stats(const SufficientStats& stats,
                           const std::vector<Occurrence>& occurrences);

}  // namespace charda
