#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "charda/segmentation.hpp"
#include "charda/trace.hpp"

namespace charda {

struct GuardConfig {
  double theta_universal = 0.9;  // conjunct threshold
  double theta_relevant = 0.4;   // disjunct threshold
  int window = 0;                // predicate dilation, +/- steps
  double eps_ext = 0.25;         // half-width of the extremum predicate
  double eps_sign = 1e-6;
};

// Normalized pointwise mutual information from co-occurrence counts over a
// shared sample space.  -1 never together, 0 independent, +1 always together.
// Degenerate cases: an empty marginal scores 0 (no evidence), a joint equal
// to the whole space scores 1.
double npmi(std::size_t count_joint, std::size_t count_x, std::size_t count_y,
            std::size_t total);

struct TransitionEvent {
  int source = -1, target = -1;
  std::size_t step = 0;  // last step of the source occurrence
};

// Co-occurrence counts for one source mode.  The sample space is the steps
// where that mode is active; events sit on the last step before each switch.
struct SourceTable {
  std::size_t total = 0;
  std::map<std::string, std::size_t> pred_counts;
  std::map<int, std::size_t> event_counts;                  // by target mode
  std::map<std::string, std::map<int, std::size_t>> joint;  // pred -> target
};

struct EventAnalysis {
  std::vector<TransitionEvent> events;
  std::vector<SourceTable> tables;   // indexed by mode
  std::vector<double> mode_extrema;  // signed extreme of the signal per mode
  std::map<std::string, PredicateKind> predicate_kinds;
};

// Builds events and per-source count tables.  Trace predicates are dilated by
// the window first; a per-mode "<signal>.at_extremum" predicate (signal value
// within eps_ext of the mode's signed extreme) joins the candidate set.
EventAnalysis extract_events(const ModeSet& modes, const Trace& trace,
                             const std::string& signal,
                             const GuardConfig& config);

struct PredicateScore {
  double score = 0;
  PredicateKind kind = PredicateKind::Exogenous;
  std::size_t count_joint = 0, count_pred = 0;
  bool operator==(const PredicateScore&) const = default;
};

struct Guard {
  std::map<std::string, PredicateScore> conjuncts;  // score >= theta_universal
  std::map<std::string, PredicateScore> disjuncts;  // in [theta_relevant, ..)
  std::size_t events = 0;
  bool has_conjuncts() const { return !conjuncts.empty(); }
  bool unexplained() const { return conjuncts.empty() && disjuncts.empty(); }
  bool operator==(const Guard&) const = default;
};

using TransitionKey = std::pair<int, int>;  // (source, target)
using GuardMap = std::map<TransitionKey, Guard>;

// Scores every candidate predicate per observed transition.  When any
// exogenous predicate qualifies at either level, all endogenous candidates
// for that transition are discarded: an external cause explains the switch
// and derived features merely restate it.
GuardMap learn_guards(const EventAnalysis& analysis, const GuardConfig& config);

// While some mode has two explained out-transitions whose conjunct sets are
// equal or one contains the other, merge the two target modes (pooled refit,
// union of occurrences) and relearn the affected guards.  Transitions with no
// conjuncts stay out of the check: an unexplained edge would otherwise subsume
// every explained sibling.  Terminates in at most K-1 merges.
void resolve_nondeterminism(ModeSet& modes, GuardMap& guards,
                            EventAnalysis& analysis, const Trace& trace,
                            const std::string& signal,
                            const SegmentationOptions& seg_opts,
                            const GuardConfig& guard_config);

}  // namespace charda
