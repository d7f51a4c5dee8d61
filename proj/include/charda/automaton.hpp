#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "charda/guards.hpp"
#include "charda/models.hpp"
#include "charda/segmentation.hpp"
#include "charda/trace.hpp"

namespace charda {

inline constexpr const char* kAutomatonFormat = "charda-ha/1";

enum class FlowKind { Linear, ConstSet };
enum class UpdateKind { None, Reset, ClampMax, FracAbove };
enum class ConditionOp { Le, Ge, AbsBand };

// Threshold condition on a named signal, used by hand-written ground-truth
// automata.  Learned guards never carry these.
// Le: x <= lo.  Ge: x >= lo.  AbsBand: lo <= |x| < hi.
struct StateCondition {
  std::string signal;
  ConditionOp op = ConditionOp::Le;
  double lo = 0, hi = 0;
  bool operator==(const StateCondition&) const = default;
};

struct HaMode {
  std::string name;
  FlowKind flow_kind = FlowKind::Linear;
  double flow = 0;  // per-time acceleration (Linear) or held value (ConstSet)
  Interval95 flow_ci;
  UpdateKind update = UpdateKind::None;
  double update_value = 0;
  Interval95 update_ci;
  std::optional<double> extremum;  // signed extreme seen during learning
  bool operator==(const HaMode&) const = default;
};

struct HaTransition {
  std::string source, target;
  Guard guard;
  std::vector<StateCondition> conditions;
  int priority = 0;  // higher wins among simultaneous firings
  bool operator==(const HaTransition&) const = default;
};

struct HybridAutomaton {
  std::string signal;  // the continuous variable the flows describe
  std::string initial;
  std::vector<HaMode> modes;
  std::vector<HaTransition> transitions;

  const HaMode& mode(const std::string& name) const;
  bool operator==(const HybridAutomaton&) const = default;
};

// Builds the automaton from merged modes and learned guards.  Flows come from
// pooled slopes over dt; a mode's entry is a reset exactly when its pooled
// intercept interval excludes the mean incoming terminal velocity.
HybridAutomaton assemble(const ModeSet& modes, const GuardMap& guards,
                         const EventAnalysis& analysis, const Trace& trace,
                         const std::string& signal);

struct SimulationResult {
  Trace trace;  // simulated signal plus a copy of the input predicates
  std::vector<std::string> mode_labels;
};

// Steps the automaton against recorded input streams.  Transitions are
// decided one step ahead: predicates and state at step t-1 select the mode
// of step t.  Guard conjuncts must all hold, edge-triggered; interval
// midpoints stand in for flows and resets; a transition with neither
// conjuncts nor threshold conditions cannot fire.  Simultaneous firings that
// share the highest priority are an error.
SimulationResult simulate(const HybridAutomaton& ha, const Trace& inputs,
                          double initial_value,
                          const GuardConfig& config = {});

// Misattributed-step fraction under the best injective matching of predicted
// labels onto truth labels; predicted labels left unmatched count all their
// steps as errors.
struct AttributionResult {
  double error = 0;
  std::map<std::string, std::string> mapping;  // predicted -> truth
};
AttributionResult attribution(const std::vector<std::string>& predicted,
                              const std::vector<std::string>& truth);
double attribution_error(const std::vector<std::string>& predicted,
                         const std::vector<std::string>& truth);

double mean_absolute_error(const std::vector<double>& a,
                           const std::vector<double>& b);

// Graphviz rendering of the mode graph.
std::string export_dot(const HybridAutomaton& ha);

// Versioned structured form; round-trips exactly.
nlohmann::json automaton_to_json(const HybridAutomaton& ha);
HybridAutomaton automaton_from_json(const nlohmann::json& j);
void save_automaton_file(const HybridAutomaton& ha, const std::string& path);
HybridAutomaton load_automaton_file(const std::string& path);

}  // namespace charda
