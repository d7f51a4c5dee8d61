#include "charda/automaton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace charda {

const HaMode& HybridAutomaton::mode(const std::string& name) const {
  for (const auto& m : modes)
    if (m.name == name) return m;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

HybridAutomaton assemble(const ModeSet& modes, const GuardMap& guards,
                         const EventAnalysis& analysis, const Trace& trace,
                         const std::string& signal) {
  if (modes.modes.empty()) throw std::invalid_argument("empty mode set");
  const auto& values = trace.signal(signal);
  SufficientStats stats(values);

  HybridAutomaton ha;
  ha.signal = signal;

  for (std::size_t m = 0; m < modes.modes.size(); ++m) {
    const Mode& mode = modes.modes[m];
    const IntervalStats pooled = pooled_stats(stats, mode.occurrences);

    HaMode out;
    out.name = "m" + std::to_string(m);
    out.flow_kind = FlowKind::Linear;
    if (mode.pooled.tmpl.kind == TemplateKind::Linear) {
      const Interval95 ci = slope_ci(mode.pooled, pooled);
      out.flow = mode.pooled.coef[1] / trace.dt;
      out.flow_ci = {ci.lo / trace.dt, ci.hi / trace.dt};
    } else {
      out.flow = 0.0;
      out.flow_ci = {0.0, 0.0};
    }

    // Mean terminal velocity over transitions entering this mode; when the
    // pooled intercept interval excludes it, entry is a genuine reset.
    double incoming_sum = 0.0;
    std::size_t incoming_n = 0;
    for (const auto& ev : analysis.events)
      if (ev.target == static_cast<int>(m)) {
        incoming_sum += values[ev.step];
        ++incoming_n;
      }
    const Interval95 entry_ci = intercept_ci(mode.pooled, pooled);
    if (incoming_n > 0 &&
        !entry_ci.contains(incoming_sum / static_cast<double>(incoming_n))) {
      out.update = UpdateKind::Reset;
      out.update_value = mode.pooled.coef[0];
      out.update_ci = entry_ci;
    } else {
      out.update = UpdateKind::None;
      out.update_value = 0.0;
      out.update_ci = {0.0, 0.0};
    }
    if (m < analysis.mode_extrema.size())
      out.extremum = analysis.mode_extrema[m];
    ha.modes.push_back(std::move(out));
  }

  for (const auto& [key, guard] : guards) {
    HaTransition tr;
    tr.source = "m" + std::to_string(key.first);
    tr.target = "m" + std::to_string(key.second);
    tr.guard = guard;
    ha.transitions.push_back(std::move(tr));
  }

  if (!modes.assignment.empty() && modes.assignment.front() >= 0)
    ha.initial = "m" + std::to_string(modes.assignment.front());
  else
    ha.initial = ha.modes.front().name;
  return ha;
}

namespace {

std::vector<std::uint8_t> dilate_stream(const std::vector<std::uint8_t>& values,
                                        int window) {
  if (window <= 0) return values;
  const std::size_t n = values.size();
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    if (!values[t]) continue;
    const std::size_t lo =
        t >= static_cast<std::size_t>(window) ? t - window : 0;
    const std::size_t hi = std::min(n - 1, t + static_cast<std::size_t>(window));
    for (std::size_t u = lo; u <= hi; ++u) out[u] = 1;
  }
  return out;
}

struct Stepper {
  const HybridAutomaton& ha;
  const Trace& inputs;
  const GuardConfig& config;
  std::map<std::string, std::vector<std::uint8_t>> exo;
  std::map<std::string, const std::vector<double>*> exo_signals;
  std::vector<double> v;
  std::vector<int> mode_of;  // per step, index into ha.modes
  std::map<std::string, int> mode_index;
  std::vector<std::vector<std::size_t>> out_edges;  // per mode, indices

  Stepper(const HybridAutomaton& h, const Trace& in, const GuardConfig& cfg)
      : ha(h), inputs(in), config(cfg) {
    // Inputs contribute their exogenous columns plus derived press/release
    // edges; the simulated signal's own features are recomputed on the fly.
    const Trace derived = derive_edge_predicates(in);
    for (const auto& p : derived.predicates)
      if (p.kind == PredicateKind::Exogenous)
        exo.emplace(p.name, dilate_stream(p.values, cfg.window));
    for (const auto& s : in.signals) exo_signals.emplace(s.name, &s.values);
    for (std::size_t m = 0; m < ha.modes.size(); ++m)
      mode_index.emplace(ha.modes[m].name, static_cast<int>(m));
    out_edges.resize(ha.modes.size());
    for (std::size_t t = 0; t < ha.transitions.size(); ++t) {
      auto it = mode_index.find(ha.transitions[t].source);
      if (it == mode_index.end())
        throw std::invalid_argument("transition from unknown mode '" +
                                    ha.transitions[t].source + "'");
      out_edges[it->second].push_back(t);
    }
  }

  // Signal slope at tau; the first step has no history, so zero stands in.
  double accel(std::size_t tau) const {
    if (tau == 0) return 0.0;
    return (v[tau] - v[tau - 1]) / inputs.dt;
  }

  bool predicate_at(const std::string& name, std::size_t tau,
                    int source) const {
    auto it = exo.find(name);
    if (it != exo.end()) return it->second[tau];
    const std::string& sig = ha.signal;
    const double eps = config.eps_sign;
    if (name == sig + ".zero_down")
      return tau >= 1 && signum_band(v[tau - 1], eps) == 1 &&
             signum_band(v[tau], eps) <= 0;
    if (name == sig + ".zero_up")
      return tau >= 1 && signum_band(v[tau - 1], eps) == -1 &&
             signum_band(v[tau], eps) >= 0;
    if (name == sig + ".sign_neg") return signum_band(v[tau], eps) < 0;
    if (name == sig + ".sign_zero") return signum_band(v[tau], eps) == 0;
    if (name == sig + ".sign_pos") return signum_band(v[tau], eps) > 0;
    if (name == sig + ".accel_neg") return signum_band(accel(tau), eps) < 0;
    if (name == sig + ".accel_zero") return signum_band(accel(tau), eps) == 0;
    if (name == sig + ".accel_pos") return signum_band(accel(tau), eps) > 0;
    if (name == sig + ".at_extremum") {
      const auto& ext = ha.modes[source].extremum;
      return ext && std::abs(v[tau] - *ext) <= config.eps_ext;
    }
    throw std::runtime_error("predicate '" + name +
                             "' unavailable during simulation");
  }

  bool condition_at(const StateCondition& c, std::size_t tau) const {
    double x;
    if (c.signal == ha.signal) {
      x = v[tau];
    } else {
      auto it = exo_signals.find(c.signal);
      if (it == exo_signals.end())
        throw std::runtime_error("signal '" + c.signal +
                                 "' unavailable during simulation");
      x = (*it->second)[tau];
    }
    switch (c.op) {
      case ConditionOp::Le:
        return x <= c.lo;
      case ConditionOp::Ge:
        return x >= c.lo;
      case ConditionOp::AbsBand:
        return c.lo <= std::abs(x) && std::abs(x) < c.hi;
    }
    return false;
  }

  bool transition_holds(const HaTransition& tr, std::size_t tau,
                        int source) const {
    for (const auto& [name, score] : tr.guard.conjuncts)
      if (!predicate_at(name, tau, source)) return false;
    for (const auto& c : tr.conditions)
      if (!condition_at(c, tau)) return false;
    return true;
  }

  double flow_step(const HaMode& mode, double prev) const {
    return mode.flow_kind == FlowKind::ConstSet
               ? mode.flow
               : prev + mode.flow * inputs.dt;
  }

  double entry_value(const HaMode& mode, double prev) const {
    switch (mode.update) {
      case UpdateKind::Reset:
        return mode.update_value;
      case UpdateKind::ClampMax:
        return std::min(prev, mode.update_value);
      case UpdateKind::FracAbove:
        return mode.update_value + (prev - std::floor(prev));
      case UpdateKind::None:
        return flow_step(mode, prev);
    }
    return prev;
  }
};

}  // namespace

SimulationResult simulate(const HybridAutomaton& ha, const Trace& inputs,
                          double initial_value, const GuardConfig& config) {
  if (ha.modes.empty()) throw std::invalid_argument("automaton has no modes");
  inputs.validate();
  Stepper st(ha, inputs, config);
  auto init = st.mode_index.find(ha.initial);
  if (init == st.mode_index.end())
    throw std::invalid_argument("initial mode '" + ha.initial + "' undefined");

  const std::size_t n = inputs.length();
  st.v.assign(n, 0.0);
  st.mode_of.assign(n, init->second);
  st.v[0] = initial_value;
  std::size_t entry_step = 0;

  for (std::size_t t = 1; t < n; ++t) {
    const int cur = st.mode_of[t - 1];
    const std::size_t tau = t - 1;
    int fired = -1;
    for (std::size_t e : st.out_edges[cur]) {
      const HaTransition& tr = ha.transitions[e];
      // A transition with nothing to test can never be taken.
      if (!tr.guard.has_conjuncts() && tr.conditions.empty()) continue;
      if (!st.transition_holds(tr, tau, cur)) continue;
      // Edge trigger: the step after entry counts as a fresh edge.
      if (tau != entry_step && st.transition_holds(tr, tau - 1, cur)) continue;
      if (fired < 0) {
        fired = static_cast<int>(e);
      } else if (ha.transitions[fired].priority == tr.priority) {
        throw std::runtime_error(
            "ambiguous transitions at step " + std::to_string(t) + ": " +
            ha.transitions[fired].source + "->" + ha.transitions[fired].target +
            " vs " + tr.source + "->" + tr.target);
      } else if (tr.priority > ha.transitions[fired].priority) {
        fired = static_cast<int>(e);
      }
    }
    if (fired >= 0) {
      const int next = st.mode_index.at(ha.transitions[fired].target);
      st.mode_of[t] = next;
      st.v[t] = st.entry_value(ha.modes[next], st.v[t - 1]);
      entry_step = t;
    } else {
      st.mode_of[t] = cur;
      st.v[t] = st.flow_step(ha.modes[cur], st.v[t - 1]);
    }
  }

  SimulationResult result;
  result.trace.dt = inputs.dt;
  result.trace.add_signal(ha.signal, st.v);
  for (const auto& p : inputs.predicates)
    result.trace.add_predicate(p.name, p.kind, p.values);
  result.mode_labels.reserve(n);
  for (std::size_t t = 0; t < n; ++t)
    result.mode_labels.push_back(ha.modes[st.mode_of[t]].name);
  return result;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Square min-cost assignment, O(n^3) potentials method.  Returns the column
// assigned to each row.
std::vector<int> hungarian_min(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<double> u(n + 1, 0), vpot(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - vpot[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          vpot[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] >= 1) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

AttributionResult attribution(const std::vector<std::string>& predicted,
                              const std::vector<std::string>& truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw std::invalid_argument("label sequences must have equal nonzero length");
  std::map<std::string, int> pix, tix;
  for (const auto& s : predicted) pix.emplace(s, static_cast<int>(pix.size()));
  for (const auto& s : truth) tix.emplace(s, static_cast<int>(tix.size()));
  const int np = static_cast<int>(pix.size());
  const int nt = static_cast<int>(tix.size());
  const int side = std::max(np, nt);

  std::vector<std::vector<double>> agree(side, std::vector<double>(side, 0.0));
  for (std::size_t k = 0; k < predicted.size(); ++k)
    agree[pix[predicted[k]]][tix[truth[k]]] += 1.0;

  std::vector<std::vector<double>> cost(side, std::vector<double>(side, 0.0));
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) cost[i][j] = -agree[i][j];
  const std::vector<int> match = hungarian_min(cost);

  double matched = 0.0;
  AttributionResult result;
  std::vector<std::string> pnames(np), tnames(nt);
  for (const auto& [name, ix] : pix) pnames[ix] = name;
  for (const auto& [name, ix] : tix) tnames[ix] = name;
  for (int i = 0; i < np; ++i) {
    const int j = match[i];
    if (j < 0 || j >= nt) continue;  // padded column: label left unmatched
    matched += agree[i][j];
    if (agree[i][j] > 0.0) result.mapping[pnames[i]] = tnames[j];
  }
  result.error = 1.0 - matched / static_cast<double>(predicted.size());
  return result;
}

double attribution_error(const std::vector<std::string>& predicted,
                         const std::vector<std::string>& truth) {
  return attribution(predicted, truth).error;
}

double mean_absolute_error(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("series must have equal nonzero length");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
  return sum / static_cast<double>(a.size());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string condition_text(const StateCondition& c) {
  switch (c.op) {
    case ConditionOp::Le:
      return c.signal + " <= " + fmt(c.lo);
    case ConditionOp::Ge:
      return c.signal + " >= " + fmt(c.lo);
    case ConditionOp::AbsBand:
      return fmt(c.lo) + " <= |" + c.signal + "| < " + fmt(c.hi);
  }
  return "?";
}

}  // namespace

std::string export_dot(const HybridAutomaton& ha) {
  std::ostringstream out;
  out << "digraph automaton {\n  rankdir=LR;\n  node [shape=box];\n";
  for (const auto& m : ha.modes) {
    std::string label = m.name;
    if (m.flow_kind == FlowKind::ConstSet)
      label += "\\n" + ha.signal + " = " + fmt(m.flow);
    else
      label += "\\nd" + ha.signal + " = " + fmt(m.flow) + "/step";
    switch (m.update) {
      case UpdateKind::Reset:
        label += "\\nentry: v := " + fmt(m.update_value);
        break;
      case UpdateKind::ClampMax:
        label += "\\nentry: v := min(v, " + fmt(m.update_value) + ")";
        break;
      case UpdateKind::FracAbove:
        label += "\\nentry: v := " + fmt(m.update_value) + " + frac(v)";
        break;
      case UpdateKind::None:
        break;
    }
    out << "  \"" << dot_escape(m.name) << "\" [label=\"" << label << "\"";
    if (m.name == ha.initial) out << ", peripheries=2";
    out << "];\n";
  }
  for (const auto& tr : ha.transitions) {
    std::string label;
    for (const auto& [name, score] : tr.guard.conjuncts) {
      if (!label.empty()) label += " & ";
      label += name;
    }
    if (!tr.guard.disjuncts.empty()) {
      std::string dis;
      for (const auto& [name, score] : tr.guard.disjuncts) {
        if (!dis.empty()) dis += " | ";
        dis += name;
      }
      label += label.empty() ? "[" + dis + "]" : " [" + dis + "]";
    }
    for (const auto& c : tr.conditions) {
      if (!label.empty()) label += " & ";
      label += condition_text(c);
    }
    const bool unexplained = label.empty();
    if (unexplained) label = "?";
    out << "  \"" << dot_escape(tr.source) << "\" -> \""
        << dot_escape(tr.target) << "\" [label=\"" << dot_escape(label) << "\"";
    if (unexplained) out << ", style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

nlohmann::json interval_json(const Interval95& ci) {
  return nlohmann::json::array({ci.lo, ci.hi});
}

Interval95 interval_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

const char* flow_kind_name(FlowKind k) {
  return k == FlowKind::Linear ? "linear" : "const";
}

const char* update_kind_name(UpdateKind k) {
  switch (k) {
    case UpdateKind::None:
      return "none";
    case UpdateKind::Reset:
      return "reset";
    case UpdateKind::ClampMax:
      return "clamp_max";
    case UpdateKind::FracAbove:
      return "frac_above";
  }
  return "none";
}

const char* op_name(ConditionOp op) {
  switch (op) {
    case ConditionOp::Le:
      return "le";
    case ConditionOp::Ge:
      return "ge";
    case ConditionOp::AbsBand:
      return "abs_band";
  }
  return "le";
}

nlohmann::json scores_json(const std::map<std::string, PredicateScore>& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [name, s] : m) {
    arr.push_back({{"name", name},
                   {"score", s.score},
                   {"kind", s.kind == PredicateKind::Exogenous ? "exo" : "endo"},
                   {"joint", s.count_joint},
                   {"count", s.count_pred}});
  }
  return arr;
}

std::map<std::string, PredicateScore> scores_from(const nlohmann::json& arr) {
  std::map<std::string, PredicateScore> m;
  for (const auto& e : arr) {
    PredicateScore s;
    s.score = e.at("score").get<double>();
    s.kind = e.at("kind").get<std::string>() == "exo"
                 ? PredicateKind::Exogenous
                 : PredicateKind::Endogenous;
    s.count_joint = e.at("joint").get<std::size_t>();
    s.count_pred = e.at("count").get<std::size_t>();
    m.emplace(e.at("name").get<std::string>(), s);
  }
  return m;
}

}  // namespace

nlohmann::json automaton_to_json(const HybridAutomaton& ha) {
  nlohmann::json j;
  j["format"] = kAutomatonFormat;
  j["signal"] = ha.signal;
  j["initial"] = ha.initial;
  j["modes"] = nlohmann::json::array();
  for (const auto& m : ha.modes) {
    nlohmann::json mj;
    mj["name"] = m.name;
    mj["flow"] = {{"kind", flow_kind_name(m.flow_kind)},
                  {"value", m.flow},
                  {"ci", interval_json(m.flow_ci)}};
    mj["update"] = {{"kind", update_kind_name(m.update)},
                    {"value", m.update_value},
                    {"ci", interval_json(m.update_ci)}};
    if (m.extremum)
      mj["extremum"] = *m.extremum;
    else
      mj["extremum"] = nullptr;
    j["modes"].push_back(std::move(mj));
  }
  j["transitions"] = nlohmann::json::array();
  for (const auto& tr : ha.transitions) {
    nlohmann::json tj;
    tj["source"] = tr.source;
    tj["target"] = tr.target;
    tj["priority"] = tr.priority;
    tj["events"] = tr.guard.events;
    tj["conjuncts"] = scores_json(tr.guard.conjuncts);
    tj["disjuncts"] = scores_json(tr.guard.disjuncts);
    tj["conditions"] = nlohmann::json::array();
    for (const auto& c : tr.conditions)
      tj["conditions"].push_back({{"signal", c.signal},
                                  {"op", op_name(c.op)},
                                  {"lo", c.lo},
                                  {"hi", c.hi}});
    j["transitions"].push_back(std::move(tj));
  }
  return j;
}

HybridAutomaton automaton_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format").get<std::string>() != kAutomatonFormat)
    throw std::runtime_error("unsupported automaton format (expected '" +
                             std::string(kAutomatonFormat) + "')");
  HybridAutomaton ha;
  ha.signal = j.at("signal").get<std::string>();
  ha.initial = j.at("initial").get<std::string>();
  for (const auto& mj : j.at("modes")) {
    HaMode m;
    m.name = mj.at("name").get<std::string>();
    const auto& f = mj.at("flow");
    m.flow_kind = f.at("kind").get<std::string>() == "const"
                      ? FlowKind::ConstSet
                      : FlowKind::Linear;
    m.flow = f.at("value").get<double>();
    m.flow_ci = interval_from(f.at("ci"));
    const auto& u = mj.at("update");
    const std::string uk = u.at("kind").get<std::string>();
    if (uk == "reset")
      m.update = UpdateKind::Reset;
    else if (uk == "clamp_max")
      m.update = UpdateKind::ClampMax;
    else if (uk == "frac_above")
      m.update = UpdateKind::FracAbove;
    else
      m.update = UpdateKind::None;
    m.update_value = u.at("value").get<double>();
    m.update_ci = interval_from(u.at("ci"));
    if (!mj.at("extremum").is_null())
      m.extremum = mj.at("extremum").get<double>();
    ha.modes.push_back(std::move(m));
  }
  for (const auto& tj : j.at("transitions")) {
    HaTransition tr;
    tr.source = tj.at("source").get<std::string>();
    tr.target = tj.at("target").get<std::string>();
    tr.priority = tj.at("priority").get<int>();
    tr.guard.events = tj.at("events").get<std::size_t>();
    tr.guard.conjuncts = scores_from(tj.at("conjuncts"));
    tr.guard.disjuncts = scores_from(tj.at("disjuncts"));
    for (const auto& cj : tj.at("conditions")) {
      StateCondition c;
      c.signal = cj.at("signal").get<std::string>();
      const std::string op = cj.at("op").get<std::string>();
      c.op = op == "ge" ? ConditionOp::Ge
                        : op == "abs_band" ? ConditionOp::AbsBand : ConditionOp::Le;
      c.lo = cj.at("lo").get<double>();
      c.hi = cj.at("hi").get<double>();
      tr.conditions.push_back(std::move(c));
    }
    ha.transitions.push_back(std::move(tr));
  }
  return ha;
}

void save_automaton_file(const HybridAutomaton& ha, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << automaton_to_json(ha).dump(2) << '\n';
}

HybridAutomaton load_automaton_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return automaton_from_json(j);
}

}  // namespace charda
