#include "charda/guards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace charda {

double npmi(std::size_t count_joint, std::size_t count_x, std::size_t count_y,
            std::size_t total) {
  if (total < 1) throw std::invalid_argument("npmi: empty sample space");
  if (count_x > total || count_y > total)
    throw std::invalid_argument("npmi: marginal exceeds sample space");
  if (count_joint > std::min(count_x, count_y))
    throw std::invalid_argument("npmi: joint exceeds a marginal");
  if (count_x == 0 || count_y == 0) return 0.0;
  if (count_joint == 0) return -1.0;
  if (count_joint == total) return 1.0;
  const double n = static_cast<double>(total);
  const double pxy = static_cast<double>(count_joint) / n;
  const double px = static_cast<double>(count_x) / n;
  const double py = static_cast<double>(count_y) / n;
  const double value = std::log(pxy / (px * py)) / -std::log(pxy);
  return std::clamp(value, -1.0, 1.0);
}

namespace {

std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& values,
                                 int window) {
  if (window <= 0) return values;
  const std::size_t n = values.size();
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    if (!values[t]) continue;
    const std::size_t lo = t >= static_cast<std::size_t>(window)
                               ? t - static_cast<std::size_t>(window)
                               : 0;
    const std::size_t hi =
        std::min(n - 1, t + static_cast<std::size_t>(window));
    for (std::size_t u = lo; u <= hi; ++u) out[u] = 1;
  }
  return out;
}

}  // namespace

EventAnalysis extract_events(const ModeSet& modes, const Trace& trace,
                             const std::string& signal,
                             const GuardConfig& config) {
  const auto& v = trace.signal(signal);
  const std::size_t n = trace.length();
  if (modes.assignment.size() != n)
    throw std::invalid_argument("assignment length disagrees with trace");

  EventAnalysis analysis;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    if (modes.assignment[t] != modes.assignment[t + 1])
      analysis.events.push_back({modes.assignment[t], modes.assignment[t + 1], t});
  }

  std::vector<std::pair<const PredicateColumn*, std::vector<std::uint8_t>>>
      streams;
  for (const auto& p : trace.predicates)
    streams.emplace_back(&p, dilate(p.values, config.window));

  const std::string ext_name = signal + ".at_extremum";
  for (const auto& p : trace.predicates)
    analysis.predicate_kinds[p.name] = p.kind;
  analysis.predicate_kinds[ext_name] = PredicateKind::Endogenous;
  analysis.tables.resize(modes.modes.size());
  analysis.mode_extrema.resize(modes.modes.size(), 0.0);

  for (std::size_t m = 0; m < modes.modes.size(); ++m) {
    const Mode& mode = modes.modes[m];
    SourceTable& table = analysis.tables[m];
    table.total = mode.steps();

    // Signed extreme of the signal over this mode's steps.
    double ext = 0.0;
    bool first = true;
    for (const auto& occ : mode.occurrences)
      for (std::size_t t = occ.start; t < occ.end; ++t)
        if (first || std::abs(v[t]) > std::abs(ext)) {
          ext = v[t];
          first = false;
        }
    analysis.mode_extrema[m] = ext;

    auto at_extremum = [&](std::size_t t) {
      return std::abs(v[t] - ext) <= config.eps_ext;
    };

    for (const auto& occ : mode.occurrences)
      for (std::size_t t = occ.start; t < occ.end; ++t) {
        for (const auto& [col, stream] : streams)
          if (stream[t]) ++table.pred_counts[col->name];
        if (at_extremum(t)) ++table.pred_counts[ext_name];
      }

    for (const auto& ev : analysis.events) {
      if (ev.source != static_cast<int>(m)) continue;
      ++table.event_counts[ev.target];
      for (const auto& [col, stream] : streams)
        if (stream[ev.step]) ++table.joint[col->name][ev.target];
      if (at_extremum(ev.step)) ++table.joint[ext_name][ev.target];
    }
  }
  return analysis;
}

GuardMap learn_guards(const EventAnalysis& analysis, const GuardConfig& config) {
  if (!(config.theta_relevant > 0.0) || config.theta_universal > 1.0 ||
      config.theta_relevant > config.theta_universal)
    throw std::invalid_argument("guard thresholds must satisfy 0 < relevant <= universal <= 1");

  GuardMap guards;
  for (std::size_t m = 0; m < analysis.tables.size(); ++m) {
    const SourceTable& table = analysis.tables[m];
    for (const auto& [target, n_events] : table.event_counts) {
      Guard guard;
      guard.events = n_events;
      for (const auto& [name, count] : table.pred_counts) {
        std::size_t joint = 0;
        auto jt = table.joint.find(name);
        if (jt != table.joint.end()) {
          auto tt = jt->second.find(target);
          if (tt != jt->second.end()) joint = tt->second;
        }
        const double score = npmi(joint, count, n_events, table.total);
        PredicateScore entry{score, analysis.predicate_kinds.at(name), joint,
                             count};
        if (score >= config.theta_universal)
          guard.conjuncts.emplace(name, entry);
        else if (score >= config.theta_relevant)
          guard.disjuncts.emplace(name, entry);
      }
      const bool exo_present =
          std::any_of(guard.conjuncts.begin(), guard.conjuncts.end(),
                      [](const auto& kv) {
                        return kv.second.kind == PredicateKind::Exogenous;
                      }) ||
          std::any_of(guard.disjuncts.begin(), guard.disjuncts.end(),
                      [](const auto& kv) {
                        return kv.second.kind == PredicateKind::Exogenous;
                      });
      if (exo_present) {
        std::erase_if(guard.conjuncts, [](const auto& kv) {
          return kv.second.kind == PredicateKind::Endogenous;
        });
        std::erase_if(guard.disjuncts, [](const auto& kv) {
          return kv.second.kind == PredicateKind::Endogenous;
        });
      }
      guards.emplace(TransitionKey{static_cast<int>(m), target},
                     std::move(guard));
    }
  }
  return guards;
}

namespace {

// Conjunct-name subset test, either direction.
bool conjuncts_subsume(const Guard& a, const Guard& b) {
  auto subset = [](const Guard& x, const Guard& y) {
    return std::all_of(x.conjuncts.begin(), x.conjuncts.end(),
                       [&](const auto& kv) {
                         return y.conjuncts.count(kv.first) > 0;
                       });
  };
  return subset(a, b) || subset(b, a);
}

void reindex_after_erase(std::vector<int>& assignment, int gone, int kept) {
  for (int& a : assignment) {
    if (a == gone) a = kept;
    if (a > gone) --a;
  }
}

}  // namespace

void resolve_nondeterminism(ModeSet& modes, GuardMap& guards,
                            EventAnalysis& analysis, const Trace& trace,
                            const std::string& signal,
                            const SegmentationOptions& seg_opts,
                            const GuardConfig& guard_config) {
  const auto& values = trace.signal(signal);
  SufficientStats stats(values);

  for (;;) {
    // Lowest (source, target, target) pair with equal-or-contained conjunct
    // sets; only explained transitions take part.
    int src = -1, t1 = -1, t2 = -1;
    for (auto it = guards.begin(); it != guards.end() && src < 0; ++it) {
      if (!it->second.has_conjuncts()) continue;
      for (auto jt = std::next(it); jt != guards.end(); ++jt) {
        if (jt->first.first != it->first.first) break;
        if (!jt->second.has_conjuncts()) continue;
        if (conjuncts_subsume(it->second, jt->second)) {
          src = it->first.first;
          t1 = it->first.second;
          t2 = jt->first.second;
          break;
        }
      }
    }
    if (src < 0) break;

    const int kept = std::min(t1, t2);
    const int gone = std::max(t1, t2);
    Mode& target = modes.modes[static_cast<std::size_t>(kept)];
    std::vector<Occurrence> merged;
    std::merge(target.occurrences.begin(), target.occurrences.end(),
               modes.modes[static_cast<std::size_t>(gone)].occurrences.begin(),
               modes.modes[static_cast<std::size_t>(gone)].occurrences.end(),
               std::back_inserter(merged),
               [](const Occurrence& x, const Occurrence& y) {
                 return x.start < y.start;
               });
    target.occurrences = std::move(merged);
    target.pooled = refit_pooled(stats, target.occurrences, seg_opts.templates,
                                 seg_opts.sigma2_floor);
    target.cost = -target.pooled.loglik +
                  penalty(seg_opts.criterion, target.pooled.tmpl.dim(),
                          target.pooled.n);
    modes.modes.erase(modes.modes.begin() + gone);
    reindex_after_erase(modes.assignment, gone, kept);

    // Counts for sources not touching the merged mode are unchanged, so a
    // full recount is equivalent to updating only the incident edges.
    analysis = extract_events(modes, trace, signal, guard_config);
    guards = learn_guards(analysis, guard_config);
  }
}

}  // namespace charda
