#include "charda/learn.hpp"

#include <stdexcept>

namespace charda {

LearnResult learn(const Trace& trace, const LearnOptions& opts) {
  trace.validate();

  LearnResult r;
  r.signal = opts.signal;
  if (!opts.derive_from.empty()) {
    if (r.signal.empty())
      throw std::invalid_argument("learn: deriving a signal needs its name");
    r.augmented = derive_signal(trace, opts.derive_from, r.signal);
  } else {
    if (r.signal.empty()) {
      if (trace.signals.empty())
        throw std::invalid_argument("learn: trace has no signal columns");
      r.signal = trace.signals.front().name;
    }
    r.augmented = trace;
  }

  r.augmented = derive_edge_predicates(r.augmented);
  r.augmented =
      compute_endogenous_predicates(r.augmented, r.signal, opts.guards.eps_sign);

  r.segmentation = optimal_segmentation(r.augmented, r.signal, opts.segmentation);
  r.modes = merge_modes(r.segmentation, r.augmented, r.signal, opts.segmentation);
  r.analysis = extract_events(r.modes, r.augmented, r.signal, opts.guards);
  r.guards = learn_guards(r.analysis, opts.guards);
  resolve_nondeterminism(r.modes, r.guards, r.analysis, r.augmented, r.signal,
                         opts.segmentation, opts.guards);
  r.automaton =
      assemble(r.modes, r.guards, r.analysis, r.augmented, r.signal);
  return r;
}

}  // namespace charda
