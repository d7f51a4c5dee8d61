#pragma once

#include <string>

#include "charda/automaton.hpp"
#include "charda/guards.hpp"
#include "charda/segmentation.hpp"
#include "charda/trace.hpp"

namespace charda {

struct LearnOptions {
  // Dynamics column to model.  Empty picks the trace's first signal.
  std::string signal;
  // When set, the modelled signal is first derived as the backward difference
  // of this position column (the signal name labels the derived column).
  std::string derive_from;
  SegmentationOptions segmentation;
  GuardConfig guards;
};

struct LearnResult {
  Trace augmented;  // input plus derived signal and predicate columns
  std::string signal;
  Segmentation segmentation;
  ModeSet modes;
  EventAnalysis analysis;
  GuardMap guards;
  HybridAutomaton automaton;
};

// Full pipeline: feature derivation, optimal segmentation, mode merging,
// guard scoring, nondeterminism resolution, assembly.
LearnResult learn(const Trace& trace, const LearnOptions& opts);

}  // namespace charda
