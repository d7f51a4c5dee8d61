#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "charda/automaton.hpp"
#include "charda/trace.hpp"

namespace charda {

// A generated benchmark: the observed trace, the ground-truth mode label for
// every step, and the automaton the trace was rolled out from.
struct LabeledTrace {
  Trace trace;
  std::vector<std::string> labels;
  HybridAutomaton truth;
};

// Writes the label column as "step,mode" CSV next to a trace.
void save_labels_file(const std::string& path,
                      const std::vector<std::string>& labels);
std::vector<std::string> load_labels_file(const std::string& path);

// ---------------------------------------------------------------------------
// Aircraft surveys

struct LawnmowerParams {
  std::size_t leg_steps = 50;
  std::size_t turn_steps = 25;
  std::size_t repeats = 13;
  double speed = 1.0;
  // Default completes a half circle over one turn block: turn_rate * turn_steps
  // equals pi at dt = 1.
  double turn_rate = std::numbers::pi / 25.0;
  double noise_sd = 0.05;
};

// Boustrophedon survey: straight legs alternate with constant-rate turns.
// The modelled signal is heading_rate; x/y are the noiseless path, kept for
// plotting only.  Layout is leg (turn leg)*repeats, so the trace both starts
// and ends on a straight leg.
LabeledTrace gen_lawnmower(const LawnmowerParams& params, std::uint64_t seed);

struct RandomManeuverParams {
  std::size_t maneuver_steps = 50;
  std::size_t count = 17;
  double turn_rate = std::numbers::pi / 25.0;
  double noise_sd = 0.05;
};

// Maneuver sequence drawn uniformly from {straight, left, right}.  Consecutive
// equal draws are indistinguishable in the signal and the labels, so the
// effective segment count can be below `count`.
LabeledTrace gen_random_maneuvers(const RandomManeuverParams& params,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Platformer physics

// One script row: the held jump button, the scripted horizontal speed, and
// collision pulses.  Rows are sampled at dt = 1.
struct MarioStep {
  bool a = false;
  double vx = 0.0;
  bool hard = false;   // head hits a ceiling
  bool soft = false;   // head clips a soft block
  bool enemy = false;  // stomp while falling
};
using MarioScript = std::vector<MarioStep>;

// The 22-mode vertical-velocity ground truth: Ground plus, per speed band,
// Jump, Release, Fall, TV, Bump, SoftBump and Bounce variants.
HybridAutomaton mario_truth_automaton();

// Script cycling every episode type across all three speed bands, about 3.8k
// steps.
MarioScript default_mario_script();

// Slow-band-only script (release and ceiling-bump jumps), used to study
// parameter recovery without cross-band pooling.
MarioScript single_band_mario_script();

// Rolls the script through the ground truth.  The trace holds the integrated
// height y, the scripted vx, the exact vy_true, and the button/collision
// columns.  quantize rounds y to integers after the roll-out; vy_true stays
// exact.  The generator is deterministic; seed is accepted for interface
// uniformity with the aircraft generators.
LabeledTrace gen_mario(const MarioScript& script, bool quantize = false,
                       std::uint64_t seed = 0);

}  // namespace charda
