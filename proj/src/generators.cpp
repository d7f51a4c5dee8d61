#include "charda/generators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace charda {

void save_labels_file(const std::string& path,
                      const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "step,mode\n";
  for (std::size_t t = 0; t < labels.size(); ++t)
    out << t << ',' << labels[t] << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<std::string> load_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::vector<std::string> labels;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed labels line: " + line);
    labels.push_back(line.substr(comma + 1));
  }
  return labels;
}

namespace {

// Standard normal via Box-Muller on the raw 64-bit stream, so the draw
// sequence is pinned across platforms.
double gauss(std::mt19937_64& rng) {
  const double u1 =
      static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

HaMode const_mode(std::string name, double level) {
  HaMode m;
  m.name = std::move(name);
  m.flow_kind = FlowKind::ConstSet;
  m.flow = level;
  m.flow_ci = {level, level};
  return m;
}

// Topology-only edge: no guard, no conditions.  The interpreter treats it as
// untestable, which is fine for generators that script their own switching.
HaTransition bare_edge(std::string src, std::string tgt) {
  HaTransition t;
  t.source = std::move(src);
  t.target = std::move(tgt);
  return t;
}

}  // namespace

LabeledTrace gen_lawnmower(const LawnmowerParams& p, std::uint64_t seed) {
  if (p.leg_steps == 0 || p.turn_steps == 0 || p.repeats == 0)
    throw std::invalid_argument("lawnmower: step counts must be positive");
  if (!(p.turn_rate > 0) || !std::isfinite(p.turn_rate))
    throw std::invalid_argument("lawnmower: turn_rate must be positive");
  if (p.noise_sd < 0 || !std::isfinite(p.noise_sd))
    throw std::invalid_argument("lawnmower: noise_sd must be nonnegative");

  std::mt19937_64 rng(seed);
  std::vector<double> rate, truth_rate;
  std::vector<std::string> labels;
  auto block = [&](std::size_t steps, double level, const char* name) {
    for (std::size_t i = 0; i < steps; ++i) {
      truth_rate.push_back(level);
      rate.push_back(level + p.noise_sd * gauss(rng));
      labels.emplace_back(name);
    }
  };
  for (std::size_t r = 0; r < p.repeats; ++r) {
    block(p.leg_steps, 0.0, "straight");
    block(p.turn_steps, p.turn_rate, "turn");
  }
  block(p.leg_steps, 0.0, "straight");

  const std::size_t n = rate.size();
  std::vector<double> xs(n), ys(n);
  double theta = 0.0, x = 0.0, y = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    theta += truth_rate[t];
    x += p.speed * std::cos(theta);
    y += p.speed * std::sin(theta);
    xs[t] = x;
    ys[t] = y;
  }

  LabeledTrace out;
  out.trace.dt = 1.0;
  out.trace.add_signal("heading_rate", std::move(rate));
  out.trace.add_signal("x", std::move(xs));
  out.trace.add_signal("y", std::move(ys));
  out.labels = std::move(labels);

  out.truth.signal = "heading_rate";
  out.truth.initial = "straight";
  out.truth.modes.push_back(const_mode("straight", 0.0));
  out.truth.modes.push_back(const_mode("turn", p.turn_rate));
  out.truth.transitions.push_back(bare_edge("straight", "turn"));
  out.truth.transitions.push_back(bare_edge("turn", "straight"));
  return out;
}

LabeledTrace gen_random_maneuvers(const RandomManeuverParams& p,
                                  std::uint64_t seed) {
  if (p.maneuver_steps == 0 || p.count == 0)
    throw std::invalid_argument("maneuvers: counts must be positive");
  if (!(p.turn_rate > 0) || !std::isfinite(p.turn_rate))
    throw std::invalid_argument("maneuvers: turn_rate must be positive");
  if (p.noise_sd < 0 || !std::isfinite(p.noise_sd))
    throw std::invalid_argument("maneuvers: noise_sd must be nonnegative");

  static const char* kNames[3] = {"straight", "left", "right"};
  const double levels[3] = {0.0, p.turn_rate, -p.turn_rate};

  std::mt19937_64 rng(seed);
  std::vector<double> rate;
  std::vector<std::string> labels;
  for (std::size_t m = 0; m < p.count; ++m) {
    const std::size_t idx = static_cast<std::size_t>(rng() % 3);
    for (std::size_t i = 0; i < p.maneuver_steps; ++i) {
      rate.push_back(levels[idx] + p.noise_sd * gauss(rng));
      labels.emplace_back(kNames[idx]);
    }
  }

  LabeledTrace out;
  out.trace.dt = 1.0;
  out.trace.add_signal("heading_rate", std::move(rate));
  out.labels = std::move(labels);

  out.truth.signal = "heading_rate";
  out.truth.initial = "straight";
  for (int i = 0; i < 3; ++i)
    out.truth.modes.push_back(const_mode(kNames[i], levels[i]));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) out.truth.transitions.push_back(bare_edge(kNames[i], kNames[j]));
  return out;
}

// ---------------------------------------------------------------------------
// Platformer

namespace {

// Per-band vertical dynamics: jump impulse, jump-phase gravity (button held),
// fall-phase gravity (button up), chosen per the horizontal speed at takeoff.
struct BandParams {
  double v0, a_jump, g_fall;
  double vx_lo, vx_hi;
};
constexpr BandParams kBands[3] = {
    {4.0, -1.0 / 8.0, -7.0 / 16.0, 0.0, 1.0},
    {4.0, -31.0 / 256.0, -3.0 / 8.0, 1.0, 2.5},
    {5.0, -5.0 / 32.0, -9.0 / 16.0, 2.5, 1e9},
};
constexpr double kTerminalVy = -4.0;

HaMode phys_mode(std::string name, FlowKind fk, double flow, UpdateKind uk,
                 double uv) {
  HaMode m;
  m.name = std::move(name);
  m.flow_kind = fk;
  m.flow = flow;
  m.flow_ci = {flow, flow};
  m.update = uk;
  m.update_value = uv;
  m.update_ci = {uv, uv};
  return m;
}

HaTransition phys_edge(std::string src, std::string tgt,
                       std::vector<std::string> preds,
                       std::vector<StateCondition> conds, int priority) {
  HaTransition t;
  t.source = std::move(src);
  t.target = std::move(tgt);
  for (auto& name : preds) {
    PredicateScore s;
    s.score = 1.0;
    s.kind = PredicateKind::Exogenous;
    t.guard.conjuncts.emplace(std::move(name), s);
  }
  t.conditions = std::move(conds);
  t.priority = priority;
  return t;
}

StateCondition vy_le(double bound) { return {"vy", ConditionOp::Le, bound, 0}; }

}  // namespace

HybridAutomaton mario_truth_automaton() {
  HybridAutomaton ha;
  ha.signal = "vy";
  ha.initial = "Ground";
  ha.modes.push_back(
      phys_mode("Ground", FlowKind::Linear, 0.0, UpdateKind::Reset, 0.0));

  for (int f = 0; f < 3; ++f) {
    const BandParams& b = kBands[f];
    const std::string v = std::to_string(f + 1);
    ha.modes.push_back(phys_mode("Jump" + v, FlowKind::Linear, b.a_jump,
                                 UpdateKind::Reset, b.v0));
    ha.modes.push_back(phys_mode("Release" + v, FlowKind::Linear, b.a_jump,
                                 UpdateKind::ClampMax, 3.0));
    ha.modes.push_back(phys_mode("Fall" + v, FlowKind::Linear, b.g_fall,
                                 UpdateKind::None, 0.0));
    ha.modes.push_back(phys_mode("TV" + v, FlowKind::ConstSet, kTerminalVy,
                                 UpdateKind::FracAbove, kTerminalVy));
    ha.modes.push_back(phys_mode("Bump" + v, FlowKind::Linear, b.a_jump,
                                 UpdateKind::Reset, 0.0));
    ha.modes.push_back(phys_mode("SoftBump" + v, FlowKind::Linear, b.a_jump,
                                 UpdateKind::FracAbove, 1.0));
    ha.modes.push_back(phys_mode("Bounce" + v, FlowKind::Linear, b.g_fall,
                                 UpdateKind::Reset, 4.0));

    ha.transitions.push_back(phys_edge(
        "Ground", "Jump" + v, {"btnA.pressed"},
        {{"vx", ConditionOp::AbsBand, b.vx_lo, b.vx_hi}}, 0));
    ha.transitions.push_back(
        phys_edge("Jump" + v, "Release" + v, {"btnA.released"}, {}, 5));
    ha.transitions.push_back(
        phys_edge("Jump" + v, "Fall" + v, {}, {vy_le(0.0)}, 10));
    ha.transitions.push_back(
        phys_edge("Jump" + v, "SoftBump" + v, {"collide.soft"}, {}, 20));
    ha.transitions.push_back(
        phys_edge("Jump" + v, "Bump" + v, {"collide.hard"}, {}, 30));
    ha.transitions.push_back(
        phys_edge("Release" + v, "Fall" + v, {}, {vy_le(0.0)}, 10));
    ha.transitions.push_back(
        phys_edge("SoftBump" + v, "Fall" + v, {}, {vy_le(0.0)}, 10));
    ha.transitions.push_back(
        phys_edge("Fall" + v, "TV" + v, {}, {vy_le(kTerminalVy)}, 15));
    ha.transitions.push_back(
        phys_edge("Fall" + v, "Bounce" + v, {"collide.enemy"}, {}, 40));
    ha.transitions.push_back(
        phys_edge("Bump" + v, "TV" + v, {}, {vy_le(kTerminalVy)}, 15));
    ha.transitions.push_back(
        phys_edge("Bump" + v, "Bounce" + v, {"collide.enemy"}, {}, 40));
    ha.transitions.push_back(
        phys_edge("Bounce" + v, "TV" + v, {}, {vy_le(kTerminalVy)}, 15));
    ha.transitions.push_back(
        phys_edge("TV" + v, "Ground", {"collide.ground"}, {}, 50));
    // Touching down short of terminal velocity returns to the ground from any
    // airborne phase.
    for (const char* phase : {"Jump", "Release", "Fall", "Bump", "SoftBump",
                              "Bounce"})
      ha.transitions.push_back(
          phys_edge(phase + v, "Ground", {"collide.ground"}, {}, 50));
  }
  return ha;
}

namespace {

// Incremental interpreter over the platformer truth machine.  Mirrors the
// one-step-ahead semantics of simulate() at dt = 1 while also integrating the
// height, so ground contact is known the moment each step is produced.  The
// roll-out in gen_mario is cross-checked against simulate() afterwards.
struct TruthWalker {
  enum class Pred { BtnA, Pressed, Released, Hard, Soft, Enemy, GroundHit };

  struct Edge {
    int target = 0;
    std::vector<Pred> preds;
    std::vector<StateCondition> conditions;
    int priority = 0;
  };

  const HybridAutomaton& ha;
  int ground = 0;
  std::vector<std::vector<Edge>> out;
  std::vector<MarioStep> rows;
  std::vector<int> mode_of;
  std::vector<double> vy, y;
  std::vector<std::uint8_t> ground_hit;
  std::size_t entry_step = 0;

  explicit TruthWalker(const HybridAutomaton& h) : ha(h) {
    std::map<std::string, int> index;
    for (std::size_t m = 0; m < ha.modes.size(); ++m)
      index.emplace(ha.modes[m].name, static_cast<int>(m));
    ground = index.at("Ground");
    out.resize(ha.modes.size());
    for (const auto& tr : ha.transitions) {
      Edge e;
      e.target = index.at(tr.target);
      for (const auto& [name, score] : tr.guard.conjuncts)
        e.preds.push_back(code_of(name));
      e.conditions = tr.conditions;
      e.priority = tr.priority;
      out[index.at(tr.source)].push_back(std::move(e));
    }
    mode_of.push_back(ground);
    vy.push_back(0.0);
    y.push_back(0.0);
    ground_hit.push_back(0);
  }

  static Pred code_of(const std::string& name) {
    if (name == "btnA") return Pred::BtnA;
    if (name == "btnA.pressed") return Pred::Pressed;
    if (name == "btnA.released") return Pred::Released;
    if (name == "collide.hard") return Pred::Hard;
    if (name == "collide.soft") return Pred::Soft;
    if (name == "collide.enemy") return Pred::Enemy;
    if (name == "collide.ground") return Pred::GroundHit;
    throw std::logic_error("unknown truth predicate '" + name + "'");
  }

  bool pred(Pred c, std::size_t tau) const {
    switch (c) {
      case Pred::BtnA:
        return rows[tau].a;
      case Pred::Pressed:
        return tau > 0 && rows[tau].a && !rows[tau - 1].a;
      case Pred::Released:
        return tau > 0 && !rows[tau].a && rows[tau - 1].a;
      case Pred::Hard:
        return rows[tau].hard;
      case Pred::Soft:
        return rows[tau].soft;
      case Pred::Enemy:
        return rows[tau].enemy;
      case Pred::GroundHit:
        return ground_hit[tau];
    }
    return false;
  }

  bool cond(const StateCondition& c, std::size_t tau) const {
    const double x = c.signal == ha.signal ? vy[tau] : rows[tau].vx;
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

  bool holds(const Edge& e, std::size_t tau) const {
    for (Pred p : e.preds)
      if (!pred(p, tau)) return false;
    for (const auto& c : e.conditions)
      if (!cond(c, tau)) return false;
    return true;
  }

  static double flow_step(const HaMode& m, double prev) {
    return m.flow_kind == FlowKind::ConstSet ? m.flow : prev + m.flow * 1.0;
  }

  static double entry_value(const HaMode& m, double prev) {
    switch (m.update) {
      case UpdateKind::Reset:
        return m.update_value;
      case UpdateKind::ClampMax:
        return std::min(prev, m.update_value);
      case UpdateKind::FracAbove:
        return m.update_value + (prev - std::floor(prev));
      case UpdateKind::None:
        return flow_step(m, prev);
    }
    return prev;
  }

  void advance(const MarioStep& row) {
    const std::size_t tau = rows.size();
    rows.push_back(row);
    const int cur = mode_of[tau];
    const Edge* fired = nullptr;
    for (const auto& e : out[cur]) {
      if (e.preds.empty() && e.conditions.empty()) continue;
      if (!holds(e, tau)) continue;
      if (tau != entry_step && holds(e, tau - 1)) continue;
      if (!fired || e.priority > fired->priority) fired = &e;
    }
    int next_mode;
    double next_vy;
    if (fired) {
      next_mode = fired->target;
      next_vy = entry_value(ha.modes[next_mode], vy[tau]);
      entry_step = tau + 1;
    } else {
      next_mode = cur;
      next_vy = flow_step(ha.modes[cur], vy[tau]);
    }
    mode_of.push_back(next_mode);
    vy.push_back(next_vy);
    y.push_back(std::max(0.0, y[tau] + next_vy));
    ground_hit.push_back(y.back() == 0.0 && next_mode != ground ? 1 : 0);
  }

  const std::string& mode_name() const {
    return ha.modes[mode_of.back()].name;
  }
  std::size_t age() const { return (mode_of.size() - 1) - entry_step; }
};

// Drives the walker one episode at a time.  Pulse rows are placed by mode
// age, so episode timing is stated in the same terms as the truth dynamics.
struct ScriptBuilder {
  HybridAutomaton truth = mario_truth_automaton();
  TruthWalker walker{truth};
  double vx = 0.5;

  MarioStep row(bool a, bool hard = false, bool soft = false,
                bool enemy = false) const {
    MarioStep s;
    s.a = a;
    s.vx = vx;
    s.hard = hard;
    s.soft = soft;
    s.enemy = enemy;
    return s;
  }

  void require(bool ok, const char* what) const {
    if (!ok)
      throw std::logic_error(std::string("mario script builder: ") + what +
                             " (in " + walker.mode_name() + ")");
  }

  void wait(std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
      require(walker.mode_name() == "Ground", "wait expects the ground");
      walker.advance(row(false));
    }
  }

  // Lands whatever is in flight; bounded so a broken episode cannot loop.
  void coast() {
    for (std::size_t i = 0; i < 500; ++i) {
      if (walker.mode_name() == "Ground") return;
      walker.advance(row(false));
    }
    require(false, "episode never landed");
  }

  void press() {
    require(walker.mode_name() == "Ground", "press expects the ground");
    walker.advance(row(true));
    require(walker.mode_name().starts_with("Jump"), "press must start a jump");
  }

  void hold_until_age(std::size_t target) {
    while (walker.age() < target) walker.advance(row(true));
  }

  // Button released at jump age `hold`; the clamp entry caps the climb.
  void release_jump(std::size_t hold) {
    press();
    hold_until_age(hold);
    walker.advance(row(false));
    require(walker.mode_name().starts_with("Release"),
            "release must interrupt the jump");
    coast();
  }

  void release_stomp(std::size_t hold, std::size_t stomp_age) {
    press();
    hold_until_age(hold);
    walker.advance(row(false));
    std::size_t cap = 500;
    while (!walker.mode_name().starts_with("Fall")) {
      require(cap-- > 0, "release never reached the fall");
      walker.advance(row(false));
    }
    while (walker.age() < stomp_age) walker.advance(row(false));
    walker.advance(row(false, false, false, true));
    require(walker.mode_name().starts_with("Bounce"), "stomp must bounce");
    coast();
  }

  void hard_bump(std::size_t bump_age, std::optional<std::size_t> stomp_age) {
    press();
    hold_until_age(bump_age);
    walker.advance(row(true, true));
    require(walker.mode_name().starts_with("Bump"), "ceiling must bump");
    hold_until_age(2);
    walker.advance(row(false));
    if (stomp_age) {
      while (walker.age() < *stomp_age) walker.advance(row(false));
      walker.advance(row(false, false, false, true));
      require(walker.mode_name().starts_with("Bounce"), "stomp must bounce");
    }
    coast();
  }

  void soft_bump(std::size_t pulse_age) {
    press();
    hold_until_age(pulse_age);
    walker.advance(row(true, false, true));
    require(walker.mode_name().starts_with("SoftBump"),
            "soft block must catch the jump");
    hold_until_age(2);
    walker.advance(row(false));
    coast();
  }

  // Button held through the apex; gravity stays at the jump value until the
  // release a few steps into the fall, which the truth machine ignores.
  void full_jump(std::optional<std::size_t> stomp_age) {
    press();
    while (walker.mode_name().starts_with("Jump")) walker.advance(row(true));
    require(walker.mode_name().starts_with("Fall"),
            "a held jump must top out into a fall");
    hold_until_age(3);
    walker.advance(row(false));
    if (stomp_age) {
      while (walker.age() < *stomp_age) walker.advance(row(false));
      walker.advance(row(false, false, false, true));
      require(walker.mode_name().starts_with("Bounce"), "stomp must bounce");
    }
    coast();
  }
};

}  // namespace

MarioScript default_mario_script() {
  ScriptBuilder b;
  auto at = [&](double speed) {
    b.vx = speed;
    b.wait(34);
  };
  for (int rep = 0; rep < 2; ++rep) {
    at(0.5);
    b.release_jump(2);
    at(0.5);
    b.hard_bump(8, 10);
    at(1.5);
    b.full_jump(std::nullopt);
    at(0.5);
    b.soft_bump(10);
    at(0.5);
    b.release_jump(2);
    at(0.5);
    b.release_stomp(2, 4);
    at(3.0);
    b.release_jump(6);
    at(0.5);
    b.hard_bump(8, 10);
    at(1.5);
    b.full_jump(std::nullopt);
    at(0.5);
    b.soft_bump(10);
    at(0.5);
    b.release_jump(2);
    at(1.5);
    b.full_jump(5);
    at(0.5);
    b.hard_bump(8, 10);
    at(0.5);
    b.soft_bump(10);
    at(0.5);
    b.release_jump(2);
    at(3.0);
    b.hard_bump(8, 3);
    at(0.5);
    b.release_stomp(2, 4);
    at(1.5);
    b.full_jump(std::nullopt);
    at(0.5);
    b.hard_bump(8, 10);
    at(0.5);
    b.soft_bump(10);
    at(0.5);
    b.release_jump(2);
    at(1.5);
    b.full_jump(5);
  }
  b.wait(40);
  return b.walker.rows;
}

MarioScript single_band_mario_script() {
  ScriptBuilder b;
  b.vx = 0.5;
  for (int i = 0; i < 8; ++i) {
    b.wait(34);
    b.release_jump(8);
    b.wait(34);
    b.hard_bump(16, std::nullopt);
  }
  b.wait(40);
  return b.walker.rows;
}

LabeledTrace gen_mario(const MarioScript& script, bool quantize,
                       std::uint64_t seed) {
  (void)seed;  // the roll-out is exact; kept for generator interface parity
  if (script.size() < 2)
    throw std::invalid_argument("mario script too short (need 2 steps)");
  for (const auto& s : script) {
    if (!std::isfinite(s.vx) || s.vx < 0)
      throw std::invalid_argument("mario script: vx must be finite and >= 0");
    if (s.hard && s.soft)
      throw std::invalid_argument(
          "mario script: hard and soft collisions on the same step");
  }

  LabeledTrace out;
  out.truth = mario_truth_automaton();
  TruthWalker walker(out.truth);
  for (const auto& s : script) walker.advance(s);

  // The walker holds one lookahead state past the last row; the trace keeps
  // the aligned prefix, so step t pairs the inputs of row t with the state
  // those inputs were decided against.
  const std::size_t n = script.size();
  std::vector<double> height(walker.y.begin(),
                             walker.y.begin() + static_cast<long>(n));
  if (quantize)
    for (auto& v : height) v = std::round(v);
  std::vector<double> vx(n);
  std::vector<double> vy_true(walker.vy.begin(),
                              walker.vy.begin() + static_cast<long>(n));
  std::vector<std::uint8_t> a(n), hard(n), soft(n), enemy(n), landed(n);
  for (std::size_t t = 0; t < n; ++t) {
    vx[t] = script[t].vx;
    a[t] = script[t].a;
    hard[t] = script[t].hard;
    soft[t] = script[t].soft;
    enemy[t] = script[t].enemy;
    landed[t] = walker.ground_hit[t];
  }

  out.trace.dt = 1.0;
  out.trace.add_signal("y", std::move(height));
  out.trace.add_signal("vx", std::move(vx));
  out.trace.add_signal("vy_true", vy_true);
  out.trace.add_predicate("btnA", PredicateKind::Exogenous, std::move(a));
  out.trace.add_predicate("collide.hard", PredicateKind::Exogenous,
                          std::move(hard));
  out.trace.add_predicate("collide.soft", PredicateKind::Exogenous,
                          std::move(soft));
  out.trace.add_predicate("collide.enemy", PredicateKind::Exogenous,
                          std::move(enemy));
  out.trace.add_predicate("collide.ground", PredicateKind::Exogenous,
                          std::move(landed));

  out.labels.reserve(n);
  for (std::size_t t = 0; t < n; ++t)
    out.labels.push_back(out.truth.modes[walker.mode_of[t]].name);

  // The emitted trace must replay exactly through the interpreter; any
  // divergence is a generator bug, not a data property.
  const SimulationResult replay = simulate(out.truth, out.trace, 0.0);
  const auto& sim_vy = replay.trace.signal("vy");
  for (std::size_t t = 0; t < n; ++t)
    if (sim_vy[t] != vy_true[t] || replay.mode_labels[t] != out.labels[t])
      throw std::logic_error("mario roll-out does not replay at step " +
                             std::to_string(t));
  return out;
}

}  // namespace charda
