#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "charda/generators.hpp"
#include "charda/learn.hpp"

namespace {

using namespace charda;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Shared flag bundles

struct GenParams {
  LawnmowerParams lawnmower;
  RandomManeuverParams random;
  std::string mario_script = "default";
  bool quantize = false;
  std::uint64_t seed = 0;
};

void add_lawnmower_flags(CLI::App* cmd, GenParams& p) {
  cmd->add_option("--leg-steps", p.lawnmower.leg_steps, "Steps per straight leg");
  cmd->add_option("--turn-steps", p.lawnmower.turn_steps, "Steps per turn");
  cmd->add_option("--repeats", p.lawnmower.repeats, "Leg/turn repetitions");
  cmd->add_option("--speed", p.lawnmower.speed, "Ground speed");
  cmd->add_option("--turn-rate", p.lawnmower.turn_rate, "Turn heading rate");
  cmd->add_option("--noise-sd", p.lawnmower.noise_sd,
                  "Heading-rate noise standard deviation");
}

void add_random_flags(CLI::App* cmd, GenParams& p) {
  cmd->add_option("--maneuver-steps", p.random.maneuver_steps,
                  "Steps per maneuver");
  cmd->add_option("--count", p.random.count, "Number of maneuvers");
  cmd->add_option("--turn-rate", p.random.turn_rate, "Turn heading rate");
  cmd->add_option("--noise-sd", p.random.noise_sd,
                  "Heading-rate noise standard deviation");
}

void add_mario_flags(CLI::App* cmd, GenParams& p) {
  cmd->add_option("--script", p.mario_script, "Button script: default, single-band")
      ->check(CLI::IsMember({"default", "single-band"}));
  cmd->add_flag("--quantize", p.quantize, "Round the height to integers");
}

LabeledTrace run_generator(const std::string& kind, const GenParams& p,
                           std::uint64_t seed) {
  if (kind == "lawnmower") return gen_lawnmower(p.lawnmower, seed);
  if (kind == "random") return gen_random_maneuvers(p.random, seed);
  if (kind == "mario") {
    const MarioScript script = p.mario_script == "single-band"
                                   ? single_band_mario_script()
                                   : default_mario_script();
    return gen_mario(script, p.quantize, seed);
  }
  throw std::invalid_argument("unknown generator '" + kind + "'");
}

struct LearnFlags {
  std::string signal;
  std::string derive_from;
  std::string penalty = "mdl";
  std::string templates;
  std::size_t min_segment = 3;
  std::size_t stride = 1;
  double sigma2_floor = kDefaultSigma2Floor;
  double theta_universal = 0.9;
  double theta_relevant = 0.4;
  int guard_window = 0;
  double eps_ext = 0.25;
  double eps_sign = 1e-6;
};

void add_learn_flags(CLI::App* cmd, LearnFlags& f) {
  cmd->add_option("--signal", f.signal, "Signal column to model");
  cmd->add_option("--derive-from", f.derive_from,
                  "Derive the modelled signal from this column's differences");
  cmd->add_option("--penalty", f.penalty, "Segmentation penalty: mdl, bic")
      ->check(CLI::IsMember({"mdl", "bic"}));
  cmd->add_option("--templates", f.templates,
                  "Comma-separated template ids (default: all)");
  cmd->add_option("--min-segment", f.min_segment, "Minimum segment length");
  cmd->add_option("--stride", f.stride, "Switchpoint stride");
  cmd->add_option("--sigma2-floor", f.sigma2_floor, "Noise variance floor");
  cmd->add_option("--theta-universal", f.theta_universal,
                  "Guard conjunct threshold");
  cmd->add_option("--theta-relevant", f.theta_relevant,
                  "Guard disjunct threshold");
  cmd->add_option("--guard-window", f.guard_window, "Predicate dilation window");
  cmd->add_option("--eps-ext", f.eps_ext, "Extremum predicate half-width");
  cmd->add_option("--eps-sign", f.eps_sign, "Sign predicate dead band");
}

LearnOptions to_options(const LearnFlags& f) {
  LearnOptions o;
  o.signal = f.signal;
  o.derive_from = f.derive_from;
  o.segmentation.criterion =
      f.penalty == "bic" ? PenaltyCriterion::Bic : PenaltyCriterion::Mdl;
  if (!f.templates.empty()) {
    o.segmentation.templates.clear();
    std::stringstream ss(f.templates);
    std::string id;
    while (std::getline(ss, id, ','))
      o.segmentation.templates.push_back(template_by_id(id));
    if (o.segmentation.templates.empty())
      throw std::invalid_argument("no templates named");
  }
  o.segmentation.min_segment = f.min_segment;
  o.segmentation.stride = f.stride;
  o.segmentation.sigma2_floor = f.sigma2_floor;
  o.guards.theta_universal = f.theta_universal;
  o.guards.theta_relevant = f.theta_relevant;
  o.guards.window = f.guard_window;
  o.guards.eps_ext = f.eps_ext;
  o.guards.eps_sign = f.eps_sign;
  return o;
}

std::vector<std::string> assignment_labels(const ModeSet& modes) {
  std::vector<std::string> out;
  out.reserve(modes.assignment.size());
  for (int m : modes.assignment) out.push_back("m" + std::to_string(m));
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string template_name(const ModelTemplate& t) { return t.id; }

std::string segmentation_report(const LearnResult& r) {
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf, "segments %zu total-cost %.6f\n",
                r.segmentation.segments.size(), r.segmentation.total_cost);
  s += buf;
  for (const auto& seg : r.segmentation.segments) {
    std::snprintf(buf, sizeof buf,
                  "segment [%zu,%zu) %s coef %.6g %.6g cost %.6f\n", seg.start,
                  seg.end, template_name(seg.model.tmpl).c_str(),
                  seg.model.coef[0], seg.model.coef[1], seg.cost);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "modes %zu objective %.6f\n",
                r.modes.modes.size(), r.modes.objective());
  s += buf;
  for (std::size_t m = 0; m < r.modes.modes.size(); ++m) {
    const Mode& mode = r.modes.modes[m];
    std::snprintf(buf, sizeof buf,
                  "mode m%zu steps %zu occurrences %zu %s coef %.6g %.6g\n", m,
                  mode.steps(), mode.occurrences.size(),
                  template_name(mode.pooled.tmpl).c_str(), mode.pooled.coef[0],
                  mode.pooled.coef[1]);
    s += buf;
  }
  return s;
}

std::string guard_report(const LearnResult& r) {
  char buf[256];
  std::string s;
  for (const auto& [key, guard] : r.guards) {
    const SourceTable& table = r.analysis.tables[key.first];
    std::snprintf(buf, sizeof buf, "transition m%d -> m%d events %zu of %zu\n",
                  key.first, key.second, guard.events, table.total);
    s += buf;
    auto line = [&](const char* role, const std::string& name,
                    const PredicateScore& score) {
      std::snprintf(buf, sizeof buf, "  %s %s npmi %.4f %s joint %zu pred %zu\n",
                    role, name.c_str(), score.score,
                    score.kind == PredicateKind::Exogenous ? "exo" : "endo",
                    score.count_joint, score.count_pred);
      s += buf;
    };
    for (const auto& [name, score] : guard.conjuncts)
      line("conjunct", name, score);
    for (const auto& [name, score] : guard.disjuncts)
      line("disjunct", name, score);
    if (guard.unexplained()) s += "  unexplained\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Subcommand drivers

struct GenCli {
  GenParams params;
  std::string out;
  std::string kind;
};

int run_gen(const GenCli& g) {
  const LabeledTrace data = run_generator(g.kind, g.params, g.params.seed);
  save_trace_file(data.trace, g.out + ".csv");
  save_labels_file(g.out + ".labels.csv", data.labels);
  save_automaton_file(data.truth, g.out + ".truth.json");
  std::fprintf(stderr, "wrote %s.csv (%zu steps), %s.labels.csv, %s.truth.json\n",
               g.out.c_str(), data.trace.length(), g.out.c_str(), g.out.c_str());
  return 0;
}

struct LearnCli {
  LearnFlags flags;
  std::string trace_path;
  std::string out;
  std::string report_path;
  std::string guard_report_path;
};

int run_learn(const LearnCli& l) {
  const Trace trace = load_trace_file(l.trace_path);
  const LearnResult r = learn(trace, to_options(l.flags));
  save_automaton_file(r.automaton, l.out);
  if (!l.report_path.empty())
    write_text_file(l.report_path, segmentation_report(r));
  if (!l.guard_report_path.empty())
    write_text_file(l.guard_report_path, guard_report(r));
  std::fprintf(stderr, "learned %zu modes, %zu transitions from %zu steps\n",
               r.automaton.modes.size(), r.automaton.transitions.size(),
               r.augmented.length());
  return 0;
}

struct SimulateCli {
  std::string model_path;
  std::string trace_path;
  std::string out;
  std::string reference;
  std::string plot_base;
  double initial = 0.0;
  bool initial_set = false;
  int guard_window = 0;
  double eps_ext = 0.25;
  double eps_sign = 1e-6;
};

int run_simulate(const SimulateCli& s) {
  const HybridAutomaton ha = load_automaton_file(s.model_path);
  const Trace inputs = load_trace_file(s.trace_path);

  double initial = s.initial;
  if (!s.initial_set) {
    if (!s.reference.empty() && inputs.has_signal(s.reference))
      initial = inputs.signal(s.reference).front();
    else if (inputs.has_signal(ha.signal))
      initial = inputs.signal(ha.signal).front();
    else
      initial = 0.0;
  }

  GuardConfig config;
  config.window = s.guard_window;
  config.eps_ext = s.eps_ext;
  config.eps_sign = s.eps_sign;
  const SimulationResult sim = simulate(ha, inputs, initial, config);
  save_trace_file(sim.trace, s.out);

  const std::vector<double>& v = sim.trace.signal(ha.signal);
  if (!s.plot_base.empty()) {
    char buf[64];
    std::string series;
    series = "step,value\n";
    for (std::size_t t = 0; t < v.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%zu,%.10g\n", t, v[t]);
      series += buf;
    }
    write_text_file(s.plot_base + ".simulated.csv", series);
    if (!s.reference.empty()) {
      const std::vector<double>& ref = inputs.signal(s.reference);
      series = "step,value\n";
      for (std::size_t t = 0; t < ref.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.10g\n", t, ref[t]);
        series += buf;
      }
      write_text_file(s.plot_base + ".observed.csv", series);
    }
  }

  if (!s.reference.empty()) {
    const double mae = mean_absolute_error(v, inputs.signal(s.reference));
    std::printf("mae %.4f\n", mae);
  }
  std::fprintf(stderr, "simulated %zu steps from %s\n", v.size(),
               s.model_path.c_str());
  return 0;
}

struct EvalCli {
  LearnFlags flags;
  GenParams params;
  std::string trace_path;
  std::string labels_path;
  std::string gen_kind;
  std::size_t trials = 30;
  std::uint64_t seed = 0;
  bool trim_extremes = false;
  std::size_t threads = 1;
};

double eval_one(const Trace& trace, const std::vector<std::string>& truth,
                const LearnOptions& opts) {
  const LearnResult r = learn(trace, opts);
  return attribution_error(assignment_labels(r.modes), truth);
}

int run_eval(const EvalCli& e) {
  LearnFlags flags = e.flags;
  if (e.gen_kind == "mario" && flags.signal.empty() &&
      flags.derive_from.empty()) {
    flags.signal = "vy_true";
  }
  const LearnOptions opts = to_options(flags);

  // eval exposes one flag set for the aircraft generators; --noise-sd and
  // --turn-rate mean the same thing for both.
  GenParams params = e.params;
  params.random.noise_sd = params.lawnmower.noise_sd;
  params.random.turn_rate = params.lawnmower.turn_rate;

  if (e.gen_kind.empty()) {
    if (e.trace_path.empty() || e.labels_path.empty())
      throw std::invalid_argument("eval needs --gen or both --trace and --labels");
    const Trace trace = load_trace_file(e.trace_path);
    const std::vector<std::string> truth = load_labels_file(e.labels_path);
    std::printf("error %.4f\n", eval_one(trace, truth, opts));
    return 0;
  }

  const std::size_t trials = std::max<std::size_t>(1, e.trials);
  std::vector<double> errors(trials, 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex fail_mu;
  std::exception_ptr fail;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        const LabeledTrace data = run_generator(e.gen_kind, params, e.seed + i);
        errors[i] = eval_one(data.trace, data.labels, opts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!fail) fail = std::current_exception();
        return;
      }
    }
  };
  const std::size_t nthreads = std::min(std::max<std::size_t>(1, e.threads), trials);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (fail) std::rethrow_exception(fail);

  double sum = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::printf("trial %zu error %.4f\n", i, errors[i]);
    sum += errors[i];
  }
  std::printf("mean %.4f\n", sum / static_cast<double>(trials));
  if (e.trim_extremes) {
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    std::size_t lo = 0, hi = sorted.size();
    if (sorted.size() >= 3) {
      lo = 1;
      hi = sorted.size() - 1;
    }
    double trimmed = 0.0;
    for (std::size_t i = lo; i < hi; ++i) trimmed += sorted[i];
    std::printf("trimmed-mean %.4f\n",
                trimmed / static_cast<double>(hi - lo));
  }
  return 0;
}

struct ExportCli {
  std::string model_path;
  std::string format = "graph";
  std::string out;
};

int run_export(const ExportCli& x) {
  const HybridAutomaton ha = load_automaton_file(x.model_path);
  if (x.format == "graph") {
    write_text_file(x.out, export_dot(ha));
  } else {
    save_automaton_file(ha, x.out);
  }
  std::fprintf(stderr, "wrote %s\n", x.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid automaton learning from observed traces"};
  app.require_subcommand(1);

  GenCli gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a benchmark trace");
  gen_cmd->require_subcommand(1);
  for (const char* kind : {"lawnmower", "random", "mario"}) {
    CLI::App* sub = gen_cmd->add_subcommand(kind);
    sub->add_option("--out", gen.out, "Output path stem")->required();
    sub->add_option("--seed", gen.params.seed, "Generator seed");
    if (std::string(kind) == "lawnmower") add_lawnmower_flags(sub, gen.params);
    if (std::string(kind) == "random") add_random_flags(sub, gen.params);
    if (std::string(kind) == "mario") add_mario_flags(sub, gen.params);
    sub->callback([&gen, kind] { gen.kind = kind; });
  }

  LearnCli learn_cli;
  CLI::App* learn_cmd = app.add_subcommand("learn", "Learn an automaton");
  learn_cmd->add_option("--trace", learn_cli.trace_path, "Input trace CSV")
      ->required();
  learn_cmd->add_option("--out", learn_cli.out, "Model output path")->required();
  learn_cmd->add_option("--report", learn_cli.report_path,
                        "Segmentation report path");
  learn_cmd->add_option("--guard-report", learn_cli.guard_report_path,
                        "Guard score report path");
  add_learn_flags(learn_cmd, learn_cli.flags);

  SimulateCli sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Replay a learned model");
  sim_cmd->add_option("--model", sim.model_path, "Model JSON path")->required();
  sim_cmd->add_option("--trace", sim.trace_path, "Input trace CSV")->required();
  sim_cmd->add_option("--out", sim.out, "Simulated trace output")->required();
  sim_cmd->add_option("--reference", sim.reference,
                      "Reference column for the error report");
  CLI::Option* init_opt =
      sim_cmd->add_option("--initial", sim.initial, "Initial signal value");
  sim_cmd->add_option("--emit-plot", sim.plot_base,
                      "Write step,value series to this path stem");
  sim_cmd->add_option("--guard-window", sim.guard_window,
                      "Predicate dilation window");
  sim_cmd->add_option("--eps-ext", sim.eps_ext, "Extremum predicate half-width");
  sim_cmd->add_option("--eps-sign", sim.eps_sign, "Sign predicate dead band");

  EvalCli eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score attribution against truth labels");
  eval_cmd->add_option("--trace", eval.trace_path, "Input trace CSV");
  eval_cmd->add_option("--labels", eval.labels_path, "Truth labels CSV");
  eval_cmd->add_option("--gen", eval.gen_kind,
                       "Generate trials: lawnmower, random, mario")
      ->check(CLI::IsMember({"lawnmower", "random", "mario"}));
  eval_cmd->add_option("--trials", eval.trials, "Number of generated trials");
  eval_cmd->add_option("--seed", eval.seed, "Base seed; trial i uses seed+i");
  eval_cmd->add_flag("--trim-extremes", eval.trim_extremes,
                     "Drop the lowest and highest trial before averaging");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads");
  add_lawnmower_flags(eval_cmd, eval.params);
  eval_cmd->add_option("--maneuver-steps", eval.params.random.maneuver_steps,
                       "Steps per maneuver");
  eval_cmd->add_option("--count", eval.params.random.count,
                       "Number of maneuvers");
  add_mario_flags(eval_cmd, eval.params);
  add_learn_flags(eval_cmd, eval.flags);

  ExportCli exp;
  CLI::App* export_cmd = app.add_subcommand("export", "Render a learned model");
  export_cmd->add_option("--model", exp.model_path, "Model JSON path")
      ->required();
  export_cmd->add_option("--format", exp.format, "Output format: graph, json")
      ->check(CLI::IsMember({"graph", "json"}));
  export_cmd->add_option("--out", exp.out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (learn_cmd->parsed()) return run_learn(learn_cli);
    if (sim_cmd->parsed()) {
      sim.initial_set = init_opt->count() > 0;
      return run_simulate(sim);
    }
    if (eval_cmd->parsed()) return run_eval(eval);
    if (export_cmd->parsed()) return run_export(exp);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
