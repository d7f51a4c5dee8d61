#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace charda {

// A predicate column is either an external input (controls, collisions) or a
// feature computed from an observed signal.  The distinction matters when
// guards are ranked: external causes outrank derived ones.
enum class PredicateKind { Exogenous, Endogenous };

struct SignalColumn {
  std::string name;
  std::vector<double> values;
  bool operator==(const SignalColumn&) const = default;
};

struct PredicateColumn {
  std::string name;
  PredicateKind kind = PredicateKind::Exogenous;
  std::vector<std::uint8_t> values;  // 0 or 1
  bool operator==(const PredicateColumn&) const = default;
};

// Uniformly sampled multivariate trace.  All columns share one length n >= 2.
// dt is the sample period in time units per step.
struct Trace {
  double dt = 1.0 / 60.0;
  std::vector<SignalColumn> signals;
  std::vector<PredicateColumn> predicates;

  std::size_t length() const;
  bool has_signal(const std::string& name) const;
  bool has_predicate(const std::string& name) const;
  const std::vector<double>& signal(const std::string& name) const;
  const PredicateColumn& predicate(const std::string& name) const;
  void add_signal(const std::string& name, std::vector<double> values);
  void add_predicate(const std::string& name, PredicateKind kind,
                     std::vector<std::uint8_t> values);

  // Throws std::invalid_argument when a column length disagrees, a value is
  // non-finite, a predicate holds something other than 0/1, or dt <= 0.
  void validate() const;

  bool operator==(const Trace&) const = default;
};

// CSV exchange format.  First line is a header: "t", plain names for signals,
// "name:exo" / "name:endo" for predicates.  '#' starts a comment line.
Trace load_trace(std::istream& in);
Trace load_trace_file(const std::string& path);
void save_trace(const Trace& trace, std::ostream& out);
void save_trace_file(const Trace& trace, const std::string& path);

// Backward finite difference of an existing signal: out[k] = (base[k] -
// base[k-1]) / dt, with out[0] = out[1].  Returns a copy of the trace with the
// new column appended.
Trace derive_signal(const Trace& trace, const std::string& base,
                    const std::string& out);

// Sign features of one signal, with a dead band around zero: crossing
// predicates, sign bands, and acceleration sign bands from one further
// difference.  Names are "<signal>.zero_down", ".zero_up", ".sign_neg",
// ".sign_zero", ".sign_pos", ".accel_neg", ".accel_zero", ".accel_pos".
Trace compute_endogenous_predicates(const Trace& trace,
                                    const std::string& signal,
                                    double eps_sign = 1e-6);

// Rising and falling edges of every exogenous predicate column.  A raw
// control column means "held"; "<p>.pressed" marks the step it turns on and
// "<p>.released" the step it turns off.  Step 0 is never an edge.  Columns
// whose edge names already exist are left alone.
Trace derive_edge_predicates(const Trace& trace);

// -1, 0, +1 with |v| <= eps mapped to 0.
int signum_band(double v, double eps);

}  // namespace charda
