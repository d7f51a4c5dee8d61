#include "charda/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace charda {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, std::size_t row) {
  double v = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw std::invalid_argument("malformed numeric cell at row " +
                                std::to_string(row) + ": '" + cell + "'");
  if (!std::isfinite(v))
    throw std::invalid_argument("non-finite value at row " +
                                std::to_string(row));
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

int signum_band(double v, double eps) {
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

std::size_t Trace::length() const {
  if (!signals.empty()) return signals.front().values.size();
  if (!predicates.empty()) return predicates.front().values.size();
  return 0;
}

bool Trace::has_signal(const std::string& name) const {
  return std::any_of(signals.begin(), signals.end(),
                     [&](const SignalColumn& s) { return s.name == name; });
}

bool Trace::has_predicate(const std::string& name) const {
  return std::any_of(predicates.begin(), predicates.end(),
                     [&](const PredicateColumn& p) { return p.name == name; });
}

const std::vector<double>& Trace::signal(const std::string& name) const {
  for (const auto& s : signals)
    if (s.name == name) return s.values;
  throw std::invalid_argument("unknown signal '" + name + "'");
}

const PredicateColumn& Trace::predicate(const std::string& name) const {
  for (const auto& p : predicates)
    if (p.name == name) return p;
  throw std::invalid_argument("unknown predicate '" + name + "'");
}

void Trace::add_signal(const std::string& name, std::vector<double> values) {
  if (has_signal(name) || has_predicate(name))
    throw std::invalid_argument("duplicate column '" + name + "'");
  signals.push_back({name, std::move(values)});
}

void Trace::add_predicate(const std::string& name, PredicateKind kind,
                          std::vector<std::uint8_t> values) {
  if (has_signal(name) || has_predicate(name))
    throw std::invalid_argument("duplicate column '" + name + "'");
  predicates.push_back({name, kind, std::move(values)});
}

void Trace::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t n = length();
  if (n < 2)
    throw std::invalid_argument("trace too short (need at least 2 rows, got " +
                                std::to_string(n) + ")");
  for (const auto& s : signals) {
    if (s.values.size() != n)
      throw std::invalid_argument("signal '" + s.name + "' length mismatch");
    for (double v : s.values)
      if (!std::isfinite(v))
        throw std::invalid_argument("non-finite value in signal '" + s.name +
                                    "'");
  }
  for (const auto& p : predicates) {
    if (p.values.size() != n)
      throw std::invalid_argument("predicate '" + p.name + "' length mismatch");
    for (auto v : p.values)
      if (v > 1)
        throw std::invalid_argument("predicate '" + p.name +
                                    "' holds a non-boolean value");
  }
}

Trace load_trace(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw std::invalid_argument("trace too short (no header)");
  if (header[0] != "t")
    throw std::invalid_argument("first header column must be 't'");

  Trace trace;
  // Column plan: index in header -> destination.
  struct Dest {
    bool is_signal;
    std::size_t index;
  };
  std::vector<Dest> plan;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& cell = header[c];
    auto colon = cell.find(':');
    if (colon == std::string::npos) {
      plan.push_back({true, trace.signals.size()});
      trace.signals.push_back({cell, {}});
    } else {
      std::string name = cell.substr(0, colon);
      std::string kind = cell.substr(colon + 1);
      PredicateKind k;
      if (kind == "exo")
        k = PredicateKind::Exogenous;
      else if (kind == "endo")
        k = PredicateKind::Endogenous;
      else
        throw std::invalid_argument("unknown predicate kind '" + kind +
                                    "' in header");
      plan.push_back({false, trace.predicates.size()});
      trace.predicates.push_back({name, k, {}});
    }
  }

  std::vector<double> times;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) +
                                  " cells, expected " +
                                  std::to_string(header.size()));
    times.push_back(parse_double(cells[0], row));
    if (times.size() >= 2 && !(times[times.size() - 2] < times.back()))
      throw std::invalid_argument("non-monotone time column at row " +
                                  std::to_string(row));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = parse_double(cells[c], row);
      const Dest& d = plan[c - 1];
      if (d.is_signal) {
        trace.signals[d.index].values.push_back(v);
      } else {
        if (v != 0.0 && v != 1.0)
          throw std::invalid_argument("predicate value must be 0 or 1 at row " +
                                      std::to_string(row));
        trace.predicates[d.index].values.push_back(
            static_cast<std::uint8_t>(v));
      }
    }
    ++row;
  }
  if (row < 2)
    throw std::invalid_argument("trace too short (need at least 2 rows, got " +
                                std::to_string(row) + ")");
  trace.dt = times[1] - times[0];
  trace.validate();
  return trace;
}

Trace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_trace(in);
}

void save_trace(const Trace& trace, std::ostream& out) {
  trace.validate();
  out << "t";
  for (const auto& s : trace.signals) out << ',' << s.name;
  for (const auto& p : trace.predicates)
    out << ',' << p.name
        << (p.kind == PredicateKind::Exogenous ? ":exo" : ":endo");
  out << '\n';
  const std::size_t n = trace.length();
  for (std::size_t k = 0; k < n; ++k) {
    out << format_double(static_cast<double>(k) * trace.dt);
    for (const auto& s : trace.signals) out << ',' << format_double(s.values[k]);
    for (const auto& p : trace.predicates)
      out << ',' << (p.values[k] ? '1' : '0');
    out << '\n';
  }
}

void save_trace_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_trace(trace, out);
}

Trace derive_signal(const Trace& trace, const std::string& base,
                    const std::string& out) {
  const auto& values = trace.signal(base);
  if (trace.has_signal(out) || trace.has_predicate(out))
    throw std::invalid_argument("output column '" + out + "' already exists");
  std::vector<double> d(values.size());
  for (std::size_t k = 1; k < values.size(); ++k)
    d[k] = (values[k] - values[k - 1]) / trace.dt;
  d[0] = d.size() > 1 ? d[1] : 0.0;
  Trace result = trace;
  result.add_signal(out, std::move(d));
  return result;
}

Trace compute_endogenous_predicates(const Trace& trace,
                                    const std::string& signal,
                                    double eps_sign) {
  const auto& v = trace.signal(signal);
  const std::size_t n = v.size();

  std::vector<int> sign(n);
  for (std::size_t k = 0; k < n; ++k) sign[k] = signum_band(v[k], eps_sign);

  // One further backward difference gives acceleration, with the same
  // first-sample copy rule as derive_signal.
  std::vector<double> accel(n);
  for (std::size_t k = 1; k < n; ++k) accel[k] = (v[k] - v[k - 1]) / trace.dt;
  accel[0] = n > 1 ? accel[1] : 0.0;

  std::vector<std::uint8_t> zero_down(n, 0), zero_up(n, 0);
  std::vector<std::uint8_t> sneg(n, 0), szero(n, 0), spos(n, 0);
  std::vector<std::uint8_t> aneg(n, 0), azero(n, 0), apos(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      zero_down[k] = sign[k - 1] == 1 && sign[k] <= 0;
      zero_up[k] = sign[k - 1] == -1 && sign[k] >= 0;
    }
    sneg[k] = sign[k] < 0;
    szero[k] = sign[k] == 0;
    spos[k] = sign[k] > 0;
    int a = signum_band(accel[k], eps_sign);
    aneg[k] = a < 0;
    azero[k] = a == 0;
    apos[k] = a > 0;
  }

  Trace result = trace;
  auto add = [&](const char* suffix, std::vector<std::uint8_t>& col) {
    result.add_predicate(signal + suffix, PredicateKind::Endogenous,
                         std::move(col));
  };
  add(".zero_down", zero_down);
  add(".zero_up", zero_up);
  add(".sign_neg", sneg);
  add(".sign_zero", szero);
  add(".sign_pos", spos);
  add(".accel_neg", aneg);
  add(".accel_zero", azero);
  add(".accel_pos", apos);
  return result;
}

Trace derive_edge_predicates(const Trace& trace) {
  Trace result = trace;
  for (const auto& p : trace.predicates) {
    if (p.kind != PredicateKind::Exogenous) continue;
    const std::string pressed = p.name + ".pressed";
    const std::string released = p.name + ".released";
    if (result.has_predicate(pressed) || result.has_predicate(released))
      continue;
    const std::size_t n = p.values.size();
    std::vector<std::uint8_t> on(n, 0), off(n, 0);
    for (std::size_t k = 1; k < n; ++k) {
      on[k] = !p.values[k - 1] && p.values[k];
      off[k] = p.values[k - 1] && !p.values[k];
    }
    result.add_predicate(pressed, PredicateKind::Exogenous, std::move(on));
    result.add_predicate(released, PredicateKind::Exogenous, std::move(off));
  }
  return result;
}

}  // namespace charda
