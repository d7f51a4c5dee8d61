#include "charda/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace charda {

std::vector<ModelTemplate> default_templates() {
  return {{"constant", TemplateKind::Constant}, {"linear", TemplateKind::Linear}};
}

ModelTemplate template_by_id(const std::string& id) {
  if (id == "constant") return {"constant", TemplateKind::Constant};
  if (id == "linear") return {"linear", TemplateKind::Linear};
  throw std::invalid_argument("unknown template '" + id + "'");
}

double penalty(PenaltyCriterion criterion, int dim, std::size_t n) {
  if (dim < 1) throw std::invalid_argument("penalty: dim must be >= 1");
  if (n < 1) throw std::invalid_argument("penalty: n must be >= 1");
  const double logn = std::log(static_cast<double>(n));
  // Both branches share the MDL sum so that MDL - BIC == dim bitwise: the
  // subtraction below is exact (dim and the sum are multiples of the sum's
  // ulp), which a separately rounded dim*logn/2 would not guarantee.
  const double mdl = dim * logn / 2.0 + dim;
  switch (criterion) {
    case PenaltyCriterion::Bic:
      return mdl - dim;
    case PenaltyCriterion::Mdl:
      return mdl;
  }
  throw std::invalid_argument("penalty: unknown criterion");
}

IntervalStats& IntervalStats::operator+=(const IntervalStats& o) {
  n += o.n;
  s1 += o.s1;
  sk += o.sk;
  skk += o.skk;
  skv += o.skv;
  svv += o.svv;
  return *this;
}

SufficientStats::SufficientStats(const std::vector<double>& values) {
  const std::size_t n = values.size();
  p1_.assign(n + 1, 0.0);
  pt_.assign(n + 1, 0.0);
  p2_.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    p1_[k + 1] = p1_[k] + values[k];
    pt_[k + 1] = pt_[k] + static_cast<double>(k) * values[k];
    p2_[k + 1] = p2_[k] + values[k] * values[k];
  }
}

IntervalStats SufficientStats::interval(std::size_t i, std::size_t j) const {
  if (i >= j || j > size())
    throw std::invalid_argument("interval [i,j) out of range");
  const double len = static_cast<double>(j - i);
  IntervalStats s;
  s.n = len;
  s.s1 = p1_[j] - p1_[i];
  // Shift absolute-index sums to the interval-relative index k = t - i.
  s.skv = (pt_[j] - pt_[i]) - static_cast<double>(i) * s.s1;
  s.sk = len * (len - 1.0) / 2.0;
  s.skk = (len - 1.0) * len * (2.0 * len - 1.0) / 6.0;
  s.svv = p2_[j] - p2_[i];
  return s;
}

double gaussian_loglik(std::size_t n, double rss, double sigma2) {
  const double dn = static_cast<double>(n);
  return -0.5 * dn * std::log(2.0 * std::numbers::pi * sigma2) -
         rss / (2.0 * sigma2);
}

FittedModel fit(const ModelTemplate& tmpl, const IntervalStats& stats,
                double sigma2_floor) {
  if (!(sigma2_floor > 0.0))
    throw std::invalid_argument("sigma2 floor must be positive");
  const double n = stats.n;
  if (n < tmpl.basis_size() + 1)
    throw std::invalid_argument("degenerate design: " + std::to_string(n) +
                                " points for template '" + tmpl.id + "'");
  FittedModel m;
  m.tmpl = tmpl;
  m.n = static_cast<std::size_t>(n);
  if (tmpl.kind == TemplateKind::Constant) {
    m.coef[0] = stats.s1 / n;
    m.rss = stats.svv - m.coef[0] * stats.s1;
  } else {
    const double d = n * stats.skk - stats.sk * stats.sk;
    if (!(d > 0.0)) throw std::invalid_argument("degenerate design: singular");
    m.coef[1] = (n * stats.skv - stats.sk * stats.s1) / d;
    m.coef[0] = (stats.s1 - m.coef[1] * stats.sk) / n;
    m.rss = stats.svv - m.coef[0] * stats.s1 - m.coef[1] * stats.skv;
  }
  m.rss = std::max(m.rss, 0.0);
  m.sigma2 = std::max(m.rss / n, sigma2_floor);
  m.loglik = gaussian_loglik(m.n, m.rss, m.sigma2);
  return m;
}

FittedModel fit_values(const ModelTemplate& tmpl,
                       const std::vector<double>& values, std::size_t i,
                       std::size_t j, double sigma2_floor) {
  if (i >= j || j > values.size())
    throw std::invalid_argument("fit interval out of range");
  IntervalStats s;
  s.n = static_cast<double>(j - i);
  for (std::size_t t = i; t < j; ++t) {
    const double k = static_cast<double>(t - i);
    s.s1 += values[t];
    s.sk += k;
    s.skk += k * k;
    s.skv += k * values[t];
    s.svv += values[t] * values[t];
  }
  return fit(tmpl, s, sigma2_floor);
}

std::pair<double, FittedModel> segment_cost(const SufficientStats& stats,
                                            std::size_t i, std::size_t j,
                                            const ModelTemplate& tmpl,
                                            PenaltyCriterion criterion,
                                            double sigma2_floor) {
  FittedModel m = fit(tmpl, stats.interval(i, j), sigma2_floor);
  const double cost = -m.loglik + penalty(criterion, tmpl.dim(), j - i);
  return {cost, m};
}

namespace {

// (unbiased sd, two-sided 97.5% t quantile); degenerate -> nullopt-ish flag.
bool residual_scale(const FittedModel& model, double* sd, double* tq) {
  const int p = model.tmpl.basis_size();
  if (model.n <= static_cast<std::size_t>(p)) return false;
  const double df = static_cast<double>(model.n - p);
  *sd = std::sqrt(model.rss / df);
  boost::math::students_t dist(df);
  *tq = boost::math::quantile(dist, 0.975);
  return true;
}

}  // namespace

Interval95 intercept_ci(const FittedModel& model, const IntervalStats& stats) {
  double sd = 0, tq = 0;
  if (!residual_scale(model, &sd, &tq))
    return {model.coef[0], model.coef[0]};
  double se;
  if (model.tmpl.kind == TemplateKind::Constant) {
    se = sd / std::sqrt(stats.n);
  } else {
    const double d = stats.n * stats.skk - stats.sk * stats.sk;
    se = sd * std::sqrt(stats.skk / d);
  }
  return {model.coef[0] - tq * se, model.coef[0] + tq * se};
}

Interval95 slope_ci(const FittedModel& model, const IntervalStats& stats) {
  if (model.tmpl.kind == TemplateKind::Constant) return {0.0, 0.0};
  double sd = 0, tq = 0;
  if (!residual_scale(model, &sd, &tq))
    return {model.coef[1], model.coef[1]};
  const double d = stats.n * stats.skk - stats.sk * stats.sk;
  const double se = sd * std::sqrt(stats.n / d);
  return {model.coef[1] - tq * se, model.coef[1] + tq * se};
}

}  // namespace charda
