#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace charda {

// Per-segment regression templates over the relative step index k = 0..len-1.
// The regressor being relative, not absolute, is what lets one mode pool
// several non-contiguous occurrences later on.
enum class TemplateKind { Constant, Linear };

struct ModelTemplate {
  std::string id;
  TemplateKind kind = TemplateKind::Constant;

  int basis_size() const { return kind == TemplateKind::Linear ? 2 : 1; }
  // Parameter count for penalties: basis coefficients plus the noise variance.
  int dim() const { return basis_size() + 1; }
  bool operator==(const ModelTemplate&) const = default;
};

std::vector<ModelTemplate> default_templates();
ModelTemplate template_by_id(const std::string& id);

enum class PenaltyCriterion { Bic, Mdl };

// Natural-log penalties per fitted segment; n is the segment's point count.
double penalty(PenaltyCriterion criterion, int dim, std::size_t n);

constexpr double kDefaultSigma2Floor = 1.0 / 12.0;

// Interval sums over relative index k: count, sum v, sum k, sum k^2,
// sum k*v, sum v^2.  Additive, so pooled fits just add per-occurrence stats.
struct IntervalStats {
  double n = 0, s1 = 0, sk = 0, skk = 0, skv = 0, svv = 0;
  IntervalStats& operator+=(const IntervalStats& o);
};

// O(n) prefix tables over one signal; any [i,j) interval in O(1).
class SufficientStats {
 public:
  explicit SufficientStats(const std::vector<double>& values);
  IntervalStats interval(std::size_t i, std::size_t j) const;
  std::size_t size() const { return p1_.size() - 1; }

 private:
  std::vector<double> p1_, pt_, p2_;  // prefix sums of v, t*v, v^2
};

struct FittedModel {
  int template_index = 0;  // into the template set the fit was run with
  ModelTemplate tmpl;
  double coef[2] = {0, 0};  // intercept, slope (slope unused for Constant)
  double rss = 0;
  double sigma2 = 0;  // max(rss/n, floor)
  double loglik = 0;
  std::size_t n = 0;
};

// Gaussian maximum-likelihood fit from interval sums.  Throws on a degenerate
// design (n < basis size + 1 or singular normal equations).
FittedModel fit(const ModelTemplate& tmpl, const IntervalStats& stats,
                double sigma2_floor);

// Convenience fit over a raw slice, relative index starting at 0.
FittedModel fit_values(const ModelTemplate& tmpl,
                       const std::vector<double>& values, std::size_t i,
                       std::size_t j, double sigma2_floor);

// Penalized negative log-likelihood of one template on [i,j).
std::pair<double, FittedModel> segment_cost(const SufficientStats& stats,
                                            std::size_t i, std::size_t j,
                                            const ModelTemplate& tmpl,
                                            PenaltyCriterion criterion,
                                            double sigma2_floor);

double gaussian_loglik(std::size_t n, double rss, double sigma2);

struct Interval95 {
  double lo = 0, hi = 0;
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool operator==(const Interval95&) const = default;
};

// Standard 95% regression intervals for intercept and slope, using the
// unbiased residual variance (the likelihood floor does not apply here).
// Degenerate when n <= basis size: collapses to the point estimate.
Interval95 intercept_ci(const FittedModel& model, const IntervalStats& stats);
Interval95 slope_ci(const FittedModel& model, const IntervalStats& stats);

}  // namespace charda
