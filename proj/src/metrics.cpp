#include "subflow/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace subflow {

namespace {

void check_sizes(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw std::invalid_argument("metrics: size mismatch");
  if (ref.empty()) throw std::invalid_argument("metrics: empty input");
}

}  // namespace

double relative_l2(std::span<const double> pred, std::span<const double> ref) {
  check_sizes(pred, ref);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) {
    const double d = pred[n] - ref[n];
    num += d * d;
    den += ref[n] * ref[n];
  }
  if (den == 0.0) throw std::invalid_argument("relative_l2: reference has zero norm");
  return std::sqrt(num / den);
}

double r2_score(std::span<const double> pred, std::span<const double> ref) {
  check_sizes(pred, ref);
  double mean = 0.0;
  for (double v : ref) mean += v;
  mean /= static_cast<double>(ref.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) {
    ss_res += (pred[n] - ref[n]) * (pred[n] - ref[n]);
    ss_tot += (ref[n] - mean) * (ref[n] - mean);
  }
  if (ss_tot == 0.0) throw std::invalid_argument("r2_score: reference is constant");
  return 1.0 - ss_res / ss_tot;
}

MetricReport evaluate_metrics(std::span<const double> pred, std::span<const double> ref) {
  return {relative_l2(pred, ref), r2_score(pred, ref), ref.size()};
}

std::vector<MetricReport> per_field_metrics(const std::vector<std::vector<double>>& pred,
                                            const std::vector<std::vector<double>>& ref) {
  if (pred.size() != ref.size()) throw std::invalid_argument("metrics: realization count mismatch");
  std::vector<MetricReport> out;
  out.reserve(ref.size());
  for (std::size_t r = 0; r < ref.size(); ++r) out.push_back(evaluate_metrics(pred[r], ref[r]));
  return out;
}

MetricReport pooled_metrics(const std::vector<std::vector<double>>& pred,
                            const std::vector<std::vector<double>>& ref) {
  if (pred.size() != ref.size()) throw std::invalid_argument("metrics: realization count mismatch");
  std::vector<double> p, q;
  for (std::size_t r = 0; r < ref.size(); ++r) {
    if (pred[r].size() != ref[r].size()) throw std::invalid_argument("metrics: size mismatch");
    p.insert(p.end(), pred[r].begin(), pred[r].end());
    q.insert(q.end(), ref[r].begin(), ref[r].end());
  }
  return evaluate_metrics(p, q);
}

}  // namespace subflow
