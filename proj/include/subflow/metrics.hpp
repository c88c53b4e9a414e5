#pragma once

#include <span>
#include <vector>

namespace subflow {

struct MetricReport {
  double relative_l2 = 0.0;
  double r2 = 0.0;
  std::size_t n_points = 0;
};

/// ||pred - ref||_2 / ||ref||_2. Throws std::invalid_argument on a size
/// mismatch or a zero reference norm.
double relative_l2(std::span<const double> pred, std::span<const double> ref);

/// 1 - sum (pred - ref)^2 / sum (ref - mean(ref))^2. Throws for a constant reference.
double r2_score(std::span<const double> pred, std::span<const double> ref);

MetricReport evaluate_metrics(std::span<const double> pred, std::span<const double> ref);

/// One report per realization (boxplot granularity).
std::vector<MetricReport> per_field_metrics(const std::vector<std::vector<double>>& pred,
                                            const std::vector<std::vector<double>>& ref);

/// All realizations concatenated into one sample.
MetricReport pooled_metrics(const std::vector<std::vector<double>>& pred,
                            const std::vector<std::vector<double>>& ref);

}  // namespace subflow
