#pragma once

#include <span>

#include "json.hpp"

namespace kilnloop {

/// Regression quality in the units of the target (mAh/g for rmse).
struct MetricsRow {
  double rmse = 0.0;
  double mse = 0.0;
  double r2 = 1.0;
  // False when the actuals have zero variance but the residuals do not; r2
  // then holds negative infinity.
  bool r2_defined = true;

  nlohmann::ordered_json to_json() const;
  static MetricsRow from_json(const nlohmann::json& j);
};

MetricsRow compute_metrics(std::span<const double> predictions, std::span<const double> actuals);

/// Component-wise mean of several rows (the cross-validation summary).
MetricsRow mean_metrics(std::span<const MetricsRow> rows);

}  // namespace kilnloop
