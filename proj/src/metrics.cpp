#include "kilnloop/metrics.hpp"

#include <cmath>
#include <limits>

#include "kilnloop/error.hpp"
#include "kilnloop/kernels.hpp"

namespace kilnloop {

MetricsRow compute_metrics(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(actuals.size()) + " actuals");
  if (actuals.empty()) throw Error(ErrorCode::EmptyInput, "metrics need at least one pair");

  const double n = static_cast<double>(actuals.size());
  const double ss_res = kernels::sq_diff_sum(predictions, actuals);
  const double mean = kernels::sum(actuals) / n;
  const double ss_tot = kernels::sq_offset_sum(actuals, mean);

  MetricsRow row;
  row.mse = ss_res / n;
  row.rmse = std::sqrt(row.mse);
  if (ss_tot > 0.0) {
    row.r2 = 1.0 - ss_res / ss_tot;
  } else if (ss_res == 0.0) {
    row.r2 = 1.0;
  } else {
    row.r2 = -std::numeric_limits<double>::infinity();
    row.r2_defined = false;
  }
  return row;
}

MetricsRow mean_metrics(std::span<const MetricsRow> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no metric rows to average");
  MetricsRow out{0.0, 0.0, 0.0, true};
  for (const auto& r : rows) {
    out.rmse += r.rmse;
    out.mse += r.mse;
    out.r2 += r.r2;
    out.r2_defined = out.r2_defined && r.r2_defined;
  }
  const double n = static_cast<double>(rows.size());
  out.rmse /= n;
  out.mse /= n;
  out.r2 = out.r2_defined ? out.r2 / n : -std::numeric_limits<double>::infinity();
  return out;
}

nlohmann::ordered_json MetricsRow::to_json() const {
  nlohmann::ordered_json j;
  j["rmse"] = rmse;
  j["mse"] = mse;
  if (r2_defined)
    j["r2"] = r2;
  else
    j["r2"] = nullptr;
  j["r2_defined"] = r2_defined;
  return j;
}

MetricsRow MetricsRow::from_json(const nlohmann::json& j) {
  MetricsRow row;
  row.rmse = j.at("rmse").get<double>();
  row.mse = j.at("mse").get<double>();
  row.r2_defined = j.value("r2_defined", true);
  row.r2 = row.r2_defined ? j.at("r2").get<double>() : -std::numeric_limits<double>::infinity();
  return row;
}

}  // namespace kilnloop
