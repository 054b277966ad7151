#include "kilnloop/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kilnloop/error.hpp"
#include "kilnloop/kernels.hpp"
#include "kilnloop/rng.hpp"

namespace kilnloop {

double mlp_forward(const MlpShape& shape, std::span<const double> params, const double* z,
                   std::vector<double>& pre, std::vector<double>& act) {
  const std::size_t h = shape.hidden;
  pre.assign(params.begin() + static_cast<std::ptrdiff_t>(shape.b1_offset()),
             params.begin() + static_cast<std::ptrdiff_t>(shape.b1_offset() + h));
  for (std::size_t j = 0; j < shape.inputs; ++j)
    kernels::axpy(z[j], params.subspan(shape.w1_offset() + j * h, h), pre);
  act.resize(h);
  for (std::size_t u = 0; u < h; ++u) act[u] = pre[u] > 0.0 ? pre[u] : 0.0;
  return params[shape.b2_offset()] + kernels::dot(params.subspan(shape.w2_offset(), h), act);
}

double mlp_loss(const MlpShape& shape, std::span<const double> params, std::span<const double> z,
                std::span<const double> y) {
  std::vector<double> pre, act;
  double loss = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double e = mlp_forward(shape, params, z.data() + r * shape.inputs, pre, act) - y[r];
    loss += e * e;
  }
  return loss / static_cast<double>(y.size());
}

double mlp_loss_gradient(const MlpShape& shape, std::span<const double> params,
                         std::span<const double> z, std::span<const double> y,
                         std::span<double> gradient) {
  const std::size_t h = shape.hidden;
  const double inv_n = 1.0 / static_cast<double>(y.size());
  std::fill(gradient.begin(), gradient.end(), 0.0);
  std::vector<double> pre, act, delta_hidden(h);
  auto w2 = params.subspan(shape.w2_offset(), h);
  double loss = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double* zr = z.data() + r * shape.inputs;
    const double e = mlp_forward(shape, params, zr, pre, act) - y[r];
    loss += e * e;
    const double d_out = 2.0 * e * inv_n;
    gradient[shape.b2_offset()] += d_out;
    kernels::axpy(d_out, act, gradient.subspan(shape.w2_offset(), h));
    for (std::size_t u = 0; u < h; ++u) delta_hidden[u] = pre[u] > 0.0 ? d_out * w2[u] : 0.0;
    kernels::axpy(1.0, delta_hidden, gradient.subspan(shape.b1_offset(), h));
    for (std::size_t j = 0; j < shape.inputs; ++j)
      kernels::axpy(zr[j], delta_hidden, gradient.subspan(shape.w1_offset() + j * h, h));
  }
  return loss * inv_n;
}

MlpModel MlpModel::fit(const FeatureView& x, std::span<const double> y, const MlpParams& params,
                       std::uint64_t seed) {
  if (x.rows < 2) throw Error(ErrorCode::InsufficientData, "MLP needs at least 2 records");
  if (params.hidden_units < 1 || params.epochs < 1 || params.batch_size < 1 ||
      !(params.learning_rate > 0.0) || !(params.momentum >= 0.0 && params.momentum < 1.0))
    throw Error(ErrorCode::InvalidHyperparams, "MLP hyperparameters out of range");

  MlpModel model;
  model.shape_ = {x.cols, static_cast<std::size_t>(params.hidden_units)};
  const std::size_t n = x.rows, d = x.cols, h = model.shape_.hidden;

  model.feature_mean_.assign(d, 0.0);
  model.feature_scale_.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x.at(r, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (x.at(r, j) - mean) * (x.at(r, j) - mean);
    var /= static_cast<double>(n);
    model.feature_mean_[j] = mean;
    model.feature_scale_[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  model.target_mean_ = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
                       static_cast<double>(n);
  double tvar = 0.0;
  for (std::size_t r = 0; r < n; ++r) tvar += (y[r] - model.target_mean_) * (y[r] - model.target_mean_);
  tvar /= static_cast<double>(n);
  model.target_scale_ = tvar > 0.0 ? std::sqrt(tvar) : 1.0;

  std::vector<double> z(n * d), t(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j)
      z[r * d + j] = (x.at(r, j) - model.feature_mean_[j]) / model.feature_scale_[j];
    t[r] = (y[r] - model.target_mean_) / model.target_scale_;
  }

  const MlpShape& shape = model.shape_;
  Rng rng(derive_seed(seed, 0x6d6c70));
  model.params_.assign(shape.parameter_count(), 0.0);
  const double w1_limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(d, 1)));
  const double w2_limit = std::sqrt(6.0 / static_cast<double>(h + 1));
  for (std::size_t i = 0; i < d * h; ++i) model.params_[shape.w1_offset() + i] = rng.uniform(-w1_limit, w1_limit);
  for (std::size_t u = 0; u < h; ++u) model.params_[shape.w2_offset() + u] = rng.uniform(-w2_limit, w2_limit);

  std::vector<double> velocity(shape.parameter_count(), 0.0), gradient(shape.parameter_count());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(params.batch_size), n);
  std::vector<double> zb, tb;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      zb.clear();
      tb.clear();
      for (std::size_t i = start; i < stop; ++i) {
        zb.insert(zb.end(), z.begin() + static_cast<std::ptrdiff_t>(order[i] * d),
                  z.begin() + static_cast<std::ptrdiff_t>(order[i] * d + d));
        tb.push_back(t[order[i]]);
      }
      mlp_loss_gradient(shape, model.params_, zb, tb, gradient);
      kernels::momentum_step(params.momentum, params.learning_rate, gradient, velocity, model.params_);
    }
  }
  return model;
}

double MlpModel::predict(const double* features) const {
  thread_local std::vector<double> z, pre, act;
  z.resize(shape_.inputs);
  for (std::size_t j = 0; j < shape_.inputs; ++j) z[j] = (features[j] - feature_mean_[j]) / feature_scale_[j];
  const double out = mlp_forward(shape_, params_, z.data(), pre, act);
  return out * target_scale_ + target_mean_;
}

nlohmann::ordered_json MlpModel::to_json() const {
  nlohmann::ordered_json j;
  j["inputs"] = shape_.inputs;
  j["hidden"] = shape_.hidden;
  j["feature_mean"] = feature_mean_;
  j["feature_scale"] = feature_scale_;
  j["target_mean"] = target_mean_;
  j["target_scale"] = target_scale_;
  j["parameters"] = params_;
  return j;
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
  MlpModel m;
  m.shape_ = {j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>()};
  m.feature_mean_ = j.at("feature_mean").get<std::vector<double>>();
  m.feature_scale_ = j.at("feature_scale").get<std::vector<double>>();
  m.target_mean_ = j.at("target_mean").get<double>();
  m.target_scale_ = j.at("target_scale").get<double>();
  m.params_ = j.at("parameters").get<std::vector<double>>();
  if (m.feature_mean_.size() != m.shape_.inputs || m.feature_scale_.size() != m.shape_.inputs ||
      m.params_.size() != m.shape_.parameter_count())
    throw Error(ErrorCode::ParseError, "MLP arrays do not match its shape");
  return m;
}

}  // namespace kilnloop
