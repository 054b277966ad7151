#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "kilnloop/tree.hpp"

namespace kilnloop {

struct MlpParams {
  int hidden_units = 64;
  int epochs = 200;
  int batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;

  bool operator==(const MlpParams&) const = default;
};

/// Layout of the flat parameter vector of a one-hidden-layer network:
/// [W1 column-major (inputs x hidden) | b1 | w2 | b2].
struct MlpShape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return inputs * hidden; }
  std::size_t w2_offset() const { return b1_offset() + hidden; }
  std::size_t b2_offset() const { return w2_offset() + hidden; }
  std::size_t parameter_count() const { return b2_offset() + 1; }
};

/// Network output for one standardised input row.
double mlp_forward(const MlpShape& shape, std::span<const double> params, const double* z,
                   std::vector<double>& pre, std::vector<double>& act);

/// Mean squared error over the rows and its analytic gradient (backprop).
/// `z` is row-major standardised input, `y` the standardised targets.
double mlp_loss_gradient(const MlpShape& shape, std::span<const double> params,
                         std::span<const double> z, std::span<const double> y,
                         std::span<double> gradient);

/// Loss only; used by finite-difference checks.
double mlp_loss(const MlpShape& shape, std::span<const double> params, std::span<const double> z,
                std::span<const double> y);

/// ReLU network on standardised inputs, trained with momentum SGD.
class MlpModel {
 public:
  static MlpModel fit(const FeatureView& x, std::span<const double> y, const MlpParams& params,
                      std::uint64_t seed);

  double predict(const double* features) const;

  const MlpShape& shape() const { return shape_; }
  std::span<const double> parameters() const { return params_; }

  nlohmann::ordered_json to_json() const;
  static MlpModel from_json(const nlohmann::json& j);

 private:
  MlpShape shape_;
  std::vector<double> feature_mean_;
  std::vector<double> feature_scale_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  std::vector<double> params_;
};

}  // namespace kilnloop
