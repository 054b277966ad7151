#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "kilnloop/rng.hpp"

namespace kilnloop {

/// Borrowed row-major feature matrix.
struct FeatureView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t row, std::size_t col) const { return data[row * cols + col]; }
  const double* row(std::size_t r) const { return data + r * cols; }
};

struct TreeParams {
  int max_depth = 0;          // 0 grows until nodes are pure or too small
  int min_samples_split = 2;
  std::size_t max_features = 0;  // features tried per split; 0 means all
};

/// CART regression tree: squared-error splits at midpoints between sorted
/// unique values, mean-valued leaves.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  /// Fits on the listed sample rows; rows may repeat (bootstrap draws).
  /// The rng is consulted only when max_features is below the column count.
  static RegressionTree fit(const FeatureView& x, std::span<const double> targets,
                            std::span<const std::size_t> samples, const TreeParams& params, Rng* rng);

  double predict(const double* features) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  int depth() const;

  nlohmann::ordered_json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);

 private:
  std::vector<Node> nodes_;
};

}  // namespace kilnloop
