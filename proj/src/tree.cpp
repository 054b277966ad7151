#include "kilnloop/tree.hpp"

#include <algorithm>
#include <numeric>

#include "kilnloop/error.hpp"

namespace kilnloop {
namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

// Per-feature sample orders are sorted once at the root and stably
// partitioned at every split, so each tree level costs O(samples * features).
class TreeBuilder {
 public:
  TreeBuilder(const FeatureView& x, std::span<const double> y, std::span<const std::size_t> samples,
              const TreeParams& params, Rng* rng)
      : x_(x), y_(y), params_(params), rng_(rng), goes_left_(x.rows, 0) {
    order_.resize(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
      order_[f].assign(samples.begin(), samples.end());
      std::stable_sort(order_[f].begin(), order_[f].end(),
                       [&](std::size_t a, std::size_t b) { return x_.at(a, f) < x_.at(b, f); });
    }
    scratch_.resize(samples.size());
  }

  std::vector<RegressionTree::Node> build() {
    grow(0, order_[0].size(), 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, int depth) {
    const auto& rows = order_[0];
    const std::size_t n = end - begin;
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += y_[rows[i]];
    const double mean = total / static_cast<double>(n);
    double centered_sum = 0.0, sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = y_[rows[i]] - mean;
      centered_sum += d;
      sse += d * d;
    }

    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({-1, 0.0, -1, -1, mean});

    const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
    if (!depth_ok || n < static_cast<std::size_t>(std::max(2, params_.min_samples_split)) || !(sse > 0.0))
      return id;

    const SplitChoice best = choose_split(begin, end, mean, centered_sum, sse);
    if (!best.found) return id;

    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t r = rows[i];
      goes_left_[r] = x_.at(r, best.feature) <= best.threshold ? 1 : 0;
    }
    std::size_t n_left = 0;
    for (std::size_t f = 0; f < order_.size(); ++f) n_left = partition(order_[f], begin, end);

    const int left = grow(begin, begin + n_left, depth + 1);
    const int right = grow(begin + n_left, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::size_t partition(std::vector<std::size_t>& ord, std::size_t begin, std::size_t end) {
    std::size_t l = 0, r = 0;
    const std::size_t n = end - begin;
    // Lefts fill scratch from the front, rights from the back (reversed).
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t row = ord[i];
      if (goes_left_[row])
        scratch_[l++] = row;
      else
        scratch_[n - 1 - r++] = row;
    }
    for (std::size_t i = 0; i < l; ++i) ord[begin + i] = scratch_[i];
    for (std::size_t i = 0; i < r; ++i) ord[begin + l + i] = scratch_[n - 1 - i];
    return l;
  }

  SplitChoice choose_split(std::size_t begin, std::size_t end, double mean, double centered_sum,
                           double sse) {
    const std::size_t d = order_.size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    std::size_t budget = d;
    if (params_.max_features > 0 && params_.max_features < d) {
      if (rng_ == nullptr) throw Error(ErrorCode::InvalidHyperparams, "feature subsampling needs an rng");
      rng_->shuffle(features);
      budget = params_.max_features;
    }

    const double n = static_cast<double>(end - begin);
    const double parent = centered_sum * centered_sum / n;
    SplitChoice best;
    std::size_t evaluated = 0;
    for (std::size_t f : features) {
      if (evaluated == budget) break;
      const auto& ord = order_[f];
      if (!(x_.at(ord[begin], f) < x_.at(ord[end - 1], f))) continue;  // constant in node
      ++evaluated;
      double sum_left = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        sum_left += y_[ord[i]] - mean;
        const double xi = x_.at(ord[i], f);
        const double xn = x_.at(ord[i + 1], f);
        if (!(xi < xn)) continue;
        const double n_left = static_cast<double>(i + 1 - begin);
        const double sum_right = centered_sum - sum_left;
        const double gain = sum_left * sum_left / n_left + sum_right * sum_right / (n - n_left) - parent;
        if (gain > best.gain) {
          double threshold = xi + (xn - xi) * 0.5;
          if (!(threshold < xn)) threshold = xi;
          best = {true, f, threshold, gain};
        }
      }
    }
    if (best.found && !(best.gain > 1e-12 * sse)) best.found = false;
    return best;
  }

  const FeatureView& x_;
  std::span<const double> y_;
  TreeParams params_;
  Rng* rng_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> scratch_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

RegressionTree RegressionTree::fit(const FeatureView& x, std::span<const double> targets,
                                   std::span<const std::size_t> samples, const TreeParams& params,
                                   Rng* rng) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientData, "tree needs at least one sample");
  RegressionTree tree;
  if (x.cols == 0) {
    double total = 0.0;
    for (auto s : samples) total += targets[s];
    tree.nodes_.push_back({-1, 0.0, -1, -1, total / static_cast<double>(samples.size())});
    return tree;
  }
  TreeBuilder builder(x, targets, samples, params, rng);
  tree.nodes_ = builder.build();
  return tree;
}

double RegressionTree::predict(const double* features) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(features[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  // Children always follow their parent in the node array.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

nlohmann::ordered_json RegressionTree::to_json() const {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  nlohmann::ordered_json j;
  j["feature"] = feature;
  j["threshold"] = threshold;
  j["left"] = left;
  j["right"] = right;
  j["value"] = value;
  return j;
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
    throw Error(ErrorCode::ParseError, "malformed tree arrays");
  RegressionTree tree;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                            left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n)))
      throw Error(ErrorCode::ParseError, "tree child index out of range");
    tree.nodes_.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
  }
  return tree;
}

}  // namespace kilnloop
