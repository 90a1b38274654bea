#pragma once

// Plain XGBoost machinery shared by the Active Party and the centralized
// oracle: logistic gradients, quantile binning, gain/weight formulas, tree
// building over bucket histograms, and prediction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vfxgb::xgb {

struct GradientPair {
  double g = 0.0;
  double h = 0.0;
};

// Column-major feature matrix: columns[k][i] is feature k of instance i.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t num_features() const { return columns.size(); }
  std::size_t num_rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct TreeParams {
  int num_trees = 10;
  double lambda = 1.0;
  double gamma = 0.0;
  int num_buckets = 32;  // L
  int max_depth = 5;
  double eta = 1.0;
  double base_score = 0.0;

  void validate() const;  // throws ConfigError
};

std::vector<GradientPair> compute_gradients(std::span<const int> labels,
                                            std::span<const double> raw_scores);

double sigmoid(double x);

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                  double gamma);

double leaf_weight(double g, double h, double lambda);

// Bucket boundaries for one feature. Bucket b (0-based) holds values in
// (thresholds[b-1], thresholds[b]]; the last bucket is unbounded above.
// Splitting at threshold index t sends buckets 0..t left.
struct FeatureBins {
  int feature = 0;
  std::vector<double> thresholds;
  std::vector<std::uint32_t> bucket_of;  // per instance

  std::size_t num_buckets() const { return thresholds.size() + 1; }
  std::size_t bucket_for_value(double v) const;
};

FeatureBins bin_feature(std::span<const double> values, int num_buckets, int feature_id = 0);

struct BucketStats {
  double g = 0.0;
  double h = 0.0;
  std::uint64_t count = 0;
};

// Per-bucket sums over `rows` (ascending instance ids).
std::vector<BucketStats> build_histogram(const FeatureBins& bins,
                                         std::span<const GradientPair> gradients,
                                         std::span<const std::uint32_t> rows);

// Sum over `rows` in ascending order.
BucketStats node_totals(std::span<const GradientPair> gradients, std::span<const std::uint32_t> rows);

inline constexpr double kNoSplit = -std::numeric_limits<double>::infinity();

struct SplitCandidate {
  double gain = kNoSplit;
  int threshold_index = -1;
  bool valid() const { return threshold_index >= 0; }
};

// Best threshold of one feature from its bucket histogram: prefix sums give
// the left side, the node totals minus the prefix give the right side.
// Thresholds leaving either side empty are skipped. Earliest index wins ties.
SplitCandidate best_split_from_histogram(std::span<const BucketStats> histogram,
                                         const BucketStats& totals, double lambda, double gamma);

struct Split {
  int party = 0;  // 0 = Active Party (or centralized)
  int feature = 0;
  int threshold_index = -1;
  double threshold = 0.0;               // known only for locally-owned splits
  std::optional<std::uint64_t> lookup_id;  // Passive-Party splits
};

struct TreeNode {
  std::optional<Split> split;  // nullopt for leaves
  double weight = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;

  bool is_leaf() const { return !split.has_value(); }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t num_leaves() const;
  std::size_t num_splits() const { return nodes.size() - num_leaves(); }
};

// Decides the branch of a split owned by another party. Returns true for left.
using RemoteRouter = std::function<bool(const Split& split, std::size_t row)>;

struct BoostedModel {
  std::vector<Tree> trees;
  TreeParams params;
  std::string loss = "logistic";

  double base_score() const { return params.base_score; }
};

// Leaf reached by `row`; local splits compare features[feature][row] with
// the stored threshold, remote ones defer to `router`.
int route_to_leaf(const Tree& tree, const FeatureMatrix& features, std::size_t row,
                  const RemoteRouter& router = nullptr);

// base + eta * sum_t f_t(x). Throws InvalidArgument when a remote split is
// reached without a router.
double predict(const BoostedModel& model, const FeatureMatrix& features, std::size_t row,
               const RemoteRouter& router = nullptr);
std::vector<double> predict_all(const BoostedModel& model, const FeatureMatrix& features,
                                const RemoteRouter& router = nullptr);

// Gradient source for one boosting round; defaults to logistic loss.
using GradientFn = std::function<std::vector<GradientPair>(
    std::span<const int> labels, std::span<const double> raw_scores, int tree_index)>;

GradientFn logistic_gradients();

struct LeafAssignment {
  Tree tree;
  std::vector<int> leaf_of;  // per instance
};

// Greedy tree growth over all features of `features` with nodes expanded in
// creation order; a node splits iff the best gain is > 0 and depth <
// max_depth. Ties go to the lower feature id, then the lower threshold index.
LeafAssignment build_tree_centralized(const FeatureMatrix& features,
                                      std::span<const FeatureBins> bins,
                                      std::span<const GradientPair> gradients,
                                      const TreeParams& params);

struct CentralizedResult {
  BoostedModel model;
  std::vector<double> train_scores;
  std::vector<double> train_log_loss;  // after each round
};

CentralizedResult train_centralized(const FeatureMatrix& features, std::span<const int> labels,
                                    const TreeParams& params, const GradientFn& gradient_fn = nullptr);

std::vector<FeatureBins> bin_all(const FeatureMatrix& features, int num_buckets);

// Model JSON: {"version":1,"loss":...,"params":{...},"trees":[{"nodes":[...]}]}
std::string model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const std::string& json);

}  // namespace vfxgb::xgb
