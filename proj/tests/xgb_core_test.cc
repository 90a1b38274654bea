#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "vfxgb/data.h"
#include "vfxgb/error.h"
#include "vfxgb/xgb_core.h"

using namespace vfxgb;
using namespace vfxgb::xgb;

namespace {

FeatureMatrix one_column(std::vector<double> values) {
  FeatureMatrix f;
  f.names = {"x"};
  f.columns = {std::move(values)};
  return f;
}

}  // namespace

TEST(XgbCore, LogisticGradients) {
  const int labels[] = {1, 0, 1};
  const double raw[] = {0.0, 0.0, 50.0};
  const auto g = compute_gradients(labels, raw);
  EXPECT_DOUBLE_EQ(g[0].g, -0.5);
  EXPECT_DOUBLE_EQ(g[0].h, 0.25);
  EXPECT_DOUBLE_EQ(g[1].g, 0.5);
  EXPECT_DOUBLE_EQ(g[1].h, 0.25);
  EXPECT_NEAR(g[2].g, 0.0, 1e-15);
  EXPECT_NEAR(g[2].h, 0.0, 1e-15);
  const double short_raw[] = {0.0};
  EXPECT_THROW(compute_gradients(labels, short_raw), InvalidArgument);
}

TEST(XgbCore, SigmoidIsStable) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

TEST(XgbCore, SplitGain) {
  EXPECT_DOUBLE_EQ(split_gain(0, 1, 0, 1, 1, 0.3), -0.3);
  EXPECT_NEAR(split_gain(2, 3, -1, 2, 1, 0), 7.0 / 12.0, 1e-15);
  EXPECT_DOUBLE_EQ(split_gain(2, 3, -1, 2, 1, 0.2), split_gain(-1, 2, 2, 3, 1, 0.2));
}

TEST(XgbCore, LeafWeight) {
  EXPECT_DOUBLE_EQ(leaf_weight(0, 5, 1), 0.0);
  EXPECT_DOUBLE_EQ(leaf_weight(3, 1, 1), -1.5);
  EXPECT_GT(leaf_weight(-2, 1, 1), 0.0);
}

TEST(XgbCore, QuantileBins) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const FeatureBins b = bin_feature(v, 4);
  ASSERT_EQ(b.thresholds, (std::vector<double>{25, 50, 75}));
  std::vector<int> counts(b.num_buckets());
  for (auto bucket : b.bucket_of) ++counts[bucket];
  EXPECT_EQ(counts, (std::vector<int>{25, 25, 25, 25}));
  EXPECT_EQ(b.bucket_for_value(25.0), 0u);
  EXPECT_EQ(b.bucket_for_value(25.5), 1u);
  EXPECT_EQ(b.bucket_for_value(1e9), 3u);
}

TEST(XgbCore, ConstantFeatureHasOneBucket) {
  const std::vector<double> v(10, 3.0);
  const FeatureBins b = bin_feature(v, 8);
  EXPECT_TRUE(b.thresholds.empty());
  EXPECT_EQ(b.num_buckets(), 1u);
  for (auto bucket : b.bucket_of) EXPECT_EQ(bucket, 0u);
}

TEST(XgbCore, BinsPartitionInstances) {
  const auto [ds, plan] = data::synth_credit(500, 3, 2, 1);
  for (const auto& col : ds.features.columns) {
    const FeatureBins b = bin_feature(col, 32);
    EXPECT_LE(b.num_buckets(), 32u);
    EXPECT_TRUE(std::is_sorted(b.thresholds.begin(), b.thresholds.end()));
    for (std::size_t i = 0; i < col.size(); ++i) {
      const auto k = b.bucket_of[i];
      ASSERT_LT(k, b.num_buckets());
      if (k > 0) ASSERT_GT(col[i], b.thresholds[k - 1]);
      if (k < b.thresholds.size()) ASSERT_LE(col[i], b.thresholds[k]);
    }
  }
}

TEST(XgbCore, SingleBucketHasNoCandidate) {
  const BucketStats hist[] = {{1.0, 2.0, 3}};
  const SplitCandidate c = best_split_from_histogram(hist, hist[0], 1.0, 0.0);
  EXPECT_FALSE(c.valid());
  EXPECT_EQ(c.gain, kNoSplit);
}

TEST(XgbCore, TwoBucketGainMatchesHandValue) {
  const BucketStats hist[] = {{2.0, 3.0, 4}, {-1.0, 2.0, 5}};
  const BucketStats totals{1.0, 5.0, 9};
  const SplitCandidate c = best_split_from_histogram(hist, totals, 1.0, 0.0);
  ASSERT_TRUE(c.valid());
  EXPECT_EQ(c.threshold_index, 0);
  EXPECT_NEAR(c.gain, 7.0 / 12.0, 1e-15);
}

TEST(XgbCore, ToyTreeMatchesHandEnumeration) {
  const FeatureMatrix f = one_column({1, 2, 3, 4});
  const auto bins = bin_all(f, 4);
  const std::vector<GradientPair> grads = {{-1, 1}, {-1, 1}, {1, 1}, {1, 1}};
  TreeParams p;
  p.lambda = 1.0;
  const LeafAssignment t = build_tree_centralized(f, bins, grads, p);
  // gains: threshold 1 -> 3/8, threshold 2 -> 4/3, threshold 3 -> 3/8
  ASSERT_EQ(t.tree.nodes.size(), 3u);
  const auto& root = t.tree.nodes[0];
  ASSERT_TRUE(root.split.has_value());
  EXPECT_EQ(root.split->feature, 0);
  EXPECT_EQ(root.split->threshold_index, 1);
  EXPECT_DOUBLE_EQ(root.split->threshold, 2.0);
  // children cannot improve: 0.5 * (1/2 + 1/2 - 4/3) < 0
  EXPECT_TRUE(t.tree.nodes[1].is_leaf());
  EXPECT_TRUE(t.tree.nodes[2].is_leaf());
  EXPECT_DOUBLE_EQ(t.tree.nodes[1].weight, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.tree.nodes[2].weight, -2.0 / 3.0);
  EXPECT_EQ(t.leaf_of, (std::vector<int>{1, 1, 2, 2}));
}

TEST(XgbCore, ZeroGradientsGiveSingleLeaf) {
  const FeatureMatrix f = one_column({1, 2, 3, 4});
  const std::vector<GradientPair> grads(4, GradientPair{0.0, 1.0});
  const LeafAssignment t = build_tree_centralized(f, bin_all(f, 4), grads, TreeParams{});
  ASSERT_EQ(t.tree.nodes.size(), 1u);
  EXPECT_EQ(t.tree.nodes[0].weight, 0.0);
}

TEST(XgbCore, DepthLimit) {
  const auto [ds, plan] = data::synth_credit(300, 3, 3, 2);
  const auto g = compute_gradients(ds.labels, std::vector<double>(ds.num_rows(), 0.0));
  const auto bins = bin_all(ds.features, 16);
  TreeParams p;
  p.max_depth = 1;
  EXPECT_LE(build_tree_centralized(ds.features, bins, g, p).tree.num_splits(), 1u);
  p.max_depth = 0;
  EXPECT_EQ(build_tree_centralized(ds.features, bins, g, p).tree.num_splits(), 0u);
  p.max_depth = 3;
  const Tree t = build_tree_centralized(ds.features, bins, g, p).tree;
  for (const auto& n : t.nodes) EXPECT_LE(n.depth, 3);
}

TEST(XgbCore, GammaSuppressesWeakSplits) {
  const FeatureMatrix f = one_column({1, 2, 3, 4});
  const std::vector<GradientPair> grads = {{-1, 1}, {-1, 1}, {1, 1}, {1, 1}};
  TreeParams p;
  p.gamma = 2.0;  // best gain 4/3 - 2 < 0
  EXPECT_EQ(build_tree_centralized(f, bin_all(f, 4), grads, p).tree.nodes.size(), 1u);
}

TEST(XgbCore, PredictWalksTrees) {
  BoostedModel m;
  m.params.base_score = 0.25;
  m.params.eta = 0.5;
  const FeatureMatrix f = one_column({1, 5});
  EXPECT_EQ(predict(m, f, 0), 0.25);

  Tree leaf;
  leaf.nodes.push_back(TreeNode{});
  leaf.nodes[0].weight = 2.0;
  m.trees.push_back(leaf);
  EXPECT_DOUBLE_EQ(predict(m, f, 0), 0.25 + 0.5 * 2.0);

  Tree stump;
  TreeNode root;
  root.split = Split{0, 0, 0, 3.0, std::nullopt};
  root.left = 1;
  root.right = 2;
  stump.nodes = {root, TreeNode{}, TreeNode{}};
  stump.nodes[1].weight = -1.0;
  stump.nodes[2].weight = 4.0;
  m.trees.push_back(stump);
  EXPECT_DOUBLE_EQ(predict(m, f, 0), 0.25 + 0.5 * (2.0 - 1.0));
  EXPECT_DOUBLE_EQ(predict(m, f, 1), 0.25 + 0.5 * (2.0 + 4.0));
}

TEST(XgbCore, RemoteSplitNeedsRouter) {
  BoostedModel m;
  Tree t;
  TreeNode root;
  root.split = Split{1, 0, 0, 0.0, 7};
  root.left = 1;
  root.right = 2;
  t.nodes = {root, TreeNode{}, TreeNode{}};
  t.nodes[1].weight = 1.0;
  t.nodes[2].weight = 2.0;
  m.trees.push_back(t);
  const FeatureMatrix f = one_column({0.0});
  EXPECT_THROW(predict(m, f, 0), InvalidArgument);
  int calls = 0;
  const RemoteRouter router = [&](const Split& s, std::size_t) {
    ++calls;
    EXPECT_EQ(*s.lookup_id, 7u);
    return false;
  };
  EXPECT_DOUBLE_EQ(predict(m, f, 0, router), 2.0);
  EXPECT_EQ(calls, 1);
}

TEST(XgbCore, TrainingLossDecreases) {
  const auto [ds, plan] = data::synth_credit(1000, 4, 4, 3);
  TreeParams p;
  p.num_trees = 8;
  p.eta = 0.3;
  const CentralizedResult r = train_centralized(ds.features, ds.labels, p);
  ASSERT_EQ(r.train_log_loss.size(), 8u);
  double prev = std::log(2.0);
  for (double l : r.train_log_loss) {
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_EQ(r.model.trees.size(), 8u);
}

TEST(XgbCore, ModelJsonRoundTrip) {
  const auto [ds, plan] = data::synth_credit(400, 3, 2, 4);
  TreeParams p;
  p.num_trees = 3;
  const CentralizedResult r = train_centralized(ds.features, ds.labels, p);
  const BoostedModel back = model_from_json(model_to_json(r.model));
  ASSERT_EQ(back.trees.size(), r.model.trees.size());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    ASSERT_EQ(predict(back, ds.features, i), predict(r.model, ds.features, i));
  }
  EXPECT_EQ(model_to_json(back), model_to_json(r.model));
  EXPECT_THROW(model_from_json("{\"version\":2}"), Error);
}

TEST(XgbCore, ParamValidation) {
  TreeParams p;
  EXPECT_NO_THROW(p.validate());
  p.lambda = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = TreeParams{};
  p.num_buckets = 1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = TreeParams{};
  p.num_trees = -1;
  EXPECT_THROW(p.validate(), ConfigError);
}
