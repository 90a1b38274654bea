#include "vfxgb/xgb_core.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <json.hpp>

#include "vfxgb/error.h"
#include "vfxgb/metrics.h"

namespace vfxgb::xgb {

void TreeParams::validate() const {
  if (num_trees < 0) throw ConfigError("xgb: trees must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("xgb: lambda must be > 0");
  if (!std::isfinite(gamma)) throw ConfigError("xgb: gamma must be finite");
  if (num_buckets < 2) throw ConfigError("xgb: buckets must be >= 2");
  if (max_depth < 0) throw ConfigError("xgb: max_depth must be >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("xgb: eta must be > 0");
  if (!std::isfinite(base_score)) throw ConfigError("xgb: base_score must be finite");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<GradientPair> compute_gradients(std::span<const int> labels,
                                            std::span<const double> raw_scores) {
  if (labels.size() != raw_scores.size()) throw InvalidArgument("labels and scores differ in length");
  std::vector<GradientPair> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(raw_scores[i])) throw InvalidArgument("non-finite raw score");
    const double p = sigmoid(raw_scores[i]);
    out[i].g = p - static_cast<double>(labels[i]);
    out[i].h = p * (1.0 - p);
  }
  return out;
}

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                  double gamma) {
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g * g / (h + lambda)) -
         gamma;
}

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

std::size_t FeatureBins::bucket_for_value(double v) const {
  return static_cast<std::size_t>(std::lower_bound(thresholds.begin(), thresholds.end(), v) -
                                  thresholds.begin());
}

FeatureBins bin_feature(std::span<const double> values, int num_buckets, int feature_id) {
  if (num_buckets < 2) throw InvalidArgument("bin_feature: L must be >= 2");
  if (values.empty()) throw InvalidArgument("bin_feature: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double max_value = sorted.back();

  FeatureBins bins;
  bins.feature = feature_id;
  const auto buckets = static_cast<std::size_t>(num_buckets);
  for (std::size_t i = 1; i < buckets; ++i) {
    // lower empirical quantile at i / L
    const std::size_t rank = (i * n + buckets - 1) / buckets;
    const double t = sorted[rank == 0 ? 0 : rank - 1];
    if (t >= max_value) continue;
    if (!bins.thresholds.empty() && t <= bins.thresholds.back()) continue;
    bins.thresholds.push_back(t);
  }
  bins.bucket_of.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bins.bucket_of[i] = static_cast<std::uint32_t>(bins.bucket_for_value(values[i]));
  }
  return bins;
}

std::vector<FeatureBins> bin_all(const FeatureMatrix& features, int num_buckets) {
  std::vector<FeatureBins> out;
  out.reserve(features.num_features());
  for (std::size_t k = 0; k < features.num_features(); ++k) {
    out.push_back(bin_feature(features.columns[k], num_buckets, static_cast<int>(k)));
  }
  return out;
}

std::vector<BucketStats> build_histogram(const FeatureBins& bins,
                                         std::span<const GradientPair> gradients,
                                         std::span<const std::uint32_t> rows) {
  std::vector<BucketStats> hist(bins.num_buckets());
  for (std::uint32_t i : rows) {
    BucketStats& b = hist[bins.bucket_of[i]];
    b.g += gradients[i].g;
    b.h += gradients[i].h;
    ++b.count;
  }
  return hist;
}

BucketStats node_totals(std::span<const GradientPair> gradients, std::span<const std::uint32_t> rows) {
  BucketStats t;
  for (std::uint32_t i : rows) {
    t.g += gradients[i].g;
    t.h += gradients[i].h;
    ++t.count;
  }
  return t;
}

SplitCandidate best_split_from_histogram(std::span<const BucketStats> histogram,
                                         const BucketStats& totals, double lambda, double gamma) {
  SplitCandidate best;
  double g_left = 0.0;
  double h_left = 0.0;
  std::uint64_t n_left = 0;
  for (std::size_t t = 0; t + 1 < histogram.size(); ++t) {
    g_left += histogram[t].g;
    h_left += histogram[t].h;
    n_left += histogram[t].count;
    if (n_left == 0 || n_left >= totals.count) continue;
    const double gain =
        split_gain(g_left, h_left, totals.g - g_left, totals.h - h_left, lambda, gamma);
    if (gain > best.gain) {
      best.gain = gain;
      best.threshold_index = static_cast<int>(t);
    }
  }
  return best;
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int route_to_leaf(const Tree& tree, const FeatureMatrix& features, std::size_t row,
                  const RemoteRouter& router) {
  if (tree.nodes.empty()) throw InvalidArgument("empty tree");
  int id = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.is_leaf()) return id;
    const Split& s = *node.split;
    bool go_left = false;
    if (s.lookup_id.has_value()) {
      if (!router) throw InvalidArgument("tree has a remote split but no router was given");
      go_left = router(s, row);
    } else {
      go_left = features.columns.at(static_cast<std::size_t>(s.feature))[row] <= s.threshold;
    }
    id = go_left ? node.left : node.right;
  }
}

double predict(const BoostedModel& model, const FeatureMatrix& features, std::size_t row,
               const RemoteRouter& router) {
  double sum = 0.0;
  for (const Tree& tree : model.trees) {
    sum += tree.nodes[static_cast<std::size_t>(route_to_leaf(tree, features, row, router))].weight;
  }
  return model.params.base_score + model.params.eta * sum;
}

std::vector<double> predict_all(const BoostedModel& model, const FeatureMatrix& features,
                                const RemoteRouter& router) {
  std::vector<double> out(features.num_rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = predict(model, features, i, router);
  return out;
}

GradientFn logistic_gradients() {
  return [](std::span<const int> labels, std::span<const double> scores, int) {
    return compute_gradients(labels, scores);
  };
}

LeafAssignment build_tree_centralized(const FeatureMatrix& /*features*/,
                                      std::span<const FeatureBins> bins,
                                      std::span<const GradientPair> gradients,
                                      const TreeParams& params) {
  struct Pending {
    int node;
    std::vector<std::uint32_t> rows;
  };
  const std::size_t n = gradients.size();
  LeafAssignment out;
  out.leaf_of.assign(n, 0);
  out.tree.nodes.push_back(TreeNode{});

  std::deque<Pending> queue;
  Pending root{0, {}};
  root.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) root.rows[i] = static_cast<std::uint32_t>(i);
  queue.push_back(std::move(root));

  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();
    const int depth = out.tree.nodes[static_cast<std::size_t>(cur.node)].depth;
    const BucketStats totals = node_totals(gradients, cur.rows);

    SplitCandidate best;
    int best_feature = -1;
    if (depth < params.max_depth) {
      for (std::size_t k = 0; k < bins.size(); ++k) {
        const auto hist = build_histogram(bins[k], gradients, cur.rows);
        const SplitCandidate c = best_split_from_histogram(hist, totals, params.lambda, params.gamma);
        if (c.valid() && c.gain > best.gain) {
          best = c;
          best_feature = static_cast<int>(k);
        }
      }
    }

    if (best.valid() && best.gain > 0.0) {
      const FeatureBins& fb = bins[static_cast<std::size_t>(best_feature)];
      Pending left{static_cast<int>(out.tree.nodes.size()), {}};
      Pending right{left.node + 1, {}};
      for (std::uint32_t i : cur.rows) {
        if (fb.bucket_of[i] <= static_cast<std::uint32_t>(best.threshold_index)) {
          left.rows.push_back(i);
        } else {
          right.rows.push_back(i);
        }
      }
      Split s;
      s.party = 0;
      s.feature = best_feature;
      s.threshold_index = best.threshold_index;
      s.threshold = fb.thresholds[static_cast<std::size_t>(best.threshold_index)];
      TreeNode& node = out.tree.nodes[static_cast<std::size_t>(cur.node)];
      node.split = s;
      node.left = left.node;
      node.right = right.node;
      TreeNode child;
      child.depth = depth + 1;
      out.tree.nodes.push_back(child);
      out.tree.nodes.push_back(child);
      queue.push_back(std::move(left));
      queue.push_back(std::move(right));
    } else {
      out.tree.nodes[static_cast<std::size_t>(cur.node)].weight =
          leaf_weight(totals.g, totals.h, params.lambda);
      for (std::uint32_t i : cur.rows) out.leaf_of[i] = cur.node;
    }
  }
  return out;
}

CentralizedResult train_centralized(const FeatureMatrix& features, std::span<const int> labels,
                                    const TreeParams& params, const GradientFn& gradient_fn) {
  params.validate();
  const std::size_t n = labels.size();
  if (features.num_features() > 0 && features.num_rows() != n) {
    throw InvalidArgument("feature rows and labels differ in length");
  }
  const GradientFn fn = gradient_fn ? gradient_fn : logistic_gradients();
  const auto bins = bin_all(features, params.num_buckets);

  CentralizedResult out;
  out.model.params = params;
  out.train_scores.assign(n, params.base_score);
  for (int t = 0; t < params.num_trees; ++t) {
    const auto grads = fn(labels, out.train_scores, t);
    LeafAssignment la = build_tree_centralized(features, bins, grads, params);
    for (std::size_t i = 0; i < n; ++i) {
      out.train_scores[i] +=
          params.eta * la.tree.nodes[static_cast<std::size_t>(la.leaf_of[i])].weight;
    }
    out.model.trees.push_back(std::move(la.tree));
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(out.train_scores[i]);
    out.train_log_loss.push_back(metrics::log_loss(labels, p));
  }
  return out;
}

namespace {

nlohmann::json params_to_json(const TreeParams& p) {
  return {{"trees", p.num_trees},         {"lambda", p.lambda}, {"gamma", p.gamma},
          {"buckets", p.num_buckets},     {"max_depth", p.max_depth}, {"eta", p.eta},
          {"base_score", p.base_score}};
}

TreeParams params_from_json(const nlohmann::json& j) {
  TreeParams p;
  p.num_trees = j.value("trees", p.num_trees);
  p.lambda = j.value("lambda", p.lambda);
  p.gamma = j.value("gamma", p.gamma);
  p.num_buckets = j.value("buckets", p.num_buckets);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.eta = j.value("eta", p.eta);
  p.base_score = j.value("base_score", p.base_score);
  return p;
}

}  // namespace

std::string model_to_json(const BoostedModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const TreeNode& n = tree.nodes[id];
      nlohmann::json jn = {{"id", id}, {"depth", n.depth}, {"leaf", n.is_leaf()}};
      if (n.is_leaf()) {
        jn["weight"] = n.weight;
      } else {
        const Split& s = *n.split;
        jn["party"] = s.party;
        if (s.lookup_id) {
          jn["lookup_id"] = *s.lookup_id;
        } else {
          jn["feature"] = s.feature;
          jn["threshold_index"] = s.threshold_index;
          jn["threshold"] = s.threshold;
        }
        jn["left"] = n.left;
        jn["right"] = n.right;
      }
      nodes.push_back(std::move(jn));
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  nlohmann::json j = {{"version", 1},
                      {"loss", model.loss},
                      {"params", params_to_json(model.params)},
                      {"trees", std::move(trees)}};
  return j.dump(1);
}

BoostedModel model_from_json(const std::string& json) {
  BoostedModel model;
  try {
    const auto j = nlohmann::json::parse(json);
    if (j.value("version", 0) != 1) throw InvalidArgument("unsupported model version");
    model.loss = j.value("loss", std::string("logistic"));
    model.params = params_from_json(j.at("params"));
    for (const auto& jt : j.at("trees")) {
      Tree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        n.depth = jn.value("depth", 0);
        if (jn.at("leaf").get<bool>()) {
          n.weight = jn.at("weight").get<double>();
        } else {
          Split s;
          s.party = jn.at("party").get<int>();
          if (jn.contains("lookup_id")) {
            s.lookup_id = jn["lookup_id"].get<std::uint64_t>();
          } else {
            s.feature = jn.at("feature").get<int>();
            s.threshold_index = jn.at("threshold_index").get<int>();
            s.threshold = jn.at("threshold").get<double>();
          }
          n.split = s;
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        tree.nodes.push_back(n);
      }
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model json: ") + e.what());
  }
  return model;
}

}  // namespace vfxgb::xgb
