#include "vfxgb/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vfxgb/error.h"

namespace vfxgb::metrics {
namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw InvalidArgument("labels and scores differ in length");
  ClassCounts c;
  for (int y : labels) {
    if (y == 1) {
      ++c.pos;
    } else if (y == 0) {
      ++c.neg;
    } else {
      throw InvalidArgument("labels must be 0 or 1");
    }
  }
  if (c.pos == 0 || c.neg == 0) throw InvalidArgument("both classes must be present");
  return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

}  // namespace

double auc(std::span<const int> labels, std::span<const double> scores) {
  const ClassCounts c = check(labels, scores);
  const auto idx = order_by_score(scores);
  // Mann–Whitney U with average ranks over tie groups.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(c.pos);
  const double nn = static_cast<double>(c.neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double ks(std::span<const int> labels, std::span<const double> scores) {
  const ClassCounts c = check(labels, scores);
  const auto idx = order_by_score(scores);
  // Sweep thresholds from high to low, one step per distinct score.
  std::size_t tp = 0;
  std::size_t fp = 0;
  double best = 0.0;
  std::size_t i = idx.size();
  while (i > 0) {
    std::size_t j = i;
    const double s = scores[idx[i - 1]];
    while (j > 0 && scores[idx[j - 1]] == s) {
      if (labels[idx[j - 1]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      --j;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(c.pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(c.neg);
    best = std::max(best, std::abs(tpr - fpr));
    i = j;
  }
  return best;
}

double log_loss(std::span<const int> labels, std::span<const double> probabilities) {
  if (labels.size() != probabilities.size()) throw InvalidArgument("labels and probabilities differ in length");
  if (labels.empty()) throw InvalidArgument("log_loss of empty input");
  constexpr double kEps = 1e-12;
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], kEps, 1.0 - kEps);
    sum -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(labels.size());
}

}  // namespace vfxgb::metrics
