#pragma once

#include <span>

namespace vfxgb::metrics {

// Probability that a random positive outranks a random negative; ties count
// one half. Throws InvalidArgument when only one class is present.
double auc(std::span<const int> labels, std::span<const double> scores);

// max over thresholds of |TPR - FPR|.
double ks(std::span<const int> labels, std::span<const double> scores);

// Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double log_loss(std::span<const int> labels, std::span<const double> probabilities);

}  // namespace vfxgb::metrics
