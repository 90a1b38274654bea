#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vfxgb/xgb_core.h"

namespace vfxgb::data {

struct Dataset {
  std::vector<std::int64_t> ids;
  xgb::FeatureMatrix features;
  std::vector<int> labels;

  std::size_t num_rows() const { return labels.size(); }
  // Throws InvalidArgument on a ragged matrix or misaligned labels/ids.
  void validate() const;
};

struct LoadOptions {
  // Drop rows with an empty cell instead of failing; non-numeric cells stay fatal.
  bool drop_incomplete_rows = false;
  std::string id_column;  // optional; row order is used otherwise
};

struct LoadReport {
  std::size_t rows_loaded = 0;
  std::size_t rows_dropped = 0;
};

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const LoadOptions& options = {}, LoadReport* report = nullptr);

// Header: id column excluded, features in order, label column last.
// Reals are written in shortest round-trip form.
void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column = "label");
std::string to_csv(const Dataset& ds, const std::string& label_column = "label");

struct VerticalSplitPlan {
  std::vector<std::string> active;
  std::vector<std::string> passive;
};

// Features held by one party; labels only on the Active Party view.
struct PartyView {
  std::vector<std::int64_t> ids;
  xgb::FeatureMatrix features;
  std::vector<int> labels;  // empty for passive views

  std::size_t num_rows() const { return ids.size(); }
};

std::pair<PartyView, PartyView> vertical_split(const Dataset& ds, const VerticalSplitPlan& plan);

// Inverse of vertical_split; columns ordered active then passive.
Dataset join_views(const PartyView& active, const PartyView& passive);

// Deterministic under `seed`; both parts keep the original row order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Synthetic credit-scoring style data: labels drawn from a logistic model over
// a random linear combination of features plus a pairwise interaction, with
// signal on both the Active and the Passive columns.
std::pair<Dataset, VerticalSplitPlan> synth_credit(std::size_t n, std::size_t d_ap, std::size_t d_pp,
                                                   std::uint64_t seed);

Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows);

}  // namespace vfxgb::data
