#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ppgd/dataset.hpp"

namespace ppgd {

/// k-nearest-neighbour regression over a stored training sample.
struct KnnModel {
  DataSet train;
  std::size_t k = 1;
};

/// Mean response of the k training points closest in Euclidean distance;
/// equal distances are ordered by training index.
double knn_predict(const KnnModel& model, std::span<const double> x);

inline const std::vector<std::size_t> kDefaultKnnGrid{1, 2, 4, 8, 16, 32};

struct KnnSelection {
  KnnModel model;                  // chosen k on the full sample
  std::vector<double> test_risks;  // per grid entry, ascending k
};

/// Split as in split_sample(data, split_seed), evaluate each k (capped at the
/// learning size) on the testing part, keep the smallest test risk with ties
/// to smaller k, and return the winning (capped) k over the full sample.
KnnSelection select_k(const DataSet& data, std::span<const std::size_t> grid, std::uint64_t split_seed);

/// (1/n) sum y_i.
double constant_average(const DataSet& data);

}  // namespace ppgd
