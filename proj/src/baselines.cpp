#include "ppgd/baselines.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>

#include "ppgd/errors.hpp"
#include "ppgd/train.hpp"

namespace ppgd {

double knn_predict(const KnnModel& model, std::span<const double> x) {
  const DataSet& data = model.train;
  if (data.size() == 0) throw std::invalid_argument("knn_predict: empty training set");
  if (x.size() != data.dim) throw std::invalid_argument("knn_predict: dimension mismatch");
  if (model.k < 1 || model.k > data.size()) throw ConfigError("knn_predict: k must lie in [1, n]");

  std::vector<std::pair<double, std::size_t>> dist(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < data.dim; ++j) {
      const double diff = row[j] - x[j];
      sq += diff * diff;
    }
    dist[i] = {sq, i};
  }
  const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(model.k);
  std::nth_element(dist.begin(), kth - 1, dist.end());
  // nth_element leaves the k smallest (by distance, then index) in front, in
  // unspecified order; sort them so the sum is order-stable.
  std::sort(dist.begin(), kth);
  double sum = 0.0;
  for (auto it = dist.begin(); it != kth; ++it) sum += data.ys[it->second];
  return sum / static_cast<double>(model.k);
}

KnnSelection select_k(const DataSet& data, std::span<const std::size_t> grid, std::uint64_t split_seed) {
  if (grid.empty()) throw ConfigError("select_k: empty grid");
  std::vector<std::size_t> ks(grid.begin(), grid.end());
  std::sort(ks.begin(), ks.end());
  if (ks.front() < 1) throw ConfigError("select_k: k must be at least 1");

  const SampleSplit split = split_sample(data, split_seed);
  KnnSelection out;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  for (std::size_t k : ks) {
    const std::size_t k_eff = std::min(k, split.learning.size());
    KnnModel m{split.learning, k_eff};
    double sq = 0.0;
    for (std::size_t i = 0; i < split.testing.size(); ++i) {
      const double e = knn_predict(m, split.testing.row(i)) - split.testing.ys[i];
      sq += e * e;
    }
    const double risk = sq / static_cast<double>(split.testing.size());
    out.test_risks.push_back(risk);
    if (risk < best || best_k == 0) {
      best = risk;
      best_k = k_eff;
    }
  }
  out.model = KnnModel{data, best_k};
  return out;
}

double constant_average(const DataSet& data) {
  if (data.size() == 0) throw std::invalid_argument("constant_average: empty data set");
  double s = 0.0;
  for (double y : data.ys) s += y;
  return s / static_cast<double>(data.size());
}

}  // namespace ppgd
