#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "ppgd/dataset.hpp"
#include "ppgd/ppnet.hpp"
#include "ppgd/rng.hpp"

namespace testutil {

inline ppgd::DataSet random_data(ppgd::Rng& rng, std::size_t n, std::size_t d, double A = 1.0) {
  ppgd::DataSet data;
  data.dim = d;
  data.a_bound = A;
  for (std::size_t i = 0; i < n * d; ++i) data.xs.push_back(rng.uniform(-A, A));
  for (std::size_t i = 0; i < n; ++i) data.ys.push_back(rng.uniform(-3.0, 3.0));
  return data;
}

inline ppgd::NetworkParams random_params(ppgd::Rng& rng, std::size_t M, std::size_t d, double scale) {
  ppgd::NetworkParams p = ppgd::NetworkParams::zeros(M, d);
  for (double& a : p.outer) a = rng.uniform(-scale, scale);
  for (double& b : p.inner) b = rng.uniform(-scale, scale);
  return p;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)}); }

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("ppgd_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
