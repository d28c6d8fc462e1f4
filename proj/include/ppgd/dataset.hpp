#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ppgd {

/// Regression sample (x_i, y_i), i = 1..n, with x_i in [-A, A]^d.
///
/// Design points are stored row-major in one flat buffer so the training
/// kernels can stream over them.
struct DataSet {
  std::size_t dim = 0;
  std::vector<double> xs;  // n * dim, row-major
  std::vector<double> ys;  // n
  double a_bound = 1.0;    // A >= 1

  std::size_t size() const { return ys.size(); }
  std::span<const double> row(std::size_t i) const { return {xs.data() + i * dim, dim}; }

  /// Largest |x_i^(j)| over the sample (0 when empty).
  double max_abs_x() const;

  /// Throws ConfigError unless the type invariants hold.
  void validate() const;

  /// Rows selected by `indices`, in that order; a_bound is kept.
  DataSet subset(std::span<const std::size_t> indices) const;

  bool operator==(const DataSet&) const = default;
};

enum class ModelId { M1, M2 };

/// Published IQR scales of m1(X) and m2(X) for X uniform on [-1,1]^4.
inline constexpr double kTauM1 = 2.8289;
inline constexpr double kTauM2 = 5.2841;
inline constexpr std::size_t kSyntheticDim = 4;

struct SyntheticSpec {
  ModelId model = ModelId::M1;
  double noise_fraction = 0.05;
  double tau = kTauM1;
};

/// Spec with the matching published tau.
SyntheticSpec make_synthetic_spec(ModelId model, double noise_fraction);

double tau_for(ModelId model);

/// m1 or m2 at a point of R^4.
double eval_target(ModelId model, std::span<const double> x);
inline double eval_target(const SyntheticSpec& spec, std::span<const double> x) {
  return eval_target(spec.model, x);
}

/// n i.i.d. draws: X uniform on [-1,1]^4, Y = m(X) + noise * tau * eps.
/// Per row the generator is consumed as 4 uniforms then one normal.
DataSet generate_sample(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed);

/// Same draw order as above with an arbitrary target and noise standard
/// deviation; generate_sample(spec, ...) is this with m_j and noise * tau.
DataSet generate_sample(const std::function<double(std::span<const double>)>& target, double noise_sd,
                        std::size_t n, std::uint64_t seed);

/// Design points only (uniform on [-1,1]^4), for test sets.
std::vector<double> generate_design(std::size_t n, std::uint64_t seed);

/// Reads `x1,...,xd,y`. a_bound = max(1, max |x|).
DataSet load_csv(const std::filesystem::path& path);

/// Writes `x1,...,xd,y` with shortest round-trip number formatting.
void save_csv(const DataSet& data, const std::filesystem::path& path);

/// Reads a header plus numeric rows. Returns the header names and the
/// row-major values; every row must match the header arity.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<double> values;
  std::size_t rows = 0;
};
CsvTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace ppgd
