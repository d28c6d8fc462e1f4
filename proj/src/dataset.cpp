#include "ppgd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ppgd/errors.hpp"
#include "ppgd/format.hpp"
#include "ppgd/rng.hpp"

namespace ppgd {

double DataSet::max_abs_x() const {
  double m = 0.0;
  for (double v : xs) m = std::max(m, std::abs(v));
  return m;
}

void DataSet::validate() const {
  if (dim == 0) throw ConfigError("data set has dimension 0");
  if (ys.empty()) throw ConfigError("data set is empty");
  if (xs.size() != ys.size() * dim) throw ConfigError("data set: xs and ys lengths disagree");
  if (!(a_bound >= 1.0) || !std::isfinite(a_bound)) throw ConfigError("data set: a_bound must be a finite value >= 1");
  for (double v : xs) {
    if (!std::isfinite(v) || std::abs(v) > a_bound) {
      throw ConfigError("data set: design point outside [-A, A]^d");
    }
  }
  for (double v : ys) {
    if (!std::isfinite(v)) throw ConfigError("data set: non-finite response");
  }
}

DataSet DataSet::subset(std::span<const std::size_t> indices) const {
  DataSet out;
  out.dim = dim;
  out.a_bound = a_bound;
  out.xs.reserve(indices.size() * dim);
  out.ys.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.xs.insert(out.xs.end(), r.begin(), r.end());
    out.ys.push_back(ys[i]);
  }
  return out;
}

double tau_for(ModelId model) { return model == ModelId::M1 ? kTauM1 : kTauM2; }

SyntheticSpec make_synthetic_spec(ModelId model, double noise_fraction) {
  if (!(noise_fraction >= 0.0) || !std::isfinite(noise_fraction)) {
    throw ConfigError("noise fraction must be finite and non-negative");
  }
  return SyntheticSpec{model, noise_fraction, tau_for(model)};
}

double eval_target(ModelId model, std::span<const double> x) {
  if (x.size() != kSyntheticDim) {
    throw std::invalid_argument("synthetic targets are defined on R^4, got dimension " +
                                std::to_string(x.size()));
  }
  const double ridge = (2.0 * std::numbers::pi / std::sqrt(4.0)) * (-x[0] + x[1] - x[2] + x[3]);
  if (model == ModelId::M1) return 2.0 * std::sin(ridge);
  const double second = (x[0] - 2.0 * x[1] + 3.0 * x[2] - 4.0 * x[3]) / std::sqrt(30.0);
  return 4.0 * std::sin(ridge) + 7.0 / (2.0 + second);
}

DataSet generate_sample(const std::function<double(std::span<const double>)>& target, double noise_sd,
                        std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample size must be at least 1");
  Rng rng(seed);
  DataSet data;
  data.dim = kSyntheticDim;
  data.a_bound = 1.0;
  data.xs.resize(n * kSyntheticDim);
  data.ys.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* x = data.xs.data() + i * kSyntheticDim;
    for (std::size_t j = 0; j < kSyntheticDim; ++j) x[j] = rng.uniform(-1.0, 1.0);
    const double eps = rng.normal();
    data.ys[i] = target({x, kSyntheticDim}) + noise_sd * eps;
  }
  return data;
}

DataSet generate_sample(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
  const ModelId model = spec.model;
  return generate_sample([model](std::span<const double> x) { return eval_target(model, x); },
                         spec.noise_fraction * spec.tau, n, seed);
}

std::vector<double> generate_design(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n * kSyntheticDim);
  for (double& v : xs) v = rng.uniform(-1.0, 1.0);
  return xs;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

CsvTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");

  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    auto fields = split_fields(view);
    if (!have_header) {
      for (auto f : fields) table.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      fail(path, line_no,
           "expected " + std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    for (auto f : fields) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        fail(path, line_no, "non-numeric cell '" + std::string(f) + "'");
      }
      table.values.push_back(v);
    }
    ++table.rows;
  }
  if (!have_header) throw ParseError(path.string() + ": missing header row");
  return table;
}

DataSet load_csv(const std::filesystem::path& path) {
  CsvTable table = read_numeric_csv(path);
  const std::size_t cols = table.header.size();
  if (cols < 2 || table.header.back() != "y") {
    fail(path, 1, "header must be x1,...,xd,y");
  }
  for (std::size_t j = 0; j + 1 < cols; ++j) {
    if (table.header[j] != "x" + std::to_string(j + 1)) fail(path, 1, "header must be x1,...,xd,y");
  }
  if (table.rows == 0) throw ParseError(path.string() + ": no data rows");

  DataSet data;
  data.dim = cols - 1;
  data.xs.reserve(table.rows * data.dim);
  data.ys.reserve(table.rows);
  for (std::size_t i = 0; i < table.rows; ++i) {
    const double* r = table.values.data() + i * cols;
    data.xs.insert(data.xs.end(), r, r + data.dim);
    data.ys.push_back(r[data.dim]);
  }
  data.a_bound = std::max(1.0, data.max_abs_x());
  return data;
}

void save_csv(const DataSet& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path.string() + ": cannot open file for writing");
  for (std::size_t j = 0; j < data.dim; ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << format_double(v) << ',';
    out << format_double(data.ys[i]) << '\n';
  }
  if (!out) throw ParseError(path.string() + ": write failed");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace ppgd
