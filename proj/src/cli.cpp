#include "ppgd/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppgd/dataset.hpp"
#include "ppgd/errors.hpp"
#include "ppgd/experiment.hpp"
#include "ppgd/format.hpp"
#include "ppgd/model_io.hpp"
#include "ppgd/rng.hpp"
#include "ppgd/train.hpp"
#include "ppgd/verify.hpp"

namespace ppgd::cli {

namespace {

// Raised for bad flag values discovered after parsing; maps to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  const char* env = std::getenv("PPGD_SEED");
  if (env == nullptr || *env == '\0') return value;
  std::uint64_t parsed = 0;
  const std::string s(env);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), parsed);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw UsageError("PPGD_SEED is not an unsigned integer: '" + s + "'");
  }
  return parsed;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

void set_threads(std::size_t threads) {
  if (threads > 0) omp_set_num_threads(static_cast<int>(threads));
}

struct Common {
  std::uint64_t seed = 1;
  CLI::Option* seed_opt = nullptr;
  std::size_t threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  c.seed_opt = cmd->add_option("--seed", c.seed, "Base seed (falls back to $PPGD_SEED)");
  cmd->add_option("--threads", c.threads, "Worker threads, 0 = all available cores")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", c.out, out_help);
}

struct TrainFlags {
  std::vector<std::size_t> r_grid{1, 2};
  std::vector<std::size_t> K_grid{5, 10, 20};
  std::size_t restarts = 50;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> steps_cap;
  double c1 = 1.0;
  double c3 = 1.0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& t) {
  cmd->add_option("--r-grid", t.r_grid, "Candidate numbers of ridge terms r")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cmd->add_option("--k-grid", t.K_grid, "Candidate numbers of breakpoints K per ridge term")
      ->delimiter(',')
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  cmd->add_option("--restarts", t.restarts, "Random initialisations per fit")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", t.steps, "Gradient steps per restart (default: ceil(K n ln^2 n))")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps-cap", t.steps_cap, "Upper limit on the scheduled step count")->check(CLI::PositiveNumber);
  cmd->add_option("--c1", t.c1, "Penalty constant")->check(CLI::PositiveNumber);
  cmd->add_option("--beta-c3", t.c3, "Truncation constant: beta = c3 ln n")->check(CLI::PositiveNumber);
}

ScheduleOptions schedule_options(const TrainFlags& t, std::uint64_t seed) {
  ScheduleOptions o;
  o.c1 = t.c1;
  o.c3 = t.c3;
  o.restarts = t.restarts;
  o.steps = t.steps;
  o.steps_cap = t.steps_cap;
  o.seed = seed;
  return o;
}

std::vector<Estimator> parse_roster(const std::vector<std::string>& names) {
  std::vector<Estimator> out;
  for (const auto& s : names) {
    if (s == "neural") out.push_back(Estimator::Neural);
    else if (s == "neighbor") out.push_back(Estimator::Neighbor);
    else if (s == "constant") out.push_back(Estimator::Constant);
    else throw UsageError("unknown estimator '" + s + "'");
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection pursuit regression by gradient descent on a one-hidden-layer sigmoid network", "ppgd"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML or INI file with flag values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  // sample
  auto* sample = app.add_subcommand("sample", "Draw a synthetic sample from m1 or m2 and write it as CSV");
  Common sample_c;
  std::string sample_model = "m1";
  double sample_noise = 0.05;
  std::size_t sample_n = 100;
  sample->add_option("--model", sample_model, "Regression function")->check(CLI::IsMember({"m1", "m2"}));
  sample->add_option("--noise", sample_noise, "Noise level as a fraction of tau")->check(CLI::NonNegativeNumber);
  sample->add_option("--n", sample_n, "Sample size")->check(CLI::PositiveNumber);
  add_common(sample, sample_c, "Output CSV (default: stdout)");

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit the network to a CSV sample (x1..xd,y) and save the model as JSON");
  Common fit_c;
  TrainFlags fit_t;
  std::string fit_data;
  std::optional<double> fit_lambda, fit_rho, fit_beta;
  fitc->add_option("--data", fit_data, "Training CSV with header x1,...,xd,y")->required();
  add_train_flags(fitc, fit_t);
  fitc->add_option("--lambda", fit_lambda, "Step size override (default: 1/(3Kr))")->check(CLI::PositiveNumber);
  fitc->add_option("--rho", fit_rho, "Inner-weight scale override (default: n^2 K)")->check(CLI::PositiveNumber);
  fitc->add_option("--beta", fit_beta, "Truncation level override (default: c3 ln n)")->check(CLI::PositiveNumber);
  add_common(fitc, fit_c, "Model JSON path");
  fitc->get_option("--out")->required();

  // predict
  auto* predc = app.add_subcommand("predict", "Predict with a saved model on the x-rows of a CSV");
  Common pred_c;
  std::string pred_model, pred_data;
  predc->add_option("--model-file", pred_model, "Model JSON written by fit")->required();
  predc->add_option("--data", pred_data, "CSV with columns x1..xd and an optional trailing y")->required();
  add_common(predc, pred_c, "Output CSV (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo study for one (model, noise, n) cell");
  Common sim_c;
  TrainFlags sim_t;
  ExperimentSpec spec;
  std::string sim_model = "m1";
  std::string sim_format = "csv";
  std::vector<std::string> sim_roster{"neural", "neighbor", "constant"};
  bool sim_progress = false;
  sim->add_option("--model", sim_model, "Regression function")->check(CLI::IsMember({"m1", "m2"}));
  sim->add_option("--noise", spec.noise, "Noise level as a fraction of tau")->check(CLI::IsMember({0.05, 0.2}));
  sim->add_option("--n", spec.n, "Sample size")->check(CLI::Range(std::size_t{5}, std::numeric_limits<std::size_t>::max()));
  sim->add_option("--reps", spec.repetitions, "Repetitions")->check(CLI::PositiveNumber);
  sim->add_option("--test-size", spec.test_size, "Test points for the L2 error")->check(CLI::PositiveNumber);
  sim->add_option("--avg-realizations", spec.avg_realizations, "Samples behind the avg_reference median")
      ->check(CLI::PositiveNumber);
  sim->add_option("--knn-grid", spec.knn_grid, "Candidate k for the nearest-neighbor estimate")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sim->add_option("--estimators", sim_roster, "Estimators to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"neural", "neighbor", "constant"}));
  add_train_flags(sim, sim_t);
  sim->add_option("--format", sim_format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sim->add_flag("--progress", sim_progress, "Report each repetition on stderr");
  add_common(sim, sim_c, "Output file (default: stdout)");

  // verify
  auto* ver = app.add_subcommand("verify", "Run the numerical certification suites and print JSON certificates");
  Common ver_c;
  std::string suite = "all";
  std::string ver_format = "json";
  std::size_t grid_points = 100000;
  ver->add_option("suite", suite, "Suite to run")
      ->check(CLI::IsMember({"all", "linear", "sigmoid", "approx", "init", "drift", "regime"}));
  ver->add_option("--grid-points", grid_points, "Evaluation points for the approx suite")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  ver->add_option("--format", ver_format, "Output format; csv applies to the approx suite only")
      ->check(CLI::IsMember({"json", "csv"}));
  add_common(ver, ver_c, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sample->parsed()) {
      const std::uint64_t seed = resolve_seed(sample_c.seed_opt, sample_c.seed);
      set_threads(sample_c.threads);
      const DataSet data = generate_sample(make_synthetic_spec(parse_model(sample_model), sample_noise), sample_n, seed);
      if (sample_c.out.empty() || sample_c.out == "-") {
        std::ostringstream os;
        os << "x1,x2,x3,x4,y\n";
        for (std::size_t i = 0; i < data.size(); ++i) {
          for (double v : data.row(i)) os << format_double(v) << ',';
          os << format_double(data.ys[i]) << '\n';
        }
        out << os.str();
      } else {
        save_csv(data, sample_c.out);
      }
      return kExitOk;
    }

    if (fitc->parsed()) {
      const std::uint64_t seed = resolve_seed(fit_c.seed_opt, fit_c.seed);
      set_threads(fit_c.threads);
      const DataSet data = load_csv(fit_data);
      data.validate();
      const ScheduleOptions opts = schedule_options(fit_t, seed);
      TrainConfig cfg;
      if (fit_t.r_grid.size() == 1 && fit_t.K_grid.size() == 1) {
        cfg = config_for(data.size(), fit_t.r_grid[0], fit_t.K_grid[0], opts);
      } else {
        const SelectionResult sel = select_hyperparams(data, fit_t.r_grid, fit_t.K_grid, opts, stream_seed(seed, 0));
        cfg = sel.config;
      }
      if (fit_lambda) cfg.lambda = *fit_lambda;
      if (fit_rho) cfg.rho = *fit_rho;
      if (fit_beta) cfg.beta = *fit_beta;
      cfg.validate();
      const TrainedModel model = fit(data, cfg);
      save_model(model, fit_c.out);
      out << "r=" << cfg.r << " K=" << cfg.K << " steps=" << cfg.steps << " beta=" << format_double(cfg.beta)
          << " penalized_risk=" << format_double(model.best.penalized_risk) << '\n';
      return kExitOk;
    }

    if (predc->parsed()) {
      set_threads(pred_c.threads);
      const TrainedModel model = load_model(pred_model);
      const CsvTable table = read_numeric_csv(pred_data);
      const std::size_t d = model.best.params.dim;
      const std::size_t cols = table.header.size();
      if (cols != d && cols != d + 1) {
        throw ppgd::ParseError(pred_data + ": expected " + std::to_string(d) + " or " + std::to_string(d + 1) +
                               " columns for a " + std::to_string(d) + "-dimensional model, found " +
                               std::to_string(cols));
      }
      std::ostringstream os;
      os << "prediction\n";
      for (std::size_t i = 0; i < table.rows; ++i) {
        const std::span<const double> x(table.values.data() + i * cols, d);
        os << format_double(predict(model, x)) << '\n';
      }
      emit(os.str(), pred_c.out, out);
      return kExitOk;
    }

    if (sim->parsed()) {
      spec.seed = resolve_seed(sim_c.seed_opt, sim_c.seed);
      spec.model = parse_model(sim_model);
      spec.roster = parse_roster(sim_roster);
      spec.r_grid = sim_t.r_grid;
      spec.K_grid = sim_t.K_grid;
      spec.restarts = sim_t.restarts;
      spec.steps = sim_t.steps;
      spec.steps_cap = sim_t.steps_cap;
      spec.c1 = sim_t.c1;
      spec.c3 = sim_t.c3;
      spec.validate();
      set_threads(sim_c.threads);
      ProgressFn progress;
      if (sim_progress) progress = [&err](const std::string& line) { err << line << std::endl; };
      const ResultTable table = run_experiment(spec, progress);
      emit(sim_format == "csv" ? to_csv(table) : to_json(table, spec), sim_c.out, out);
      return kExitOk;
    }

    if (ver->parsed()) {
      const std::uint64_t seed = resolve_seed(ver_c.seed_opt, ver_c.seed);
      set_threads(ver_c.threads);
      if (ver_format == "csv" && suite != "approx") throw UsageError("--format csv is only available for 'verify approx'");
      std::vector<SuiteResult> results;
      std::vector<ApproxRow> rows;
      if (suite == "all") results = verify_all(seed);
      else if (suite == "linear") results.push_back(verify_linear_gd(seed));
      else if (suite == "sigmoid") results.push_back(verify_sigmoid_indicator());
      else if (suite == "approx") results.push_back(verify_approx(seed, grid_points, &rows));
      else if (suite == "init") results.push_back(verify_init(seed));
      else if (suite == "drift") results.push_back(verify_drift(seed));
      else results.push_back(verify_linear_regime(seed));

      bool passed = true;
      nlohmann::json certs = nlohmann::json::array();
      for (const auto& r : results) {
        passed = passed && r.passed;
        certs.push_back(r.certificate);
      }
      std::string text;
      if (ver_format == "csv") text = approx_rows_csv(rows);
      else if (results.size() == 1) text = results.front().certificate.dump(2) + "\n";
      else text = nlohmann::json({{"seed", seed}, {"passed", passed}, {"suites", certs}}).dump(2) + "\n";
      emit(text, ver_c.out, out);
      for (const auto& r : results) {
        if (!r.passed) err << "certification failed: " << r.name << '\n';
      }
      return passed ? kExitOk : kExitCertification;
    }
  } catch (const CertificationError& e) {
    err << "ppgd: certification failed: " << e.what() << '\n';
    return kExitCertification;
  } catch (const std::exception& e) {
    err << "ppgd: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ppgd::cli
