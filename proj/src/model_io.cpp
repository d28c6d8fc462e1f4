#include "ppgd/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ppgd/errors.hpp"

namespace ppgd {

using nlohmann::json;

std::string model_to_json(const TrainedModel& model) {
  const NetworkParams& p = model.best.params;
  json inner = json::array();
  for (std::size_t k = 0; k < p.neurons(); ++k) {
    const auto row = p.neuron(k);
    inner.push_back(std::vector<double>(row.begin(), row.end()));
  }
  const TrainConfig& c = model.config;
  json doc = {{"d", p.dim},
              {"r", c.r},
              {"K", c.K},
              {"beta", model.beta},
              {"outer", p.outer},
              {"inner", inner},
              {"penalized_risk", model.best.penalized_risk},
              {"config",
               {{"r", c.r},
                {"K", c.K},
                {"c1", c.c1},
                {"lambda", c.lambda},
                {"rho", c.rho},
                {"steps", c.steps},
                {"restarts", c.restarts},
                {"beta", c.beta},
                {"seed", c.seed}}}};
  return doc.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  TrainedModel m;
  try {
    const json doc = json::parse(text);
    NetworkParams& p = m.best.params;
    p.dim = doc.at("d").get<std::size_t>();
    p.outer = doc.at("outer").get<std::vector<double>>();
    for (const auto& row : doc.at("inner")) {
      const auto v = row.get<std::vector<double>>();
      if (v.size() != p.dim + 1) throw ParseError("model: inner row has the wrong length");
      p.inner.insert(p.inner.end(), v.begin(), v.end());
    }
    p.validate();
    m.beta = doc.at("beta").get<double>();
    m.best.penalized_risk = doc.value("penalized_risk", 0.0);
    TrainConfig& c = m.config;
    c.r = doc.at("r").get<std::size_t>();
    c.K = doc.at("K").get<std::size_t>();
    c.beta = m.beta;
    if (doc.contains("config")) {
      const json& cj = doc.at("config");
      c.c1 = cj.value("c1", c.c1);
      c.lambda = cj.value("lambda", c.lambda);
      c.rho = cj.value("rho", c.rho);
      c.steps = cj.value("steps", c.steps);
      c.restarts = cj.value("restarts", c.restarts);
      c.seed = cj.value("seed", c.seed);
    }
    if (p.neurons() != c.r * c.K) throw ParseError("model: neuron count does not match r * K");
    if (!(m.beta > 0.0)) throw ParseError("model: beta must be positive");
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path.string() + ": cannot open file for writing");
  out << model_to_json(model);
  if (!out) throw ParseError(path.string() + ": write failed");
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace ppgd
