#include "fspde/harness/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "fspde/error.hpp"

namespace fspde::harness {

using nlohmann::json;

namespace {

const std::vector<std::string> kNames{"fbm-stats",       "stieltjes-oracle", "mollify-rate",
                                      "mild-solve",      "frozen-mixing",    "averaging-study",
                                      "validate"};

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  fail(ErrorKind::Config, field + ": " + what);
}

std::string num(double v) { return fmt::format("{}", v); }

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) config_error(prefix_, "must be an object");
  }

  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out = unset;
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        config_error(field(key), "must be a number");
      }
    }
  }

  void read(const char* key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) config_error(field(key), "must be a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void read(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) config_error(field(key), "must be true or false");
      out = v->get<bool>();
    }
  }

  void read(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) config_error(field(key), "must be an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) {
          config_error(field(key) + "[" + std::to_string(i) + "]", "must be a number");
        }
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void finish() const {
    std::string unknown;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) unknown += (unknown.empty() ? "" : ", ") + it.key();
    }
    if (!unknown.empty()) config_error(prefix_, "unknown keys: " + unknown);
  }

  std::string field(const std::string& key) const { return prefix_ + "." + key; }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void require_hurst(const std::string& field, double h) {
  if (!(h > 0.5 && h < 1.0)) {
    config_error(field, "hurst = " + num(h) + " must lie in (1/2, 1)");
  }
}

void require_alpha(const std::string& field, double alpha, double h) {
  if (!(alpha > 1.0 - h && alpha < 0.5)) {
    config_error(field, "alpha = " + num(alpha) + " must lie in (1-H, 1/2) = (" + num(1.0 - h) +
                            ", 0.5)");
  }
}

void require_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) config_error(field, "must be a finite number > 0");
}

void require_at_least(const std::string& field, std::size_t v, std::size_t lo) {
  if (v < lo) config_error(field, "must be at least " + std::to_string(lo));
}

void parse_section(const json& j, const std::string& name, ExperimentConfig& c) {
  Section s(j, name);
  switch (c.kind) {
    case ExperimentKind::FbmStats: {
      auto& p = c.fbm_stats;
      s.read("hurst", p.hurst);
      s.read("paths", p.paths);
      s.read("grid_points", p.grid_points);
      s.read("horizon", p.horizon);
      s.finish();
      if (p.hurst.empty()) config_error(s.field("hurst"), "needs at least one value");
      for (std::size_t i = 0; i < p.hurst.size(); ++i) {
        require_hurst(s.field("hurst") + "[" + std::to_string(i) + "]", p.hurst[i]);
      }
      require_at_least(s.field("paths"), p.paths, 2);
      require_at_least(s.field("grid_points"), p.grid_points, 2);
      require_positive(s.field("horizon"), p.horizon);
      break;
    }
    case ExperimentKind::StieltjesOracle: {
      auto& p = c.stieltjes;
      s.read("grid_points", p.grid_points);
      s.read("pairs", p.pairs);
      s.read("pair_grid_points", p.pair_grid_points);
      s.read("hurst", p.hurst);
      s.read("alpha", p.alpha);
      s.finish();
      require_at_least(s.field("grid_points"), p.grid_points, 3);
      require_at_least(s.field("pairs"), p.pairs, 1);
      require_at_least(s.field("pair_grid_points"), p.pair_grid_points, 3);
      require_hurst(s.field("hurst"), p.hurst);
      if (!std::isnan(p.alpha)) require_alpha(s.field("alpha"), p.alpha, p.hurst);
      break;
    }
    case ExperimentKind::MollifyRate: {
      auto& p = c.mollify;
      s.read("hurst", p.hurst);
      s.read("alpha", p.alpha);
      s.read("holder", p.holder);
      s.read("samples", p.samples);
      s.read("grid_points", p.grid_points);
      s.read("n_values", p.n_values);
      s.read("levels", p.levels);
      s.read("lambda_grid_points", p.lambda_grid_points);
      s.read("modes", p.modes);
      s.read("decay", p.decay);
      s.finish();
      require_hurst(s.field("hurst"), p.hurst);
      require_alpha(s.field("alpha"), p.alpha, p.hurst);
      if (!(p.holder > 1.0 - p.alpha && p.holder < p.hurst)) {
        config_error(s.field("holder"), "holder = " + num(p.holder) +
                                            " must lie in (1-alpha, H) = (" + num(1.0 - p.alpha) +
                                            ", " + num(p.hurst) + ")");
      }
      require_at_least(s.field("samples"), p.samples, 1);
      require_at_least(s.field("grid_points"), p.grid_points, 3);
      if (p.n_values.size() < 3) config_error(s.field("n_values"), "needs at least three values");
      const double step = 1.0 / static_cast<double>(p.grid_points - 1);
      for (double n : p.n_values) {
        if (!(n >= 1.0) || 1.0 / n < 2.0 * step * (1.0 - 1e-12)) {
          config_error(s.field("n_values"),
                       "n = " + num(n) + " needs n >= 1 and a window 1/n of at least two grid steps");
        }
      }
      if (p.levels.empty()) config_error(s.field("levels"), "needs at least one level");
      for (double l : p.levels) require_positive(s.field("levels"), l);
      require_at_least(s.field("lambda_grid_points"), p.lambda_grid_points, 3);
      const double lstep = 1.0 / static_cast<double>(p.lambda_grid_points - 1);
      if (1.0 / *std::max_element(p.n_values.begin(), p.n_values.end()) < 2.0 * lstep * (1.0 - 1e-12)) {
        config_error(s.field("lambda_grid_points"), "too coarse for the mollifier windows 1/n");
      }
      require_at_least(s.field("modes"), p.modes, 1);
      if (!(p.decay > 2.0)) config_error(s.field("decay"), "decay = " + num(p.decay) + " must be > 2");
      break;
    }
    case ExperimentKind::MildSolve: {
      auto& p = c.mild;
      s.read("dt", p.dt);
      s.read("horizon", p.horizon);
      s.read("paths", p.paths);
      s.read("hurst", p.hurst);
      s.read("modes", p.modes);
      s.read("check_time", p.check_time);
      s.read("halving_paths", p.halving_paths);
      s.finish();
      require_positive(s.field("dt"), p.dt);
      require_positive(s.field("horizon"), p.horizon);
      const double steps = p.horizon / p.dt;
      if (std::abs(steps - std::round(steps)) > 1e-9 * steps || std::round(steps) < 4.0) {
        config_error(s.field("dt"), "horizon / dt must be an integer of at least 4");
      }
      require_at_least(s.field("paths"), p.paths, 2);
      require_hurst(s.field("hurst"), p.hurst);
      require_at_least(s.field("modes"), p.modes, 1);
      const double at = p.check_time / p.dt;
      if (!(p.check_time > 0.0 && p.check_time <= p.horizon) ||
          std::abs(at - std::round(at)) > 1e-9 * at) {
        config_error(s.field("check_time"), "must be a grid point in (0, horizon]");
      }
      require_at_least(s.field("halving_paths"), p.halving_paths, 1);
      break;
    }
    case ExperimentKind::FrozenMixing: {
      auto& p = c.frozen;
      s.read("modes", p.modes);
      s.read("couples", p.couples);
      s.read("dt", p.dt);
      s.read("span", p.span);
      s.read("bbar_horizon", p.bbar_horizon);
      s.read("batches", p.batches);
      s.read("rel_tolerance", p.rel_tolerance);
      s.finish();
      require_at_least(s.field("modes"), p.modes, 1);
      require_at_least(s.field("couples"), p.couples, 2);
      require_positive(s.field("dt"), p.dt);
      require_positive(s.field("span"), p.span);
      require_positive(s.field("bbar_horizon"), p.bbar_horizon);
      require_at_least(s.field("batches"), p.batches, 2);
      require_positive(s.field("rel_tolerance"), p.rel_tolerance);
      break;
    }
    case ExperimentKind::AveragingStudy: {
      auto& p = c.averaging;
      s.read("modes", p.modes);
      s.read("eps", p.eps);
      s.read("replicates", p.replicates);
      s.read("dt", p.dt);
      s.read("c_sub", p.c_sub);
      s.read("horizon", p.horizon);
      s.read("check_independent", p.check_independent);
      s.finish();
      require_at_least(s.field("modes"), p.modes, 1);
      if (p.eps.size() < 3) config_error(s.field("eps"), "needs at least three values");
      for (std::size_t i = 0; i < p.eps.size(); ++i) {
        if (!(p.eps[i] > 0.0 && p.eps[i] < 1.0)) {
          config_error(s.field("eps"), "eps = " + num(p.eps[i]) + " must lie in (0, 1)");
        }
        if (i > 0 && !(p.eps[i] < p.eps[i - 1])) {
          config_error(s.field("eps"), "values must be strictly decreasing");
        }
      }
      require_at_least(s.field("replicates"), p.replicates, 2);
      require_positive(s.field("dt"), p.dt);
      if (!(p.c_sub > 0.0 && p.c_sub <= 1.0)) config_error(s.field("c_sub"), "must lie in (0, 1]");
      require_positive(s.field("horizon"), p.horizon);
      break;
    }
    case ExperimentKind::Validate: {
      auto& p = c.validate;
      s.read("modes", p.modes);
      s.read("pairs", p.pairs);
      s.read("radius", p.radius);
      s.read("c1", p.c1);
      s.read("c2", p.c2);
      s.read("c3", p.c3);
      s.read("c4", p.c4);
      s.read("beta1", p.beta1);
      s.read("beta2", p.beta2);
      s.read("beta3", p.beta3);
      s.read("bounded_fast", p.bounded_fast);
      s.finish();
      require_at_least(s.field("modes"), p.modes, 1);
      require_at_least(s.field("pairs"), p.pairs, 1);
      require_positive(s.field("radius"), p.radius);
      break;
    }
  }
}

json opt(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json section_json(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::FbmStats: {
      const auto& p = c.fbm_stats;
      return {{"hurst", p.hurst}, {"paths", p.paths}, {"grid_points", p.grid_points},
              {"horizon", p.horizon}};
    }
    case ExperimentKind::StieltjesOracle: {
      const auto& p = c.stieltjes;
      return {{"grid_points", p.grid_points}, {"pairs", p.pairs},
              {"pair_grid_points", p.pair_grid_points}, {"hurst", p.hurst},
              {"alpha", opt(p.alpha)}};
    }
    case ExperimentKind::MollifyRate: {
      const auto& p = c.mollify;
      return {{"hurst", p.hurst},       {"alpha", p.alpha},     {"holder", p.holder},
              {"samples", p.samples},   {"grid_points", p.grid_points},
              {"n_values", p.n_values}, {"levels", p.levels},   {"lambda_grid_points", p.lambda_grid_points},
              {"modes", p.modes},       {"decay", p.decay}};
    }
    case ExperimentKind::MildSolve: {
      const auto& p = c.mild;
      return {{"dt", p.dt},       {"horizon", p.horizon},       {"paths", p.paths},
              {"hurst", p.hurst}, {"modes", p.modes},           {"check_time", p.check_time},
              {"halving_paths", p.halving_paths}};
    }
    case ExperimentKind::FrozenMixing: {
      const auto& p = c.frozen;
      return {{"modes", p.modes},     {"couples", p.couples},
              {"dt", p.dt},           {"span", p.span},
              {"bbar_horizon", p.bbar_horizon}, {"batches", p.batches},
              {"rel_tolerance", p.rel_tolerance}};
    }
    case ExperimentKind::AveragingStudy: {
      const auto& p = c.averaging;
      return {{"modes", p.modes}, {"eps", p.eps},         {"replicates", p.replicates},
              {"dt", p.dt},       {"c_sub", p.c_sub},     {"horizon", p.horizon},
              {"check_independent", p.check_independent}};
    }
    case ExperimentKind::Validate: {
      const auto& p = c.validate;
      return {{"modes", p.modes},   {"pairs", p.pairs},   {"radius", p.radius},
              {"c1", opt(p.c1)},    {"c2", opt(p.c2)},    {"c3", opt(p.c3)},
              {"c4", opt(p.c4)},    {"beta1", opt(p.beta1)}, {"beta2", opt(p.beta2)},
              {"beta3", opt(p.beta3)}, {"bounded_fast", p.bounded_fast}};
    }
  }
  return {};
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

ExperimentKind kind_from_string(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ExperimentKind>(i);
  }
  std::string all;
  for (const auto& n : kNames) all += (all.empty() ? "" : ", ") + n;
  config_error("kind", "unknown experiment '" + name + "' (expected one of " + all + ")");
}

const std::vector<std::string>& kind_names() { return kNames; }

std::string ExperimentConfig::canonical() const {
  json j;
  j["kind"] = to_string(kind);
  j["seed"] = seed;
  j[to_string(kind)] = section_json(*this);
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("config", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config", "top level must be an object");

  ExperimentConfig c;
  const auto kind = root.find("kind");
  if (kind == root.end()) config_error("kind", "missing");
  if (!kind->is_string()) config_error("kind", "must be a string");
  c.kind = kind_from_string(kind->get<std::string>());
  const std::string section = to_string(c.kind);

  std::string unknown;
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (it.key() != "kind" && it.key() != "seed" && it.key() != "threads" && it.key() != section) {
      unknown += (unknown.empty() ? "" : ", ") + it.key();
    }
  }
  if (!unknown.empty()) config_error("config", "unknown keys: " + unknown);

  const auto seed = root.find("seed");
  if (seed == root.end()) config_error("seed", "missing (every experiment needs an explicit seed)");
  if (!seed->is_number_unsigned()) config_error("seed", "must be a non-negative integer");
  c.seed = seed->get<std::uint64_t>();

  if (const auto t = root.find("threads"); t != root.end()) {
    if (!t->is_number_unsigned() || t->get<std::size_t>() == 0) {
      config_error("threads", "must be a positive integer");
    }
    c.threads = t->get<std::size_t>();
  }

  const auto sec = root.find(section);
  parse_section(sec == root.end() ? json::object() : *sec, section, c);
  return c;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::Config, "cannot read config file " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fspde::harness
