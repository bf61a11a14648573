#include "fliv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fliv/errors.hpp"

namespace fliv {

using nlohmann::json;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Fit: return "fit";
    case Command::Bootstrap: return "bootstrap";
    case Command::Bench: return "bench";
  }
  return "?";
}

std::string_view to_string(ReportFormat f) { return f == ReportFormat::Csv ? "csv" : "json"; }

ReportFormat parse_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  fail(ErrorKind::InvalidConfig, "unknown format '" + std::string(s) + "' (expected csv or json)");
}

namespace {

Command parse_command(std::string_view s) {
  for (Command c : {Command::Simulate, Command::Fit, Command::Bootstrap, Command::Bench})
    if (s == to_string(c)) return c;
  fail(ErrorKind::InvalidConfig, "unknown command '" + std::string(s) + "'");
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("config key '") + key + "': " + e.what());
  }
}

CovarianceSpec with_sigma(CovarianceSpec s, double sigma) {
  s.sigma = sigma;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() { return {"study1", "study2", "study3", "study4", "study5"}; }

std::vector<ScenarioConfig> preset_scenarios(const std::string& name, const ScenarioConfig& base) {
  std::vector<ScenarioConfig> out;
  if (name == "study1") {
    for (std::size_t n : {100, 500, 1000, 5000}) {
      ScenarioConfig s = base;
      s.n = n;
      out.push_back(s);
    }
  } else if (name == "study2") {
    for (ErrorLaw law : {ErrorLaw::Normal, ErrorLaw::StudentT, ErrorLaw::Laplace}) {
      ScenarioConfig s = base;
      s.me_dist = law;
      out.push_back(s);
    }
  } else if (name == "study3") {
    const double patterns[7][3] = {{0.5, 0.5, 0.5},  {0.25, 0.5, 0.5}, {0.75, 0.5, 0.5}, {0.5, 0.25, 0.5},
                                   {0.5, 0.75, 0.5}, {0.5, 0.5, 0.25}, {0.5, 0.5, 0.75}};
    ScenarioConfig ind = base;
    ind.cov_x = {CovStructure::IND, 0.0, base.cov_x.sigma, base.cov_x.structure_seed};
    ind.cov_u = {CovStructure::IND, 0.0, base.cov_u.sigma, base.cov_u.structure_seed};
    ind.cov_m = {CovStructure::IND, 0.0, base.cov_m.sigma, base.cov_m.structure_seed};
    out.push_back(ind);
    for (CovStructure st : {CovStructure::AR1, CovStructure::CS, CovStructure::UN}) {
      for (const auto& p : patterns) {
        ScenarioConfig s = base;
        s.cov_x = {st, p[0], base.cov_x.sigma, base.cov_x.structure_seed};
        s.cov_u = {st, p[1], base.cov_u.sigma, base.cov_u.structure_seed};
        s.cov_m = {st, p[2], base.cov_m.sigma, base.cov_m.structure_seed};
        out.push_back(s);
      }
    }
  } else if (name == "study4") {
    // (sigma_X, sigma_U) pairs in increasing order of their ratio.
    const double pairs[12][2] = {{1.0, 2.0}, {1.5, 2.0}, {1.0, 1.0}, {2.0, 2.0}, {1.5, 1.0}, {1.0, 0.5},
                                 {2.0, 1.0}, {4.0, 2.0}, {1.5, 0.5}, {2.0, 0.5}, {4.0, 1.0}, {4.0, 0.5}};
    for (const auto& p : pairs) {
      ScenarioConfig s = base;
      s.cov_x = with_sigma(base.cov_x, p[0]);
      s.cov_u = with_sigma(base.cov_u, p[1]);
      out.push_back(s);
    }
  } else if (name == "study5") {
    for (double sm : {0.5, 1.0, 2.0, 4.0}) {
      ScenarioConfig s = base;
      s.cov_m = with_sigma(base.cov_m, sm);
      s.c = 0.5;
      out.push_back(s);
    }
    for (double c : {0.0, 0.25, 0.5, 0.75}) {
      ScenarioConfig s = base;
      s.cov_m = with_sigma(base.cov_m, 1.0);
      s.c = c;
      out.push_back(s);
    }
  } else {
    fail(ErrorKind::InvalidConfig, "unknown preset '" + name + "' (expected study1 ... study5)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::InvalidConfig, std::string(to_string(command)) + " requires " + what);
  };
  need(!estimators.empty(), "at least one estimator");
  need(k_range.min >= 2 && k_range.min <= k_range.max, "a valid K range (k_min <= k_max)");
  need(threads >= 0, "threads >= 0");
  switch (command) {
    case Command::Simulate:
      need(!out.empty(), "an output path (--out)");
      need(reps >= 1, "reps >= 1");
      break;
    case Command::Fit:
    case Command::Bootstrap:
      need(long_csv.has_value(), "a long-format curve file (--long-csv)");
      need(outcomes_csv.has_value(), "an outcome file (--outcomes)");
      need(!out.empty(), "an output path (--out)");
      if (command == Command::Bootstrap) {
        need(bootstrap_reps >= 2, "bootstrap reps >= 2");
        need(level > 0.0 && level < 1.0, "0 < level < 1");
        need(estimators.size() == 1, "exactly one estimator");
      }
      break;
    case Command::Bench:
      need(bench_reps >= 1, "bench reps >= 1");
      break;
  }
  for (const auto& s : scenarios()) s.validate();
  simex_config().validate();
}

SimexConfig RunConfig::simex_config() const {
  SimexConfig cfg;
  cfg.lambda_grid = SimexConfig::lambda_grid_from(lambda_max, lambda_step);
  cfg.n_sim = simex_nsim;
  return cfg;
}

EstimatorOptions RunConfig::estimator_options() const {
  EstimatorOptions opts;
  opts.simex = simex_config();
  opts.simex.threads = threads == 0 ? 0 : threads;
  opts.simex_seed = seed;
  return opts;
}

std::vector<ScenarioConfig> RunConfig::scenarios() const {
  ScenarioConfig base = scenario;
  base.seed = seed;
  std::vector<ScenarioConfig> raw = preset ? preset_scenarios(*preset, base) : std::vector<ScenarioConfig>{base};
  std::vector<ScenarioConfig> out;
  for (auto s : raw) {
    if (n_override) s.n = *n_override;
    if (n_grid_override) s.n_grid = *n_grid_override;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

json scenario_to_json(const ScenarioConfig& s) {
  json j;
  j["n"] = s.n;
  j["n_grid"] = s.n_grid;
  auto put = [&](const char* p, const CovarianceSpec& c) {
    const std::string pre(p);
    j[pre + "_structure"] = std::string(to_string(c.structure));
    j[pre + "_rho"] = c.rho;
    j[pre + "_sigma"] = c.sigma;
  };
  put("x", s.cov_x);
  put("u", s.cov_u);
  put("m", s.cov_m);
  j["structure_seed"] = s.cov_x.structure_seed;
  j["c"] = s.c;
  j["me_dist"] = std::string(to_string(s.me_dist));
  j["seed"] = s.seed;
  return j;
}

namespace {

// Applies one flat scenario key; false if the key is not a scenario key.
bool apply_scenario_key(ScenarioConfig& s, const std::string& key, const json& v) {
  auto spec = [&](char p) -> CovarianceSpec& { return p == 'x' ? s.cov_x : (p == 'u' ? s.cov_u : s.cov_m); };
  if (key == "n") {
    s.n = get_as<std::size_t>(v, "n");
  } else if (key == "n_grid") {
    s.n_grid = get_as<std::size_t>(v, "n_grid");
  } else if (key.size() > 2 && key[1] == '_' && (key[0] == 'x' || key[0] == 'u' || key[0] == 'm')) {
    const std::string field = key.substr(2);
    CovarianceSpec& c = spec(key[0]);
    if (field == "structure") c.structure = parse_structure(get_as<std::string>(v, key.c_str()));
    else if (field == "rho") c.rho = get_as<double>(v, key.c_str());
    else if (field == "sigma") c.sigma = get_as<double>(v, key.c_str());
    else return false;
  } else if (key == "structure_seed") {
    const auto seed = get_as<std::uint64_t>(v, "structure_seed");
    s.cov_x.structure_seed = s.cov_u.structure_seed = s.cov_m.structure_seed = seed;
  } else if (key == "c") {
    s.c = get_as<double>(v, "c");
  } else if (key == "me_dist") {
    s.me_dist = parse_error_law(get_as<std::string>(v, "me_dist"));
  } else if (key == "seed") {
    s.seed = get_as<std::uint64_t>(v, "seed");
  } else {
    return false;
  }
  return true;
}

std::vector<Estimator> parse_estimator_list(const json& v) {
  std::vector<std::string> names;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) names.push_back(item);
  } else {
    names = get_as<std::vector<std::string>>(v, "estimators");
  }
  std::vector<Estimator> out;
  for (const auto& name : names) {
    if (name == "all") return {std::begin(kAllEstimators), std::end(kAllEstimators)};
    const Estimator e = parse_estimator(name);
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  }
  return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j, ScenarioConfig base) {
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, "scenario must be a JSON object");
  for (const auto& [key, v] : j.items())
    if (!apply_scenario_key(base, key, v)) fail(ErrorKind::InvalidConfig, "unknown scenario key '" + key + "'");
  return base;
}

json config_to_json(const RunConfig& c) {
  json j = scenario_to_json(c.scenario);
  j["command"] = std::string(to_string(c.command));
  j["preset"] = c.preset ? json(*c.preset) : json(nullptr);
  if (c.preset && !c.n_override) j.erase("n");
  if (c.preset && !c.n_grid_override) j.erase("n_grid");
  j["seed"] = c.seed;
  std::vector<std::string> est;
  for (Estimator e : c.estimators) est.emplace_back(key_name(e));
  j["estimators"] = est;
  j["k_min"] = c.k_range.min;
  j["k_max"] = c.k_range.max;
  j["reps"] = c.reps;
  j["bootstrap_reps"] = c.bootstrap_reps;
  j["level"] = c.level;
  j["simex_nsim"] = c.simex_nsim;
  j["lambda_max"] = c.lambda_max;
  j["lambda_step"] = c.lambda_step;
  j["threads"] = c.threads;
  j["bench_reps"] = c.bench_reps;
  j["out"] = c.out;
  j["format"] = std::string(to_string(c.format));
  j["export_data"] = c.export_data ? json(*c.export_data) : json(nullptr);
  j["long_csv"] = c.long_csv ? json(*c.long_csv) : json(nullptr);
  j["outcomes_csv"] = c.outcomes_csv ? json(*c.outcomes_csv) : json(nullptr);
  j["col_subject"] = c.long_schema.subject;
  j["col_role"] = c.long_schema.role;
  j["col_day"] = c.long_schema.day;
  j["col_time"] = c.long_schema.time;
  j["col_value"] = c.long_schema.value;
  j["w_label"] = c.long_schema.w_label;
  j["m_label"] = c.long_schema.m_label;
  j["outcome_id"] = c.outcome_schema.id;
  j["outcome"] = c.outcome_schema.outcome;
  j["covariates"] = c.outcome_schema.covariates;
  j["weight"] = c.outcome_schema.weight ? json(*c.outcome_schema.weight) : json(nullptr);
  j["outlier_iqr_multiplier"] =
      c.preprocess.outlier_iqr_multiplier ? json(*c.preprocess.outlier_iqr_multiplier) : json(nullptr);
  j["required_times"] = c.preprocess.required_times;
  j["retained_times"] = c.preprocess.retained_times;
  j["min_days"] = c.preprocess.min_days;
  j["max_bad_fraction"] = c.max_bad_fraction;
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, "config must be a JSON object");
  auto opt_string = [](const json& v, const char* key) -> std::optional<std::string> {
    if (v.is_null()) return std::nullopt;
    return get_as<std::string>(v, key);
  };
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "n") {
      c.n_override = get_as<std::size_t>(v, k);
      c.scenario.n = *c.n_override;
    } else if (key == "n_grid") {
      c.n_grid_override = get_as<std::size_t>(v, k);
      c.scenario.n_grid = *c.n_grid_override;
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, k);
      c.scenario.seed = c.seed;
    } else if (apply_scenario_key(c.scenario, key, v)) {
      continue;
    } else if (key == "command") {
      c.command = parse_command(get_as<std::string>(v, k));
    } else if (key == "preset") {
      c.preset = opt_string(v, k);
    } else if (key == "estimators") {
      c.estimators = parse_estimator_list(v);
    } else if (key == "k_min") {
      c.k_range.min = get_as<int>(v, k);
    } else if (key == "k_max") {
      c.k_range.max = get_as<int>(v, k);
    } else if (key == "reps") {
      c.reps = get_as<int>(v, k);
    } else if (key == "bootstrap_reps") {
      c.bootstrap_reps = get_as<int>(v, k);
    } else if (key == "level") {
      c.level = get_as<double>(v, k);
    } else if (key == "simex_nsim") {
      c.simex_nsim = get_as<int>(v, k);
    } else if (key == "lambda_max") {
      c.lambda_max = get_as<double>(v, k);
    } else if (key == "lambda_step") {
      c.lambda_step = get_as<double>(v, k);
    } else if (key == "threads") {
      c.threads = get_as<int>(v, k);
    } else if (key == "bench_reps") {
      c.bench_reps = get_as<int>(v, k);
    } else if (key == "out") {
      c.out = get_as<std::string>(v, k);
    } else if (key == "format") {
      c.format = parse_format(get_as<std::string>(v, k));
    } else if (key == "export_data") {
      c.export_data = opt_string(v, k);
    } else if (key == "long_csv") {
      c.long_csv = opt_string(v, k);
    } else if (key == "outcomes_csv") {
      c.outcomes_csv = opt_string(v, k);
    } else if (key == "col_subject") {
      c.long_schema.subject = get_as<std::string>(v, k);
    } else if (key == "col_role") {
      c.long_schema.role = get_as<std::string>(v, k);
    } else if (key == "col_day") {
      c.long_schema.day = get_as<std::string>(v, k);
    } else if (key == "col_time") {
      c.long_schema.time = get_as<std::string>(v, k);
    } else if (key == "col_value") {
      c.long_schema.value = get_as<std::string>(v, k);
    } else if (key == "w_label") {
      c.long_schema.w_label = get_as<std::string>(v, k);
    } else if (key == "m_label") {
      c.long_schema.m_label = get_as<std::string>(v, k);
    } else if (key == "outcome_id") {
      c.outcome_schema.id = get_as<std::string>(v, k);
    } else if (key == "outcome") {
      c.outcome_schema.outcome = get_as<std::string>(v, k);
    } else if (key == "covariates") {
      c.outcome_schema.covariates = get_as<std::vector<std::string>>(v, k);
    } else if (key == "weight") {
      c.outcome_schema.weight = opt_string(v, k);
    } else if (key == "outlier_iqr_multiplier") {
      c.preprocess.outlier_iqr_multiplier =
          v.is_null() ? std::nullopt : std::optional<double>(get_as<double>(v, k));
    } else if (key == "required_times") {
      c.preprocess.required_times = get_as<std::vector<int>>(v, k);
    } else if (key == "retained_times") {
      c.preprocess.retained_times = get_as<std::vector<int>>(v, k);
    } else if (key == "min_days") {
      c.preprocess.min_days = get_as<int>(v, k);
    } else if (key == "max_bad_fraction") {
      c.max_bad_fraction = get_as<double>(v, k);
    } else {
      fail(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidConfig, "cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidConfig, "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

}  // namespace fliv
