#include "fliv/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fliv/errors.hpp"

namespace fliv {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

void write_echo(std::ostream& out, const json& echo) { out << "# config=" << echo.dump() << '\n'; }

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + (ext.empty() ? ".csv" : ext);
}

}  // namespace

json report_to_json(const MonteCarloReport& r) {
  json j;
  j["scenario"] = scenario_to_json(r.scenario);
  j["label"] = r.label;
  j["R"] = r.R;
  j["grid"] = r.grid;
  j["truth_curve"] = vec_json(r.truth_curve);
  json hist = json::object();
  for (const auto& [k, count] : r.k_histogram) hist[std::to_string(k)] = count;
  j["k_histogram"] = hist;
  json ests = json::array();
  for (const auto& s : r.estimators) {
    json e;
    e["estimator"] = std::string(key_name(s.estimator));
    e["successes"] = s.successes;
    e["failures"] = s.failures;
    e["abias2"] = s.abias2;
    e["avar"] = s.avar;
    e["aimse"] = s.aimse;
    e["mean_mspee"] = s.mean_mspee;
    e["mspee_of_mean"] = s.mspee_of_mean;
    e["mean_fit_seconds"] = s.mean_fit_seconds;
    e["mean_curve"] = vec_json(s.mean_curve);
    e["lower"] = vec_json(s.lower);
    e["upper"] = vec_json(s.upper);
    e["flagged"] = s.flagged;
    e["first_error"] = s.first_error;
    ests.push_back(std::move(e));
  }
  j["estimators"] = std::move(ests);
  return j;
}

MonteCarloReport report_from_json(const json& j) {
  try {
    MonteCarloReport r;
    r.scenario = scenario_from_json(j.at("scenario"));
    r.label = j.at("label").get<std::string>();
    r.R = j.at("R").get<int>();
    r.grid = j.at("grid").get<std::vector<double>>();
    r.truth_curve = json_vec(j.at("truth_curve"));
    for (const auto& [k, count] : j.at("k_histogram").items()) r.k_histogram[std::stoi(k)] = count.get<int>();
    for (const auto& e : j.at("estimators")) {
      EstimatorSummary s;
      s.estimator = parse_estimator(e.at("estimator").get<std::string>());
      s.successes = e.at("successes").get<int>();
      s.failures = e.at("failures").get<int>();
      s.abias2 = e.at("abias2").get<double>();
      s.avar = e.at("avar").get<double>();
      s.aimse = e.at("aimse").get<double>();
      s.mean_mspee = e.at("mean_mspee").get<double>();
      s.mspee_of_mean = e.at("mspee_of_mean").get<double>();
      s.mean_fit_seconds = e.at("mean_fit_seconds").get<double>();
      s.mean_curve = json_vec(e.at("mean_curve"));
      s.lower = json_vec(e.at("lower"));
      s.upper = json_vec(e.at("upper"));
      s.flagged = e.at("flagged").get<bool>();
      s.first_error = e.at("first_error").get<std::string>();
      r.estimators.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, std::string("malformed report JSON: ") + e.what());
  }
}

void write_report_csv(const std::vector<MonteCarloReport>& reports, const std::string& path, const json& echo) {
  auto out = open_out(path);
  write_echo(out, echo);
  out << "scenario,R";
  std::vector<Estimator> cols;
  if (!reports.empty())
    for (const auto& s : reports.front().estimators) cols.push_back(s.estimator);
  for (Estimator e : cols)
    for (const char* m : {"abias2", "avar", "aimse", "mspee"}) out << ',' << display_name(e) << '_' << m;
  out << '\n';
  for (const auto& r : reports) {
    out << r.label << ',' << r.R;
    for (Estimator e : cols) {
      const auto& s = r.summary(e);
      out << ',' << num(s.abias2) << ',' << num(s.avar) << ',' << num(s.aimse) << ',' << num(s.mean_mspee);
    }
    out << '\n';
  }
  finish(out, path);
}

void write_report_json(const std::vector<MonteCarloReport>& reports, const std::string& path, const json& echo) {
  json j;
  j["config"] = echo;
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(report_to_json(r));
  auto out = open_out(path);
  out << j.dump(1) << '\n';
  finish(out, path);
}

std::vector<MonteCarloReport> read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, "'" + path + "' is not valid JSON: " + e.what());
  }
  std::vector<MonteCarloReport> out;
  for (const auto& r : j.at("reports")) out.push_back(report_from_json(r));
  return out;
}

void write_curve_csv(const MonteCarloReport& r, const std::string& path, const json& echo) {
  auto out = open_out(path);
  write_echo(out, echo);
  out << "t,truth";
  for (const auto& s : r.estimators) {
    const auto k = key_name(s.estimator);
    out << ',' << k << "_mean," << k << "_lower," << k << "_upper";
  }
  out << '\n';
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const auto l = static_cast<Eigen::Index>(i);
    out << num(r.grid[i]) << ',' << num(r.truth_curve(l));
    for (const auto& s : r.estimators) {
      if (s.mean_curve.size() == 0) {
        out << ",,,";
        continue;
      }
      out << ',' << num(s.mean_curve(l)) << ',' << num(s.lower(l)) << ',' << num(s.upper(l));
    }
    out << '\n';
  }
  finish(out, path);
}

std::string curve_path(const std::string& path, std::size_t index) {
  std::filesystem::path p(path);
  p.replace_extension();
  char buf[32];
  std::snprintf(buf, sizeof buf, "_curves_%02zu.csv", index + 1);
  return p.string() + buf;
}

void emit_report(const std::vector<MonteCarloReport>& reports, ReportFormat format, const std::string& path,
                 const json& echo) {
  if (format == ReportFormat::Csv) write_report_csv(reports, path, echo);
  else write_report_json(reports, path, echo);
  for (std::size_t i = 0; i < reports.size(); ++i) write_curve_csv(reports[i], curve_path(path, i), echo);
}

std::string coef_path(const std::string& path) { return sibling(path, "_coef"); }

void write_fit(const std::vector<FitRecord>& fits, const std::vector<std::string>& z_names,
               const std::vector<double>& grid, ReportFormat format, const std::string& path, const json& echo) {
  if (format == ReportFormat::Json) {
    json j;
    j["config"] = echo;
    j["grid"] = grid;
    j["fits"] = json::array();
    for (const auto& rec : fits) {
      json f;
      f["estimator"] = std::string(key_name(rec.fit.estimator));
      f["K"] = rec.fit.K;
      f["beta0"] = rec.fit.beta0;
      json g = json::object();
      for (std::size_t i = 0; i < z_names.size(); ++i) g[z_names[i]] = rec.fit.gamma(static_cast<Eigen::Index>(i));
      f["gamma"] = g;
      f["beta1"] = vec_json(rec.fit.beta1_curve);
      if (rec.vs_naive) {
        f["percent_difference"] = rec.vs_naive->percent;
        f["percent_difference_excluded"] = rec.vs_naive->excluded;
      } else {
        f["percent_difference"] = nullptr;
      }
      j["fits"].push_back(std::move(f));
    }
    auto out = open_out(path);
    out << j.dump(1) << '\n';
    finish(out, path);
    return;
  }

  auto out = open_out(path);
  write_echo(out, echo);
  out << 't';
  for (const auto& rec : fits) out << ',' << key_name(rec.fit.estimator);
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << num(grid[i]);
    for (const auto& rec : fits) out << ',' << num(rec.fit.beta1_curve(static_cast<Eigen::Index>(i)));
    out << '\n';
  }
  finish(out, path);

  const std::string cpath = coef_path(path);
  auto coef = open_out(cpath);
  write_echo(coef, echo);
  coef << "estimator,K,beta0";
  for (const auto& name : z_names) coef << ",gamma_" << name;
  coef << ",percent_difference\n";
  for (const auto& rec : fits) {
    coef << key_name(rec.fit.estimator) << ',' << rec.fit.K << ',' << num(rec.fit.beta0);
    for (Eigen::Index i = 0; i < rec.fit.gamma.size(); ++i) coef << ',' << num(rec.fit.gamma(i));
    coef << ',' << (rec.vs_naive ? num(rec.vs_naive->percent) : std::string("NA")) << '\n';
  }
  finish(coef, cpath);
}

void write_band(const BootstrapBand& band, ReportFormat format, const std::string& path, const json& echo) {
  std::vector<CoefInterval> terms{band.beta0};
  terms.insert(terms.end(), band.gamma_intervals.begin(), band.gamma_intervals.end());
  if (format == ReportFormat::Json) {
    json j;
    j["config"] = echo;
    j["B"] = band.B;
    j["level"] = band.level;
    j["K"] = band.K;
    j["failed_resamples"] = band.failed_resamples;
    j["retries"] = band.retries;
    j["t"] = band.grid;
    j["estimate"] = vec_json(band.estimate);
    j["lower"] = vec_json(band.lower);
    j["upper"] = vec_json(band.upper);
    j["significant"] = band.significant;
    j["intervals"] = json::array();
    for (const auto& c : terms)
      j["intervals"].push_back({{"term", c.name}, {"estimate", c.estimate}, {"lower", c.lower}, {"upper", c.upper}});
    auto out = open_out(path);
    out << j.dump(1) << '\n';
    finish(out, path);
    return;
  }

  auto out = open_out(path);
  write_echo(out, echo);
  out << "t,estimate,lower,upper,significant\n";
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    const auto l = static_cast<Eigen::Index>(i);
    out << num(band.grid[i]) << ',' << num(band.estimate(l)) << ',' << num(band.lower(l)) << ','
        << num(band.upper(l)) << ',' << (band.significant[i] ? 1 : 0) << '\n';
  }
  finish(out, path);

  const std::string cpath = coef_path(path);
  auto coef = open_out(cpath);
  write_echo(coef, echo);
  coef << "term,estimate,lower,upper\n";
  for (const auto& c : terms)
    coef << c.name << ',' << num(c.estimate) << ',' << num(c.lower) << ',' << num(c.upper) << '\n';
  finish(coef, cpath);
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind('#', 0) == 0) {
      const std::string tag = "# config=";
      if (line.rfind(tag, 0) == 0) table.echo = json::parse(line.substr(tag.size()), nullptr, false);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace fliv
