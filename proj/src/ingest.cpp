#include "fliv/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "fliv/errors.hpp"
#include "fliv/metrics.hpp"

namespace fliv {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(std::move(f));
    if (!have_header) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      table.header = std::move(fields);
      have_header = true;
    } else {
      table.rows.push_back(std::move(fields));
      table.lines.push_back(line_no);
    }
  }
  if (!have_header) fail(ErrorKind::Schema, "'" + path + "' has no header row");
  return table;
}

std::size_t column_index(const CsvTable& t, const std::string& name, const std::string& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) fail(ErrorKind::Schema, "column '" + name + "' missing from '" + path + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

bool parse_int(const std::string& s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

LongRecords load_long_csv(const std::string& path, const LongSchema& schema, double max_bad_fraction) {
  const CsvTable table = read_csv(path);
  const std::size_t c_subject = column_index(table, schema.subject, path);
  const std::size_t c_role = column_index(table, schema.role, path);
  const std::size_t c_day = column_index(table, schema.day, path);
  const std::size_t c_time = column_index(table, schema.time, path);
  const std::size_t c_value = column_index(table, schema.value, path);
  const std::size_t needed = std::max({c_subject, c_role, c_day, c_time, c_value}) + 1;

  LongRecords out;
  std::set<std::tuple<std::string, int, int, int>> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.lines[r];
    auto issue = [&](std::string msg) { out.issues.push_back({line, std::move(msg)}); };
    if (f.size() < needed) {
      issue("expected at least " + std::to_string(needed) + " fields, found " + std::to_string(f.size()));
      continue;
    }
    LongRecord rec;
    rec.subject = f[c_subject];
    if (rec.subject.empty()) {
      issue("empty subject id");
      continue;
    }
    if (f[c_role] == schema.w_label) {
      rec.role = CurveRole::W;
    } else if (f[c_role] == schema.m_label) {
      rec.role = CurveRole::M;
    } else {
      issue("unknown role '" + f[c_role] + "'");
      continue;
    }
    if (!parse_int(f[c_day], rec.day)) {
      issue("bad day index '" + f[c_day] + "'");
      continue;
    }
    if (!parse_int(f[c_time], rec.time)) {
      issue("bad time index '" + f[c_time] + "'");
      continue;
    }
    if (!parse_double(f[c_value], rec.value)) {
      issue("bad value '" + f[c_value] + "'");
      continue;
    }
    if (!seen.emplace(rec.subject, static_cast<int>(rec.role), rec.day, rec.time).second) {
      issue("duplicate record for subject " + rec.subject + " day " + f[c_day] + " time " + f[c_time]);
      continue;
    }
    out.rows.push_back(std::move(rec));
  }

  const std::size_t total = table.rows.size();
  if (!out.issues.empty() &&
      static_cast<double>(out.issues.size()) > max_bad_fraction * static_cast<double>(total)) {
    std::ostringstream msg;
    msg << out.issues.size() << " of " << total << " rows in '" << path << "' are malformed; first at line "
        << out.issues.front().line << ": " << out.issues.front().message;
    fail(ErrorKind::RowError, msg.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

double iqr_upper_fence(const std::vector<double>& pool, double multiplier) {
  const double q1 = quantile_linear(pool, 0.25);
  const double q3 = quantile_linear(pool, 0.75);
  return q3 + multiplier * (q3 - q1);
}

CurveTable preprocess(const LongRecords& records, const PreprocessRules& rules) {
  if (rules.min_days < 1) fail(ErrorKind::InvalidConfig, "min_days must be at least 1");
  if (records.rows.empty()) fail(ErrorKind::EmptyCohort, "no curve records to preprocess");

  // Raw values keyed by subject -> role -> day -> time. Ordered maps make the
  // result independent of input row order.
  using DayMap = std::map<int, std::map<int, double>>;
  std::map<std::string, std::array<DayMap, 2>> by_subject;
  std::array<std::vector<double>, 2> pools;
  std::array<std::set<int>, 2> times_seen;
  for (const auto& rec : records.rows) {
    const auto role = static_cast<std::size_t>(rec.role);
    by_subject[rec.subject][role][rec.day][rec.time] = rec.value;
    pools[role].push_back(rec.value);
    times_seen[role].insert(rec.time);
  }

  std::array<double, 2> fence{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (rules.outlier_iqr_multiplier) {
    for (std::size_t role = 0; role < 2; ++role)
      if (!pools[role].empty()) fence[role] = iqr_upper_fence(pools[role], *rules.outlier_iqr_multiplier);
  }

  std::vector<int> retained = rules.retained_times;
  if (retained.empty()) {
    std::set<int> all(times_seen[0].begin(), times_seen[0].end());
    all.insert(times_seen[1].begin(), times_seen[1].end());
    retained.assign(all.begin(), all.end());
  }
  std::sort(retained.begin(), retained.end());
  retained.erase(std::unique(retained.begin(), retained.end()), retained.end());
  if (retained.size() < 2) fail(ErrorKind::InvalidConfig, "need at least two retained time indices");

  std::array<std::vector<int>, 2> required;
  for (std::size_t role = 0; role < 2; ++role)
    required[role] = rules.required_times.empty()
                         ? std::vector<int>(times_seen[role].begin(), times_seen[role].end())
                         : rules.required_times;

  const auto G = static_cast<Eigen::Index>(retained.size());
  std::vector<std::string> subjects;
  std::vector<Vector> w_rows, m_rows;
  int dropped = 0;
  std::size_t excluded = 0;

  for (const auto& [subject, roles] : by_subject) {
    std::array<Vector, 2> curve;
    bool keep = true;
    std::size_t subject_excluded = 0;
    for (std::size_t role = 0; role < 2 && keep; ++role) {
      Vector sum = Vector::Zero(G);
      Eigen::VectorXi count = Eigen::VectorXi::Zero(G);
      int qualifying = 0;
      for (const auto& [day, values] : roles[role]) {
        const bool complete = std::all_of(required[role].begin(), required[role].end(),
                                          [&](int t) { return values.count(t) > 0; });
        if (!complete) continue;
        ++qualifying;
        for (Eigen::Index l = 0; l < G; ++l) {
          const auto it = values.find(retained[static_cast<std::size_t>(l)]);
          if (it == values.end()) continue;
          if (it->second > fence[role]) {
            ++subject_excluded;
            continue;
          }
          sum[l] += it->second;
          ++count[l];
        }
      }
      if (qualifying < rules.min_days || (count.array() == 0).any()) {
        keep = false;
        break;
      }
      curve[role] = sum.cwiseQuotient(count.cast<double>());
    }
    if (!keep) {
      ++dropped;
      continue;
    }
    excluded += subject_excluded;
    subjects.push_back(subject);
    w_rows.push_back(std::move(curve[0]));
    m_rows.push_back(std::move(curve[1]));
  }
  if (subjects.empty()) fail(ErrorKind::EmptyCohort, "no subject has qualifying W and M curves after filtering");

  std::vector<double> t(retained.size());
  const double span = static_cast<double>(retained.back() - retained.front());
  for (std::size_t l = 0; l < retained.size(); ++l) t[l] = static_cast<double>(retained[l] - retained.front()) / span;

  const auto n = static_cast<Eigen::Index>(subjects.size());
  Matrix w(n, G), m(n, G);
  for (Eigen::Index i = 0; i < n; ++i) {
    w.row(i) = w_rows[static_cast<std::size_t>(i)].transpose();
    m.row(i) = m_rows[static_cast<std::size_t>(i)].transpose();
  }
  return CurveTable{std::move(subjects), std::move(retained), TimeGrid(std::move(t)), std::move(w), std::move(m),
                    dropped, excluded, fence[0], fence[1]};
}

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

AssembledData assemble_dataset(const CurveTable& curves, const std::string& outcomes_csv,
                               const OutcomeSchema& schema) {
  const CsvTable table = read_csv(outcomes_csv);
  const std::size_t c_id = column_index(table, schema.id, outcomes_csv);
  const std::size_t c_y = column_index(table, schema.outcome, outcomes_csv);
  std::vector<std::size_t> c_z;
  for (const auto& name : schema.covariates) c_z.push_back(column_index(table, name, outcomes_csv));
  std::optional<std::size_t> c_w;
  if (schema.weight) c_w = column_index(table, *schema.weight, outcomes_csv);

  struct OutcomeRow {
    double y = 0.0;
    std::vector<double> z;
    double weight = 1.0;
  };
  std::unordered_map<std::string, OutcomeRow> outcomes;
  std::vector<std::string> outcome_order;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where = "'" + outcomes_csv + "' line " + std::to_string(table.lines[r]);
    auto field = [&](std::size_t c) -> double {
      double v = 0.0;
      if (c >= f.size() || !parse_double(f[c], v))
        fail(ErrorKind::RowError, "bad numeric field '" + (c < f.size() ? f[c] : std::string()) + "' at " + where);
      return v;
    };
    if (c_id >= f.size()) fail(ErrorKind::RowError, "missing subject id at " + where);
    OutcomeRow row;
    row.y = field(c_y);
    for (auto c : c_z) row.z.push_back(field(c));
    if (c_w) {
      row.weight = field(*c_w);
      if (!(row.weight > 0.0)) fail(ErrorKind::RowError, "non-positive weight at " + where);
    }
    if (!outcomes.emplace(f[c_id], std::move(row)).second)
      fail(ErrorKind::RowError, "duplicate subject id '" + f[c_id] + "' at " + where);
    outcome_order.push_back(f[c_id]);
  }

  AssembledData out{Dataset{Vector(), FunctionalSample(Matrix(0, curves.w.cols()), curves.grid),
                            FunctionalSample(Matrix(0, curves.m.cols()), curves.grid), std::nullopt, Matrix(),
                            schema.covariates, std::nullopt, {}},
                    {}, {}};
  std::vector<Eigen::Index> rows;
  std::set<std::string> matched;
  for (std::size_t i = 0; i < curves.subjects.size(); ++i) {
    if (outcomes.count(curves.subjects[i])) {
      rows.push_back(static_cast<Eigen::Index>(i));
      matched.insert(curves.subjects[i]);
    } else {
      out.unmatched_curves.push_back(curves.subjects[i]);
    }
  }
  for (const auto& id : outcome_order)
    if (!matched.count(id)) out.unmatched_outcomes.push_back(id);
  if (rows.empty()) fail(ErrorKind::EmptyCohort, "no subject appears in both the curves and the outcome file");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(c_z.size());
  Dataset& d = out.data;
  d.y.resize(n);
  d.z.resize(n, p);
  Matrix w(n, curves.w.cols()), m(n, curves.m.cols());
  Vector weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& id = curves.subjects[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    const OutcomeRow& row = outcomes.at(id);
    d.y[i] = row.y;
    for (Eigen::Index j = 0; j < p; ++j) d.z(i, j) = row.z[static_cast<std::size_t>(j)];
    weights[i] = row.weight;
    w.row(i) = curves.w.row(rows[static_cast<std::size_t>(i)]);
    m.row(i) = curves.m.row(rows[static_cast<std::size_t>(i)]);
    d.subject_ids.push_back(id);
  }
  d.w = FunctionalSample(std::move(w), curves.grid);
  d.m = FunctionalSample(std::move(m), curves.grid);
  if (c_w) d.weights = std::move(weights);
  d.validate();
  return out;
}

void export_dataset_csv(const Dataset& data, const std::string& long_path, const std::string& outcomes_path) {
  data.validate();
  const std::size_t n = data.n();
  const int width = std::max<int>(6, static_cast<int>(std::to_string(n).size()));
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!data.subject_ids.empty()) {
      ids[i] = data.subject_ids[i];
    } else {
      std::string num = std::to_string(i + 1);
      ids[i] = "s" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    }
  }

  std::ofstream lf(long_path);
  if (!lf) fail(ErrorKind::Io, "cannot write '" + long_path + "'");
  lf << "subject,role,day,time,value\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto* sample : {&data.w, &data.m}) {
      const char* role = sample == &data.w ? "W" : "M";
      for (Eigen::Index l = 0; l < sample->values.cols(); ++l)
        lf << ids[i] << ',' << role << ",0," << l << ',' << format_double(sample->values(static_cast<Eigen::Index>(i), l))
           << '\n';
    }
  }

  std::ofstream of(outcomes_path);
  if (!of) fail(ErrorKind::Io, "cannot write '" + outcomes_path + "'");
  of << "subject,y";
  for (Eigen::Index j = 0; j < data.z.cols(); ++j)
    of << ',' << (j < static_cast<Eigen::Index>(data.z_names.size()) ? data.z_names[static_cast<std::size_t>(j)]
                                                                     : "z" + std::to_string(j + 1));
  if (data.weights) of << ",weight";
  of << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    of << ids[i] << ',' << format_double(data.y[r]);
    for (Eigen::Index j = 0; j < data.z.cols(); ++j) of << ',' << format_double(data.z(r, j));
    if (data.weights) of << ',' << format_double((*data.weights)[r]);
    of << '\n';
  }
}

}  // namespace fliv
