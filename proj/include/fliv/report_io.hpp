#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fliv/config.hpp"
#include "fliv/harness.hpp"
#include "fliv/metrics.hpp"

namespace fliv {

nlohmann::json report_to_json(const MonteCarloReport& r);
MonteCarloReport report_from_json(const nlohmann::json& j);

/// One row per scenario: scenario, R, then <Estimator>_{abias2,avar,aimse,mspee}.
/// The first line is a "# config=<json>" comment.
void write_report_csv(const std::vector<MonteCarloReport>& reports, const std::string& path,
                      const nlohmann::json& echo);
void write_report_json(const std::vector<MonteCarloReport>& reports, const std::string& path,
                       const nlohmann::json& echo);
std::vector<MonteCarloReport> read_report_json(const std::string& path);

/// t, truth, then <key>_mean, <key>_lower, <key>_upper per estimator.
void write_curve_csv(const MonteCarloReport& r, const std::string& path, const nlohmann::json& echo);

/// Path of the i-th curve file that emit_report writes next to path.
std::string curve_path(const std::string& path, std::size_t index);

/// Report file in the requested format plus one curve file per scenario.
void emit_report(const std::vector<MonteCarloReport>& reports, ReportFormat format, const std::string& path,
                 const nlohmann::json& echo);

// ---------------------------------------------------------------------------
// fit and bootstrap outputs
// ---------------------------------------------------------------------------

struct FitRecord {
  FitResult fit;
  std::optional<PercentDifference> vs_naive;  ///< absent for the naive fit itself
};

/// JSON: one object per estimator. CSV: path holds the curves (t, <key>...)
/// and coef_path(path) holds K, beta0, gamma and percent difference.
void write_fit(const std::vector<FitRecord>& fits, const std::vector<std::string>& z_names,
               const std::vector<double>& grid, ReportFormat format, const std::string& path,
               const nlohmann::json& echo);
std::string coef_path(const std::string& path);

/// Band file: t, estimate, lower, upper, significant. The interval table
/// (term, estimate, lower, upper) goes to coef_path(path). JSON holds both.
void write_band(const BootstrapBand& band, ReportFormat format, const std::string& path,
                const nlohmann::json& echo);

/// Reads a headered CSV written by this module, skipping "#" lines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::optional<nlohmann::json> echo;
};
CsvTable read_csv_table(const std::string& path);

}  // namespace fliv
