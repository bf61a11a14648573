#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fliv/dataset.hpp"

namespace fliv {

// ---------------------------------------------------------------------------
// Long-format records
// ---------------------------------------------------------------------------

enum class CurveRole { W, M };

/// Column names of a long CSV plus the labels that mark each curve role.
struct LongSchema {
  std::string subject = "subject";
  std::string role = "role";
  std::string day = "day";
  std::string time = "time";
  std::string value = "value";
  std::string w_label = "W";
  std::string m_label = "M";
};

struct LongRecord {
  std::string subject;
  CurveRole role = CurveRole::W;
  int day = 0;
  int time = 0;
  double value = 0.0;
};

struct RowIssue {
  std::size_t line = 0;  ///< 1-based line number in the file (header is line 1)
  std::string message;
};

struct LongRecords {
  std::vector<LongRecord> rows;
  std::vector<RowIssue> issues;  ///< rows skipped as malformed or duplicated
};

/// Parses a headered CSV. Fails with Schema if a mapped column is missing, and
/// with RowError if the share of bad rows exceeds max_bad_fraction.
LongRecords load_long_csv(const std::string& path, const LongSchema& schema = {}, double max_bad_fraction = 0.0);

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

struct PreprocessRules {
  /// Values above Q3 + multiplier * IQR of their role's pool are excluded.
  std::optional<double> outlier_iqr_multiplier = 3.0;
  /// A day counts only if it has a record at every one of these time indices
  /// (empty: every time index seen for that role).
  std::vector<int> required_times;
  /// Time indices kept in the output curves (empty: every index seen).
  std::vector<int> retained_times;
  /// Minimum number of qualifying days per role.
  int min_days = 1;
};

struct CurveTable {
  std::vector<std::string> subjects;
  std::vector<int> time_indices;
  TimeGrid grid;  ///< retained indices mapped linearly onto [0, 1]
  Matrix w;
  Matrix m;
  int dropped_subjects = 0;
  std::size_t excluded_values = 0;
  double w_threshold = 0.0;
  double m_threshold = 0.0;
};

/// Upper outlier fence Q3 + multiplier * (Q3 - Q1) with linear-interpolation quartiles.
double iqr_upper_fence(const std::vector<double>& pool, double multiplier);

/// Day-averaged W and M curves per subject after outlier and completeness rules.
CurveTable preprocess(const LongRecords& records, const PreprocessRules& rules = {});

// ---------------------------------------------------------------------------
// Joining outcomes
// ---------------------------------------------------------------------------

struct OutcomeSchema {
  std::string id = "subject";
  std::string outcome = "y";
  std::vector<std::string> covariates;
  std::optional<std::string> weight;
};

struct AssembledData {
  Dataset data;
  std::vector<std::string> unmatched_curves;    ///< subjects with curves but no outcome row
  std::vector<std::string> unmatched_outcomes;  ///< outcome rows with no curves
};

AssembledData assemble_dataset(const CurveTable& curves, const std::string& outcomes_csv,
                               const OutcomeSchema& schema);

/// Writes a dataset as a long CSV (day 0, time index l) plus an outcome CSV
/// with columns subject, y, covariates and optional weight.
void export_dataset_csv(const Dataset& data, const std::string& long_path, const std::string& outcomes_path);

}  // namespace fliv
