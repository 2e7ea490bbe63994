#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace survcontour {

enum class ColumnKind { continuous, categorical };

// One covariate (or strata) column. Categorical columns hold integer codes into
// an explicit, closed level set ordered by first appearance.
class Column {
 public:
  static Column continuous(std::string name, std::vector<double> values);
  static Column categorical(std::string name, std::vector<std::string> levels, std::vector<int> codes);

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_categorical() const noexcept { return kind_ == ColumnKind::categorical; }
  std::size_t size() const noexcept;

  // Continuous columns only.
  const std::vector<double>& values() const;
  // Categorical columns only.
  const std::vector<int>& codes() const;
  const std::vector<std::string>& levels() const;
  const std::string& level_at(std::size_t row) const { return levels()[static_cast<std::size_t>(codes()[row])]; }
  std::optional<int> find_level(std::string_view level) const;

  Column subset(std::span<const std::size_t> rows) const;

  bool operator==(const Column&) const = default;

 private:
  std::string name_;
  ColumnKind kind_ = ColumnKind::continuous;
  std::vector<double> values_;
  std::vector<int> codes_;
  std::vector<std::string> levels_;
};

struct ColumnRoles {
  std::string time_column;
  std::string status_column;
  std::string predictor;
  std::vector<std::string> adjusters;
  std::optional<std::string> strata;
  int cause_of_interest = 1;

  // predictor followed by adjusters, in order.
  std::vector<std::string> covariates() const;
  bool operator==(const ColumnRoles&) const = default;
};

// Validated, immutable table of time / status / covariates / strata.
class SurvivalDataset {
 public:
  SurvivalDataset(ColumnRoles roles, std::vector<double> time, std::vector<int> status,
                  std::vector<Column> columns);

  std::size_t size() const noexcept { return time_.size(); }
  const ColumnRoles& roles() const noexcept { return roles_; }
  const std::vector<double>& time() const noexcept { return time_; }
  const std::vector<int>& status() const noexcept { return status_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  const std::vector<double>& predictor_values() const { return column(roles_.predictor).values(); }
  const Column* strata_column() const;
  // Largest status code present (K).
  int max_cause() const noexcept { return max_cause_; }
  std::vector<std::string> categorical_columns() const;

  // Indicator of the cause of interest (status == cause) as 0/1.
  std::vector<int> event_indicator(int cause) const;
  // Any event (status != 0) as 0/1.
  std::vector<int> any_event_indicator() const;

  SurvivalDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const SurvivalDataset&) const = default;

 private:
  ColumnRoles roles_;
  std::vector<double> time_;
  std::vector<int> status_;
  std::vector<Column> columns_;
  int max_cause_ = 0;
};

struct IngestOptions {
  // Non-numeric time, negative time and invalid status codes are errors instead of drops.
  bool strict = false;
  // Columns forced to categorical even when every cell is numeric.
  std::vector<std::string> categorical;
};

struct DropCount {
  std::string reason;
  std::size_t count = 0;
  bool operator==(const DropCount&) const = default;
};

struct IngestReport {
  std::size_t rows_in = 0;
  std::size_t rows_kept = 0;
  std::vector<DropCount> drops;
  bool operator==(const IngestReport&) const = default;
};

struct IngestResult {
  SurvivalDataset data;
  IngestReport report;
};

IngestResult ingest_csv(std::string_view document, const ColumnRoles& roles, const IngestOptions& options = {});
// Inverse of ingest_csv for ingested datasets: role columns only, shortest round-trip number formatting.
std::string serialize_csv(const SurvivalDataset& data);

using CovariateValue = std::variant<double, std::string>;
using CovariateValues = std::map<std::string, CovariateValue, std::less<>>;

struct AdjusterSetting {
  std::string name;
  CovariateValue value;
  bool user_specified = false;
  bool operator==(const AdjusterSetting&) const = default;
};

struct AdjusterProfile {
  std::vector<AdjusterSetting> entries;

  CovariateValues values() const;
  const AdjusterSetting* find(std::string_view name) const;
  bool operator==(const AdjusterProfile&) const = default;
};

// Median (lower-middle order statistic) for continuous adjusters, most frequent level for
// categorical ones; ties go to the level that appears first.
AdjusterProfile default_adjuster_profile(const SurvivalDataset& data);
AdjusterProfile default_adjuster_profile(const SurvivalDataset& data, const ColumnRoles& roles);

// Replaces entries by user overrides. Unknown adjusters, unknown levels and type mismatches throw.
AdjusterProfile apply_overrides(AdjusterProfile profile, const CovariateValues& overrides,
                                const SurvivalDataset& data);

struct ColumnSummary {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  std::vector<std::string> levels;
  std::vector<std::size_t> level_counts;
};

struct DatasetSummary {
  std::size_t n = 0;
  std::size_t censored = 0;
  std::map<int, std::size_t> events_by_cause;
  double min_time = 0.0;
  double max_time = 0.0;
  std::vector<ColumnSummary> columns;
  std::vector<std::string> strata_levels;
};

DatasetSummary summarize(const SurvivalDataset& data);

// Lower-middle order statistic.
double lower_median(std::span<const double> values);

// Parses a numeric cell; empty optional for non-numeric or non-finite text.
std::optional<double> parse_number(std::string_view text);

}  // namespace survcontour
