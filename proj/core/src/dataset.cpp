#include "survcontour/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include "survcontour/error.hpp"

namespace survcontour {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct Cell {
  std::string text;
  bool quoted = false;
};

using Row = std::vector<Cell>;

// Comma separated, optional double-quote quoting with "" escapes, LF or CRLF line ends.
std::vector<Row> parse_rows(std::string_view doc) {
  if (doc.size() >= 3 && static_cast<unsigned char>(doc[0]) == 0xEF &&
      static_cast<unsigned char>(doc[1]) == 0xBB && static_cast<unsigned char>(doc[2]) == 0xBF) {
    doc.remove_prefix(3);
  }
  std::vector<Row> rows;
  Row row;
  Cell cell;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t i = 0;
  auto end_cell = [&] {
    if (!cell.quoted) cell.text = std::string(trim(cell.text));
    row.push_back(std::move(cell));
    cell = Cell{};
  };
  auto end_row = [&] {
    end_cell();
    if (row_has_content) rows.push_back(std::move(row));
    row.clear();
    row_has_content = false;
  };
  while (i < doc.size()) {
    const char c = doc[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < doc.size() && doc[i + 1] == '"') {
          cell.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.text.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"') {
      if (!trim(cell.text).empty()) {
        throw ValidationError("malformed CSV: quote inside unquoted field at row " +
                              std::to_string(rows.size() + 1));
      }
      cell.text.clear();
      cell.quoted = true;
      in_quotes = true;
      row_has_content = true;
    } else if (c == ',') {
      row_has_content = true;
      end_cell();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // swallowed; the following '\n' ends the row
    } else {
      if (c != ' ' && c != '\t') row_has_content = true;
      if (cell.quoted) {
        throw ValidationError("malformed CSV: text after closing quote at row " +
                              std::to_string(rows.size() + 1));
      }
      cell.text.push_back(c);
    }
    ++i;
  }
  if (in_quotes) throw ValidationError("malformed CSV: unterminated quoted field");
  end_row();
  return rows;
}

bool is_missing(const Cell& c) { return !c.quoted && (c.text.empty() || c.text == "NA"); }

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string quote_if_needed(const std::string& s) {
  const bool needs = s.empty() || s == "NA" || s.find_first_of(",\"\r\n") != std::string::npos ||
                     trim(s).size() != s.size();
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

enum DropReason : std::size_t {
  kMissingTime,
  kNonNumericTime,
  kNegativeTime,
  kMissingStatus,
  kInvalidStatus,
  kMissingValue,
  kReasonCount
};

constexpr const char* kReasonNames[kReasonCount] = {
    "missing time", "non-numeric time", "negative time", "missing status", "invalid status", "missing value"};

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Column

Column Column::continuous(std::string name, std::vector<double> values) {
  Column c;
  c.name_ = std::move(name);
  c.kind_ = ColumnKind::continuous;
  c.values_ = std::move(values);
  return c;
}

Column Column::categorical(std::string name, std::vector<std::string> levels, std::vector<int> codes) {
  if (levels.empty()) throw ValidationError("categorical column '" + name + "' has no levels");
  for (int code : codes) {
    if (code < 0 || static_cast<std::size_t>(code) >= levels.size()) {
      throw ValidationError("categorical column '" + name + "' has an out-of-range level code");
    }
  }
  Column c;
  c.name_ = std::move(name);
  c.kind_ = ColumnKind::categorical;
  c.levels_ = std::move(levels);
  c.codes_ = std::move(codes);
  return c;
}

std::size_t Column::size() const noexcept { return is_categorical() ? codes_.size() : values_.size(); }

const std::vector<double>& Column::values() const {
  if (is_categorical()) throw ValidationError("column '" + name_ + "' is categorical, not continuous");
  return values_;
}

const std::vector<int>& Column::codes() const {
  if (!is_categorical()) throw ValidationError("column '" + name_ + "' is continuous, not categorical");
  return codes_;
}

const std::vector<std::string>& Column::levels() const {
  if (!is_categorical()) throw ValidationError("column '" + name_ + "' is continuous, not categorical");
  return levels_;
}

std::optional<int> Column::find_level(std::string_view level) const {
  const auto& lv = levels();
  for (std::size_t k = 0; k < lv.size(); ++k) {
    if (lv[k] == level) return static_cast<int>(k);
  }
  return std::nullopt;
}

Column Column::subset(std::span<const std::size_t> rows) const {
  Column out = *this;
  if (is_categorical()) {
    out.codes_.clear();
    out.codes_.reserve(rows.size());
    for (auto r : rows) out.codes_.push_back(codes_.at(r));
  } else {
    out.values_.clear();
    out.values_.reserve(rows.size());
    for (auto r : rows) out.values_.push_back(values_.at(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ColumnRoles / SurvivalDataset

std::vector<std::string> ColumnRoles::covariates() const {
  std::vector<std::string> out;
  out.reserve(adjusters.size() + 1);
  out.push_back(predictor);
  out.insert(out.end(), adjusters.begin(), adjusters.end());
  return out;
}

SurvivalDataset::SurvivalDataset(ColumnRoles roles, std::vector<double> time, std::vector<int> status,
                                 std::vector<Column> columns)
    : roles_(std::move(roles)), time_(std::move(time)), status_(std::move(status)), columns_(std::move(columns)) {
  if (time_.empty()) throw ValidationError("dataset has no rows");
  if (time_.size() != status_.size()) throw ValidationError("time and status differ in length");
  if (roles_.time_column == roles_.status_column) {
    throw ValidationError("time and status columns must differ");
  }
  if (roles_.cause_of_interest < 1) throw ValidationError("cause of interest must be a positive event code");
  for (double t : time_) {
    if (!std::isfinite(t) || t < 0.0) throw ValidationError("times must be finite and non-negative");
  }
  bool any_event = false;
  for (int s : status_) {
    if (s < 0) throw ValidationError("status codes must be non-negative");
    max_cause_ = std::max(max_cause_, s);
    any_event = any_event || s != 0;
  }
  if (!any_event) throw ValidationError("dataset has no events");
  std::set<std::string, std::less<>> names;
  for (const auto& c : columns_) {
    if (c.size() != time_.size()) throw ValidationError("column '" + c.name() + "' has the wrong length");
    if (!names.insert(c.name()).second) throw ValidationError("duplicate column '" + c.name() + "'");
  }
  if (!has_column(roles_.predictor)) throw ValidationError("missing predictor column '" + roles_.predictor + "'");
  if (column(roles_.predictor).is_categorical()) {
    throw ValidationError("predictor '" + roles_.predictor + "' must be continuous");
  }
  for (const auto& a : roles_.adjusters) {
    if (a == roles_.predictor) throw ValidationError("predictor '" + a + "' cannot also be an adjuster");
    if (!has_column(a)) throw ValidationError("missing adjuster column '" + a + "'");
  }
  if (roles_.strata) {
    if (!has_column(*roles_.strata)) throw ValidationError("missing strata column '" + *roles_.strata + "'");
    if (!column(*roles_.strata).is_categorical()) {
      throw ValidationError("strata column '" + *roles_.strata + "' must be categorical");
    }
    if (*roles_.strata == roles_.predictor ||
        std::find(roles_.adjusters.begin(), roles_.adjusters.end(), *roles_.strata) != roles_.adjusters.end()) {
      throw ValidationError("strata column '" + *roles_.strata + "' cannot also be a covariate");
    }
  }
}

const Column& SurvivalDataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name() == name) return c;
  }
  throw ValidationError("unknown column '" + std::string(name) + "'");
}

bool SurvivalDataset::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name() == name; });
}

const Column* SurvivalDataset::strata_column() const {
  return roles_.strata ? &column(*roles_.strata) : nullptr;
}

std::vector<std::string> SurvivalDataset::categorical_columns() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (c.is_categorical()) out.push_back(c.name());
  }
  return out;
}

std::vector<int> SurvivalDataset::event_indicator(int cause) const {
  std::vector<int> out(status_.size());
  for (std::size_t i = 0; i < status_.size(); ++i) out[i] = status_[i] == cause ? 1 : 0;
  return out;
}

std::vector<int> SurvivalDataset::any_event_indicator() const {
  std::vector<int> out(status_.size());
  for (std::size_t i = 0; i < status_.size(); ++i) out[i] = status_[i] != 0 ? 1 : 0;
  return out;
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> t;
  std::vector<int> s;
  t.reserve(rows.size());
  s.reserve(rows.size());
  for (auto r : rows) {
    t.push_back(time_.at(r));
    s.push_back(status_.at(r));
  }
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.subset(rows));
  return SurvivalDataset(roles_, std::move(t), std::move(s), std::move(cols));
}

// ---------------------------------------------------------------------------
// Ingestion

IngestResult ingest_csv(std::string_view document, const ColumnRoles& roles, const IngestOptions& options) {
  const auto rows = parse_rows(document);
  if (rows.empty()) throw ValidationError("empty CSV document: no header row");
  const Row& header = rows.front();

  auto find_col = [&](const std::string& name, const char* role) -> std::size_t {
    if (name.empty()) throw ValidationError(std::string(role) + " column not specified");
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k].text == name) return k;
    }
    throw ValidationError("missing column '" + name + "' (" + role + ")");
  };

  const std::size_t time_idx = find_col(roles.time_column, "time");
  const std::size_t status_idx = find_col(roles.status_column, "status");
  struct CovSpec {
    std::string name;
    std::size_t idx;
    bool categorical;
  };
  std::vector<CovSpec> covs;
  for (const auto& name : roles.covariates()) covs.push_back({name, find_col(name, "covariate"), false});
  if (roles.strata) covs.push_back({*roles.strata, find_col(*roles.strata, "strata"), true});

  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw ValidationError("malformed CSV: row " + std::to_string(r + 1) + " has " +
                            std::to_string(rows[r].size()) + " fields, header has " +
                            std::to_string(header.size()));
    }
  }

  // Categorical iff declared or any non-missing cell is non-numeric.
  for (auto& cov : covs) {
    if (std::find(options.categorical.begin(), options.categorical.end(), cov.name) != options.categorical.end()) {
      cov.categorical = true;
    }
    if (cov.categorical) continue;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const Cell& cell = rows[r][cov.idx];
      if (!is_missing(cell) && !parse_number(cell.text)) {
        cov.categorical = true;
        break;
      }
    }
  }
  if (covs.front().categorical) {
    throw ValidationError("predictor '" + roles.predictor + "' must be continuous (numeric)");
  }

  std::array<std::size_t, kReasonCount> drops{};
  std::vector<double> times;
  std::vector<int> status;
  std::vector<std::size_t> kept_rows;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    const std::string line = std::to_string(r + 1);
    const Cell& tc = row[time_idx];
    if (is_missing(tc)) {
      ++drops[kMissingTime];
      continue;
    }
    auto t = parse_number(tc.text);
    if (!t) {
      if (options.strict) throw ValidationError("non-numeric time '" + tc.text + "' at row " + line);
      ++drops[kNonNumericTime];
      continue;
    }
    if (*t < 0.0) {
      if (options.strict) throw ValidationError("negative time at row " + line);
      ++drops[kNegativeTime];
      continue;
    }
    const Cell& sc = row[status_idx];
    if (is_missing(sc)) {
      ++drops[kMissingStatus];
      continue;
    }
    auto s = parse_number(sc.text);
    if (!s || *s < 0.0 || std::floor(*s) != *s || *s > 1e6) {
      if (options.strict) throw ValidationError("unknown status code '" + sc.text + "' at row " + line);
      ++drops[kInvalidStatus];
      continue;
    }
    bool missing = false;
    for (const auto& cov : covs) {
      if (is_missing(row[cov.idx])) {
        missing = true;
        break;
      }
    }
    if (missing) {
      ++drops[kMissingValue];
      continue;
    }
    times.push_back(*t);
    status.push_back(static_cast<int>(*s));
    kept_rows.push_back(r);
  }

  if (kept_rows.empty()) throw ValidationError("no usable rows after ingestion");

  std::vector<Column> columns;
  for (const auto& cov : covs) {
    if (cov.categorical) {
      std::vector<std::string> levels;
      std::vector<int> codes;
      codes.reserve(kept_rows.size());
      for (auto r : kept_rows) {
        const std::string& text = rows[r][cov.idx].text;
        auto it = std::find(levels.begin(), levels.end(), text);
        if (it == levels.end()) {
          levels.push_back(text);
          codes.push_back(static_cast<int>(levels.size() - 1));
        } else {
          codes.push_back(static_cast<int>(it - levels.begin()));
        }
      }
      columns.push_back(Column::categorical(cov.name, std::move(levels), std::move(codes)));
    } else {
      std::vector<double> values;
      values.reserve(kept_rows.size());
      for (auto r : kept_rows) values.push_back(*parse_number(rows[r][cov.idx].text));
      columns.push_back(Column::continuous(cov.name, std::move(values)));
    }
  }

  IngestReport report;
  report.rows_in = rows.size() - 1;
  report.rows_kept = kept_rows.size();
  for (std::size_t k = 0; k < kReasonCount; ++k) {
    if (drops[k] > 0) report.drops.push_back({kReasonNames[k], drops[k]});
  }
  return {SurvivalDataset(roles, std::move(times), std::move(status), std::move(columns)), std::move(report)};
}

std::string serialize_csv(const SurvivalDataset& data) {
  const auto& roles = data.roles();
  std::vector<const Column*> cols;
  for (const auto& name : roles.covariates()) cols.push_back(&data.column(name));
  if (roles.strata) cols.push_back(&data.column(*roles.strata));

  std::string out = quote_if_needed(roles.time_column) + "," + quote_if_needed(roles.status_column);
  for (const auto* c : cols) out += "," + quote_if_needed(c->name());
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += format_number(data.time()[i]);
    out += ",";
    out += std::to_string(data.status()[i]);
    for (const auto* c : cols) {
      out += ",";
      out += c->is_categorical() ? quote_if_needed(c->level_at(i)) : format_number(c->values()[i]);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adjuster profiles

double lower_median(std::span<const double> values) {
  if (values.empty()) throw ValidationError("median of an empty column");
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

namespace {

std::string most_frequent_level(const Column& c) {
  std::vector<std::size_t> counts(c.levels().size(), 0);
  for (int code : c.codes()) ++counts[static_cast<std::size_t>(code)];
  // Levels are stored in first-appearance order, so the first maximum wins ties.
  const auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
  return c.levels()[static_cast<std::size_t>(best)];
}

}  // namespace

CovariateValues AdjusterProfile::values() const {
  CovariateValues out;
  for (const auto& e : entries) out[e.name] = e.value;
  return out;
}

const AdjusterSetting* AdjusterProfile::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

AdjusterProfile default_adjuster_profile(const SurvivalDataset& data) {
  return default_adjuster_profile(data, data.roles());
}

AdjusterProfile default_adjuster_profile(const SurvivalDataset& data, const ColumnRoles& roles) {
  AdjusterProfile profile;
  for (const auto& name : roles.adjusters) {
    const Column& c = data.column(name);
    if (c.is_categorical()) {
      profile.entries.push_back({name, most_frequent_level(c), false});
    } else {
      profile.entries.push_back({name, lower_median(c.values()), false});
    }
  }
  return profile;
}

AdjusterProfile apply_overrides(AdjusterProfile profile, const CovariateValues& overrides,
                                const SurvivalDataset& data) {
  for (const auto& [name, value] : overrides) {
    auto it = std::find_if(profile.entries.begin(), profile.entries.end(),
                           [&](const AdjusterSetting& e) { return e.name == name; });
    if (it == profile.entries.end()) throw ValidationError("unknown adjuster '" + name + "'");
    const Column& c = data.column(name);
    if (c.is_categorical()) {
      const auto* level = std::get_if<std::string>(&value);
      if (!level) throw ValidationError("adjuster '" + name + "' is categorical; expected a level");
      if (!c.find_level(*level)) throw ValidationError("unknown level '" + *level + "' for adjuster '" + name + "'");
    } else if (!std::holds_alternative<double>(value)) {
      throw ValidationError("adjuster '" + name + "' is continuous; expected a number");
    } else if (!std::isfinite(std::get<double>(value))) {
      throw ValidationError("adjuster '" + name + "' must be finite");
    }
    it->value = value;
    it->user_specified = true;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Summary

DatasetSummary summarize(const SurvivalDataset& data) {
  DatasetSummary s;
  s.n = data.size();
  for (int st : data.status()) {
    if (st == 0) ++s.censored;
    else ++s.events_by_cause[st];
  }
  const auto [lo, hi] = std::minmax_element(data.time().begin(), data.time().end());
  s.min_time = *lo;
  s.max_time = *hi;
  for (const auto& c : data.columns()) {
    ColumnSummary cs;
    cs.name = c.name();
    cs.kind = c.kind();
    if (c.is_categorical()) {
      cs.levels = c.levels();
      cs.level_counts.assign(cs.levels.size(), 0);
      for (int code : c.codes()) ++cs.level_counts[static_cast<std::size_t>(code)];
    } else {
      const auto& v = c.values();
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      cs.min = *mn;
      cs.max = *mx;
      cs.median = lower_median(v);
    }
    s.columns.push_back(std::move(cs));
  }
  if (const Column* strata = data.strata_column()) s.strata_levels = strata->levels();
  return s;
}

}  // namespace survcontour
