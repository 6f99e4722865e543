#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "realeig/exactdensity.hpp"
#include "realeig/montecarlo/simulation.hpp"

namespace realeig {

/// How a reported value was obtained. ClosedForm is for quantities with an
/// explicit finite expression (A_{L,m}).
enum class Method { Quadrature, Sum, MonteCarlo, Asymptotic, ClosedForm };

std::string to_string(Method m);
/// Inverse of to_string. Throws DomainError on unknown names.
Method parse_method(const std::string& s);

enum class Format { Csv, Json };
std::string to_string(Format f);
Format parse_format(const std::string& s);

/// Ordered key=value provenance. Keys are unique, contain no '=' and no
/// line breaks; values contain no line breaks.
using Metadata = std::vector<std::pair<std::string, std::string>>;

struct ReportRow {
  std::string quantity;
  Method method = Method::Quadrature;
  double value = 0.0;
  double err_est = 0.0;
};

struct ComparisonReport {
  Metadata metadata;
  std::vector<ReportRow> rows;

  /// Throws DomainError on a negative or NaN err_est, a quantity that
  /// cannot be written as a bare CSV field, or malformed metadata.
  void validate() const;
};

/// A numeric table with named columns. Cells may be NaN (not computed).
struct TableReport {
  Metadata metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void validate() const;
};

/// Equality that treats two NaNs as equal and separates 0.0 from -0.0,
/// so a parsed report compares equal to its source exactly when every
/// value survived the round trip.
bool operator==(const ReportRow& a, const ReportRow& b);
bool operator==(const ComparisonReport& a, const ComparisonReport& b);
bool operator==(const TableReport& a, const TableReport& b);

/// Shortest decimal form that parses back to the same double ("nan",
/// "inf", "-inf" for non-finite values).
std::string format_double(double v);
/// Strict inverse of format_double. Throws DomainError on trailing text.
double parse_double(std::string_view s);

/// CSV: "# key=value" lines, a header row, then one line per row; '.'
/// decimal point and LF line endings regardless of locale.
std::string write_csv(const ComparisonReport& r);
std::string write_csv(const TableReport& r);
ComparisonReport read_comparison_csv(std::string_view text);
TableReport read_table_csv(std::string_view text);

/// JSON objects {"metadata": {...}, "rows": [...]} (plus "columns" for
/// tables). Non-finite numbers are written as the strings used by
/// format_double.
std::string write_json(const ComparisonReport& r);
std::string write_json(const TableReport& r);
ComparisonReport read_comparison_json(std::string_view text);
TableReport read_table_json(std::string_view text);

std::string write_report(const ComparisonReport& r, Format f);
std::string write_report(const TableReport& r, Format f);

/// Columns (x, value).
TableReport density_curve_table(const DensityCurve& c);
/// Columns (bin_left, bin_right, count, normalized_value).
TableReport histogram_table(const Histogram& h);

std::string write_json(const SimulationEstimate& e);
SimulationEstimate read_simulation_json(std::string_view text);

/// Writes through a temporary file in the same directory and renames it
/// into place, so a failed run never leaves a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace realeig
