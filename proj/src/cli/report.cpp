#include "realeig/cli/report.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "realeig/errors.hpp"

namespace realeig {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kComparisonHeader = "quantity,method,value,err_est";

bool same_double(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool bare_field(const std::string& s) {
  return !s.empty() && s.find_first_of(",\"\n\r") == std::string::npos && s.front() != '#';
}

void validate_metadata(const Metadata& md) {
  std::set<std::string> seen;
  for (const auto& [k, v] : md) {
    if (k.empty() || k.find_first_of("=\n\r") != std::string::npos) {
      throw DomainError("report metadata: invalid key '" + k + "'");
    }
    if (v.find_first_of("\n\r") != std::string::npos) throw DomainError("report metadata: line break in '" + k + "'");
    if (!seen.insert(k).second) throw DomainError("report metadata: duplicate key '" + k + "'");
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

void write_metadata(std::string& out, const Metadata& md) {
  for (const auto& [k, v] : md) out += "# " + k + "=" + v + "\n";
}

// Splits CSV text into metadata and data lines (header first).
std::vector<std::string_view> read_csv_lines(std::string_view text, Metadata& md) {
  std::vector<std::string_view> lines;
  auto all = split(text, '\n');
  if (!all.empty() && all.back().empty()) all.pop_back();
  for (auto line : all) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.starts_with("# ")) {
      if (!lines.empty()) throw DomainError("report CSV: metadata line after the header");
      const auto body = line.substr(2);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw DomainError("report CSV: metadata line without '='");
      md.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
    } else {
      lines.push_back(line);
    }
  }
  if (lines.empty()) throw DomainError("report CSV: missing header row");
  validate_metadata(md);
  return lines;
}

Json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double json_number(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (!j.is_number()) throw DomainError("report JSON: expected a number");
  return j.get<double>();
}

Json metadata_json(const Metadata& md) {
  Json o = Json::object();
  for (const auto& [k, v] : md) o[k] = v;
  return o;
}

Metadata json_metadata(const Json& j) {
  if (!j.is_object()) throw DomainError("report JSON: metadata must be an object");
  Metadata md;
  for (const auto& [k, v] : j.items()) md.emplace_back(k, v.get<std::string>());
  validate_metadata(md);
  return md;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DomainError(std::string("report JSON: ") + e.what());
  }
}

template <typename F>
auto guard_json(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DomainError(std::string("report JSON: ") + e.what());
  }
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Quadrature:
      return "quadrature";
    case Method::Sum:
      return "sum";
    case Method::MonteCarlo:
      return "montecarlo";
    case Method::Asymptotic:
      return "asymptotic";
    case Method::ClosedForm:
      return "closed";
  }
  throw DomainError("unknown method");
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::Quadrature, Method::Sum, Method::MonteCarlo, Method::Asymptotic, Method::ClosedForm}) {
    if (to_string(m) == s) return m;
  }
  throw DomainError("unknown method '" + s + "'");
}

std::string to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw DomainError("unknown format '" + s + "' (csv or json)");
}

void ComparisonReport::validate() const {
  validate_metadata(metadata);
  for (const auto& r : rows) {
    if (!bare_field(r.quantity)) throw DomainError("report: quantity '" + r.quantity + "' is not a plain CSV field");
    if (!(r.err_est >= 0.0)) throw DomainError("report: err_est of '" + r.quantity + "' must be >= 0");
  }
}

void TableReport::validate() const {
  validate_metadata(metadata);
  if (columns.empty()) throw DomainError("table: no columns");
  for (const auto& c : columns) {
    if (!bare_field(c)) throw DomainError("table: column '" + c + "' is not a plain CSV field");
  }
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw DomainError("table: row width differs from the header");
  }
}

bool operator==(const ReportRow& a, const ReportRow& b) {
  return a.quantity == b.quantity && a.method == b.method && same_double(a.value, b.value) &&
         same_double(a.err_est, b.err_est);
}

bool operator==(const ComparisonReport& a, const ComparisonReport& b) {
  return a.metadata == b.metadata && a.rows == b.rows;
}

bool operator==(const TableReport& a, const TableReport& b) {
  if (a.metadata != b.metadata || a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].size() != b.rows[i].size()) return false;
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
      if (!same_double(a.rows[i][j], b.rows[i][j])) return false;
    }
  }
  return true;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw DomainError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string write_csv(const ComparisonReport& r) {
  r.validate();
  std::string out;
  write_metadata(out, r.metadata);
  out += kComparisonHeader;
  out += '\n';
  for (const auto& row : r.rows) {
    out += row.quantity + "," + to_string(row.method) + "," + format_double(row.value) + "," +
           format_double(row.err_est) + "\n";
  }
  return out;
}

std::string write_csv(const TableReport& r) {
  r.validate();
  std::string out;
  write_metadata(out, r.metadata);
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += '\n';
  }
  return out;
}

ComparisonReport read_comparison_csv(std::string_view text) {
  ComparisonReport r;
  const auto lines = read_csv_lines(text, r.metadata);
  if (lines.front() != kComparisonHeader) throw DomainError("report CSV: unexpected header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 4) throw DomainError("report CSV: expected 4 fields on line " + std::to_string(i + 1));
    r.rows.push_back({std::string(f[0]), parse_method(std::string(f[1])), parse_double(f[2]), parse_double(f[3])});
  }
  r.validate();
  return r;
}

TableReport read_table_csv(std::string_view text) {
  TableReport r;
  const auto lines = read_csv_lines(text, r.metadata);
  for (auto c : split(lines.front(), ',')) r.columns.emplace_back(c);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<double> row;
    for (auto f : split(lines[i], ',')) row.push_back(parse_double(f));
    r.rows.push_back(std::move(row));
  }
  r.validate();
  return r;
}

std::string write_json(const ComparisonReport& r) {
  r.validate();
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"quantity", row.quantity},
                        {"method", to_string(row.method)},
                        {"value", number_json(row.value)},
                        {"err_est", number_json(row.err_est)}});
  }
  const Json j{{"metadata", metadata_json(r.metadata)}, {"rows", rows}};
  return j.dump(2) + "\n";
}

std::string write_json(const TableReport& r) {
  r.validate();
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json a = Json::array();
    for (double v : row) a.push_back(number_json(v));
    rows.push_back(a);
  }
  const Json j{{"metadata", metadata_json(r.metadata)}, {"columns", r.columns}, {"rows", rows}};
  return j.dump(2) + "\n";
}

ComparisonReport read_comparison_json(std::string_view text) {
  const Json j = parse_json(text);
  return guard_json([&] {
    ComparisonReport r;
    r.metadata = json_metadata(j.at("metadata"));
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("quantity").get<std::string>(), parse_method(row.at("method").get<std::string>()),
                        json_number(row.at("value")), json_number(row.at("err_est"))});
    }
    r.validate();
    return r;
  });
}

TableReport read_table_json(std::string_view text) {
  const Json j = parse_json(text);
  return guard_json([&] {
    TableReport r;
    r.metadata = json_metadata(j.at("metadata"));
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      std::vector<double> v;
      for (const auto& x : row) v.push_back(json_number(x));
      r.rows.push_back(std::move(v));
    }
    r.validate();
    return r;
  });
}

std::string write_report(const ComparisonReport& r, Format f) {
  return f == Format::Csv ? write_csv(r) : write_json(r);
}

std::string write_report(const TableReport& r, Format f) {
  return f == Format::Csv ? write_csv(r) : write_json(r);
}

TableReport density_curve_table(const DensityCurve& c) {
  TableReport t;
  t.metadata = {{"ensemble", to_string(c.ensemble.kind)},
                {"N", std::to_string(c.ensemble.N)},
                {"L", std::to_string(c.ensemble.L)},
                {"m", std::to_string(c.ensemble.m)},
                {"normalized", c.normalized ? "true" : "false"}};
  t.columns = {"x", "value"};
  for (std::size_t i = 0; i < c.abscissae.size(); ++i) t.rows.push_back({c.abscissae[i], c.values[i]});
  return t;
}

TableReport histogram_table(const Histogram& h) {
  TableReport t;
  t.metadata = {{"lo", format_double(h.spec.lo)},
                {"hi", format_double(h.spec.hi)},
                {"bins", std::to_string(h.spec.bins)},
                {"outside", std::to_string(h.outside)}};
  t.columns = {"bin_left", "bin_right", "count", "normalized_value"};
  for (int i = 0; i < h.spec.bins; ++i) {
    t.rows.push_back(
        {h.bin_left(i), h.bin_right(i), static_cast<double>(h.counts[static_cast<std::size_t>(i)]), h.normalized(i)});
  }
  return t;
}

std::string write_json(const SimulationEstimate& e) {
  Json j{{"ensemble",
          {{"kind", to_string(e.ensemble.kind)}, {"N", e.ensemble.N}, {"L", e.ensemble.L}, {"m", e.ensemble.m}}},
         {"seed", e.seed},
         {"trials", e.trials},
         {"mean", number_json(e.mean)},
         {"std_error", number_json(e.std_error)},
         {"schur_failures", e.schur_failures}};
  if (e.histogram) {
    const auto& h = *e.histogram;
    j["histogram"] = {{"lo", h.spec.lo}, {"hi", h.spec.hi}, {"bins", h.spec.bins},
                      {"counts", h.counts}, {"outside", h.outside}};
  }
  return j.dump(2) + "\n";
}

SimulationEstimate read_simulation_json(std::string_view text) {
  const Json j = parse_json(text);
  return guard_json([&] {
    SimulationEstimate e;
    const auto& s = j.at("ensemble");
    e.ensemble.kind = parse_ensemble_kind(s.at("kind").get<std::string>());
    e.ensemble.N = s.at("N").get<int>();
    e.ensemble.L = s.at("L").get<int>();
    e.ensemble.m = s.at("m").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.trials = j.at("trials").get<long>();
    e.mean = json_number(j.at("mean"));
    e.std_error = json_number(j.at("std_error"));
    e.schur_failures = j.at("schur_failures").get<long>();
    if (j.contains("histogram")) {
      const auto& h = j.at("histogram");
      Histogram hist;
      hist.spec = {h.at("lo").get<double>(), h.at("hi").get<double>(), h.at("bins").get<int>()};
      hist.counts = h.at("counts").get<std::vector<long>>();
      hist.outside = h.at("outside").get<long>();
      if (hist.counts.size() != static_cast<std::size_t>(hist.spec.bins)) {
        throw DomainError("simulation JSON: histogram has the wrong number of counts");
      }
      e.histogram = hist;
    }
    return e;
  });
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path tmp = path.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace realeig
