#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include "realeig/cli/app.hpp"
#include "realeig/cli/commands.hpp"
#include "realeig/cli/report.hpp"
#include "realeig/errors.hpp"

using namespace realeig;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "realeig");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const ReportRow* find_row(const ComparisonReport& r, const std::string& quantity, Method m) {
  for (const auto& row : r.rows) {
    if (row.quantity == quantity && row.method == m) return &row;
  }
  return nullptr;
}

ComparisonReport sample_report() {
  ComparisonReport r;
  r.metadata = {{"command", "expected"}, {"seed", "7"}, {"note", "a b,c"}};
  r.rows = {{"E(N_R)", Method::Quadrature, 2.1332555301615, 1e-12},
            {"E(N_R)", Method::MonteCarlo, 0.1, 0.0036},
            {"tiny", Method::Sum, 5e-324, 0.0},
            {"neg_zero", Method::Asymptotic, -0.0, 0.0},
            {"big", Method::ClosedForm, std::numeric_limits<double>::max(), 1e308},
            {"missing", Method::Sum, kNaN, 0.0},
            {"unbounded", Method::Sum, -kInf, kInf}};
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("realeig_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(ReportFormat, ShortestRoundTripNumbers) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(kNaN), "nan");
  EXPECT_EQ(format_double(-kInf), "-inf");
  EXPECT_EQ(format_double(-0.0), "-0");
  for (double v : {0.1, 1.0 / 3.0, 5e-324, -2.5e300, 123456789.0}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_THROW(parse_double("1.0x"), DomainError);
  EXPECT_THROW(parse_double(" 1"), DomainError);
  EXPECT_THROW(parse_double(""), DomainError);
}

TEST(ReportFormat, MethodAndFormatNames) {
  for (auto m : {Method::Quadrature, Method::Sum, Method::MonteCarlo, Method::Asymptotic, Method::ClosedForm}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_EQ(to_string(Method::MonteCarlo), "montecarlo");
  EXPECT_THROW(parse_method("guess"), DomainError);
  EXPECT_EQ(parse_format("json"), Format::Json);
  EXPECT_THROW(parse_format("xml"), DomainError);
}

TEST(ReportRoundTrip, ComparisonCsv) {
  const auto r = sample_report();
  const auto back = read_comparison_csv(write_csv(r));
  EXPECT_EQ(back, r);
  EXPECT_TRUE(std::signbit(back.rows[3].value));
  EXPECT_EQ(write_csv(back), write_csv(r));
}

TEST(ReportRoundTrip, ComparisonJson) {
  const auto r = sample_report();
  const auto back = read_comparison_json(write_json(r));
  EXPECT_EQ(back, r);
  EXPECT_TRUE(std::signbit(back.rows[3].value));
}

TEST(ReportRoundTrip, EqualityDistinguishesSignedZero) {
  auto a = sample_report(), b = sample_report();
  b.rows[3].value = 0.0;
  EXPECT_FALSE(a == b);
}

TEST(ReportRoundTrip, TableCsvAndJson) {
  TableReport t;
  t.metadata = {{"N", "8"}};
  t.columns = {"x", "exact", "mc"};
  t.rows = {{-0.5, 0.25, kNaN}, {0.5, 1.0 / 3.0, -0.0}};
  EXPECT_EQ(read_table_csv(write_csv(t)), t);
  EXPECT_EQ(read_table_json(write_json(t)), t);
}

TEST(ReportRoundTrip, CsvLayout) {
  const std::string csv = write_csv(sample_report());
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(csv.rfind("# command=expected\n", 0), 0u);
  EXPECT_NE(csv.find("\nquantity,method,value,err_est\n"), std::string::npos);
}

TEST(ReportValidate, RejectsMalformedReports) {
  auto r = sample_report();
  r.rows[0].err_est = -1.0;
  EXPECT_THROW(r.validate(), DomainError);
  r = sample_report();
  r.rows[0].err_est = kNaN;
  EXPECT_THROW(r.validate(), DomainError);
  r = sample_report();
  r.rows[0].quantity = "a,b";
  EXPECT_THROW(r.validate(), DomainError);
  r = sample_report();
  r.metadata.emplace_back("k=v", "x");
  EXPECT_THROW(r.validate(), DomainError);
  r = sample_report();
  r.metadata.emplace_back("seed", "8");
  EXPECT_THROW(r.validate(), DomainError);

  TableReport t;
  t.columns = {"x", "y"};
  t.rows = {{1.0}};
  EXPECT_THROW(t.validate(), DomainError);
}

TEST(ReportParse, RejectsBadInput) {
  EXPECT_THROW(read_comparison_csv("quantity,method,value,err_est\nE,guess,1,0\n"), DomainError);
  EXPECT_THROW(read_comparison_csv("x,y\n"), DomainError);
  EXPECT_THROW(read_comparison_csv("quantity,method,value,err_est\nE,sum,1\n"), DomainError);
  EXPECT_THROW(read_comparison_json("{\"rows\": 3}"), DomainError);
}

TEST(SimulationJson, RoundTripWithHistogram) {
  SimulationEstimate e;
  e.ensemble = {8, 2, 2, EnsembleKind::TruncatedOrthogonal};
  e.mean = 2.125;
  e.std_error = 0.1 / 3.0;
  e.trials = 1000;
  e.seed = 0xffffffffffffffffULL;
  e.schur_failures = 1;
  Histogram h;
  h.spec = {-1.0, 1.0, 4};
  h.counts = {1, 2, 3, 4};
  h.outside = 5;
  e.histogram = h;
  const auto back = read_simulation_json(write_json(e));
  EXPECT_EQ(back.ensemble, e.ensemble);
  EXPECT_EQ(back.mean, e.mean);
  EXPECT_EQ(back.std_error, e.std_error);
  EXPECT_EQ(back.trials, e.trials);
  EXPECT_EQ(back.seed, e.seed);
  EXPECT_EQ(back.schur_failures, e.schur_failures);
  ASSERT_TRUE(back.histogram.has_value());
  EXPECT_EQ(back.histogram->counts, h.counts);
  EXPECT_EQ(back.histogram->outside, h.outside);
  EXPECT_EQ(back.histogram->spec.bins, 4);
}

TEST(HistogramTable, Columns) {
  Histogram h;
  h.spec = {-1.0, 1.0, 2};
  h.counts = {3, 1};
  const auto t = histogram_table(h);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"bin_left", "bin_right", "count", "normalized_value"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], 0.0);
  EXPECT_EQ(t.rows[1][1], 1.0);
  EXPECT_EQ(t.rows[0][2], 3.0);
  EXPECT_DOUBLE_EQ(t.rows[0][3], 0.75);
}

TEST(AtomicWrite, ReplacesContentAndLeavesNoTemporaries) {
  const auto d = scratch_dir("atomic");
  const auto p = d / "out.csv";
  write_file_atomic(p, "first\n");
  write_file_atomic(p, "second\n");
  EXPECT_EQ(read_file(p), "second\n");
  EXPECT_EQ(std::distance(fs::directory_iterator(d), fs::directory_iterator{}), 1);
  EXPECT_THROW(write_file_atomic(d / "missing" / "x.csv", "x"), IoError);
  fs::remove_all(d);
}

TEST(FitSlope, ExactLine) {
  const auto [slope, err] = fit_slope({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0});
  EXPECT_NEAR(slope, 2.0, 1e-14);
  EXPECT_NEAR(err, 0.0, 1e-12);
  EXPECT_THROW(fit_slope({1.0}, {2.0}), DomainError);
}

TEST(CliExpected, ThreeRoutesAgree) {
  const auto r = run({"expected", "--N", "10", "--L", "2", "--m", "1", "--methods", "quadrature,sum,montecarlo",
                      "--trials", "100000", "--seed", "7"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = read_comparison_csv(r.out);
  EXPECT_EQ(rep.rows.size(), 3u);
  const auto* q = find_row(rep, "E(N_R)", Method::Quadrature);
  const auto* s = find_row(rep, "E(N_R)", Method::Sum);
  const auto* mc = find_row(rep, "E(N_R)", Method::MonteCarlo);
  ASSERT_TRUE(q && s && mc);
  EXPECT_NEAR(q->value / s->value, 1.0, 1e-5);
  EXPECT_NEAR(mc->value, q->value, 3.0 * mc->err_est);
  for (const auto& row : rep.rows) EXPECT_GE(row.err_est, 0.0);
}

TEST(CliExpected, RemainderAtSquareSize) {
  const auto r = run({"expected", "--N", "100", "--L", "100", "--m", "1", "--methods", "sum,asymptotic"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = read_comparison_csv(r.out);
  const auto* s = find_row(rep, "E(N_R)", Method::Sum);
  const auto* a = find_row(rep, "E(N_R)", Method::Asymptotic);
  ASSERT_TRUE(s && a);
  EXPECT_LE(std::fabs(s->value - a->value), 2.0);
  EXPECT_NEAR(a->value, 7.03227, 1e-4);
}

TEST(CliExpected, SingleSumRow) {
  const auto r = run({"expected", "--N", "2", "--L", "2", "--m", "1", "--methods", "sum"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = read_comparison_csv(r.out);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_GT(rep.rows[0].value, 0.0);
}

TEST(CliExpected, ReportEmbedsConfiguration) {
  const auto r = run({"expected", "--N", "4", "--L", "3", "--m", "2", "--methods", "sum", "--seed", "99"});
  const auto rep = read_comparison_csv(r.out);
  auto has = [&](const std::string& k, const std::string& v) {
    for (const auto& [key, value] : rep.metadata) {
      if (key == k) return value == v;
    }
    return false;
  };
  EXPECT_TRUE(has("command", "expected"));
  EXPECT_TRUE(has("N", "4"));
  EXPECT_TRUE(has("L", "3"));
  EXPECT_TRUE(has("m", "2"));
  EXPECT_TRUE(has("seed", "99"));
  EXPECT_TRUE(has("methods", "sum"));
}

TEST(CliExpected, ToleranceViolationExitsTwo) {
  const auto r = run({"expected", "--N", "10", "--methods", "sum,asymptotic", "--abs-tol", "1e-6"});
  EXPECT_EQ(r.code, kExitTolerance);
  EXPECT_NE(r.err.find("FAIL"), std::string::npos);
}

TEST(CliExpected, UntrustedSizeExitsThree) {
  const auto r = run({"expected", "--N", "300", "--L", "10", "--methods", "quadrature"});
  EXPECT_EQ(r.code, kExitNonConvergence);
}

TEST(CliExpected, JsonFileMatchesCsvRows) {
  const auto d = scratch_dir("json");
  const auto p = (d / "e.json").string();
  const auto j = run({"expected", "--N", "6", "--methods", "quadrature,sum", "--format", "json", "--out", p});
  EXPECT_EQ(j.code, 0) << j.err;
  const auto c = run({"expected", "--N", "6", "--methods", "quadrature,sum"});
  const auto from_json = read_comparison_json(read_file(p));
  const auto from_csv = read_comparison_csv(c.out);
  ASSERT_EQ(from_json.rows.size(), from_csv.rows.size());
  for (std::size_t i = 0; i < from_csv.rows.size(); ++i) EXPECT_EQ(from_json.rows[i], from_csv.rows[i]);
  fs::remove_all(d);
}

TEST(CliArguments, BadArgumentsExitFour) {
  EXPECT_EQ(run({"expected", "--N", "0"}).code, kExitBadArguments);
  EXPECT_EQ(run({"expected", "--N", "4", "--L", "0"}).code, kExitBadArguments);
  EXPECT_EQ(run({"expected", "--N", "4", "--format", "xml"}).code, kExitBadArguments);
  EXPECT_EQ(run({"expected", "--N", "4", "--methods", "guess"}).code, kExitBadArguments);
  EXPECT_EQ(run({"expected", "--N", "4,8"}).code, kExitBadArguments);
  EXPECT_EQ(run({"expected", "--N"}).code, kExitBadArguments);
  EXPECT_EQ(run({"frobnicate"}).code, kExitBadArguments);
  EXPECT_EQ(run({}).code, kExitBadArguments);
  EXPECT_EQ(run({"verify", "--only", "nonsense"}).code, kExitBadArguments);
}

TEST(CliArguments, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE((r.out + r.err).find("expected"), std::string::npos);
}

TEST(CliOutput, UnwritablePathFailsWithoutPartialFile) {
  const auto d = scratch_dir("unwritable");
  const auto p = d / "missing" / "x.csv";
  const auto r = run({"expected", "--N", "4", "--methods", "sum", "--out", p.string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_FALSE(fs::exists(p));
  fs::remove_all(d);
}

TEST(CliOutput, FailedDensityLeavesNoFile) {
  const auto d = scratch_dir("density_fail");
  const auto p = d / "d.csv";
  EXPECT_EQ(run({"density", "--N", "8", "--grid", "8", "--trials", "0", "--out", p.string()}).code,
            kExitBadArguments);
  EXPECT_FALSE(fs::exists(p));
  fs::remove_all(d);
}

TEST(CliDensity, SimulationMatchesExactColumn) {
  const auto r = run({"density", "--N", "8", "--L", "2", "--m", "1", "--trials", "100000", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto t = read_table_csv(r.out);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"x", "exact", "mc", "mc_err", "limit"}));
  EXPECT_EQ(t.rows.size(), 40u);
}

TEST(CliDensity, ExactColumnEvenAndLimitColumnNormalized) {
  const auto r = run({"density", "--N", "8", "--L", "2", "--m", "2", "--grid", "400", "--trials", "0"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto t = read_table_csv(r.out);
  ASSERT_EQ(t.rows.size(), 400u);
  double mass = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto& mirror = t.rows[t.rows.size() - 1 - i];
    EXPECT_DOUBLE_EQ(row[0], -mirror[0]);
    EXPECT_NEAR(row[1], mirror[1], 1e-8);
    EXPECT_TRUE(std::isnan(row[2]));
    EXPECT_NE(row[0], 0.0);
    if (i > 0) mass += 0.5 * (row[4] + t.rows[i - 1][4]) * (row[0] - t.rows[i - 1][0]);
  }
  // The trapezoid over cell centres omits the two half cells at the ends,
  // where the limit column is zero.
  EXPECT_NEAR(mass, 1.0, 1e-3);
}

TEST(CliWeak, SlopeMatchesLogLaw) {
  const auto r = run({"weak", "--L", "2", "--m", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = read_comparison_csv(r.out);
  const auto* s = find_row(rep, "slope", Method::Sum);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->value, 0.5, 0.05);
  const auto* d = find_row(rep, "D[N=8192]", Method::Sum);
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->value / (0.5 * std::log(2.0)), 1.0, 0.1);
}

TEST(CliWeak, TwoFactorsOfDepthOne) {
  const auto r = run({"weak", "--L", "1", "--m", "2", "--N", "256,512,1024,2048"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto* s = find_row(read_comparison_csv(r.out), "slope", Method::Sum);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->value, 0.5, 0.05);
}

TEST(CliWeak, SlopeInvariantUnderDoublingSweep) {
  const auto a = run({"weak", "--N", "64,128,256,512,1024"});
  const auto b = run({"weak", "--N", "128,256,512,1024,2048"});
  const auto* sa = find_row(read_comparison_csv(a.out), "slope", Method::Sum);
  const auto* sb = find_row(read_comparison_csv(b.out), "slope", Method::Sum);
  ASSERT_TRUE(sa && sb);
  EXPECT_NEAR(sa->value, sb->value, 1e-3);
}

TEST(CliGj, ContourAgreesWithSimulation) {
  const auto r = run({"gj", "--j", "5", "--L", "3", "--m", "2", "--trials", "200000"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(CliAlm, ClosedFormAgreesWithSimulation) {
  const auto r = run({"alm", "--L", "2", "--m", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rep = read_comparison_csv(r.out);
  bool found = false;
  for (const auto& row : rep.rows) {
    if (row.method == Method::ClosedForm && row.value == 0.375) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(CliSample, JsonEstimate) {
  const auto r = run({"sample", "--N", "4", "--L", "2", "--trials", "2000", "--format", "json", "--bins", "10"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto e = read_simulation_json(r.out);
  EXPECT_EQ(e.trials, 2000);
  EXPECT_EQ(e.ensemble.N, 4);
  ASSERT_TRUE(e.histogram.has_value());
  EXPECT_EQ(e.histogram->counts.size(), 10u);
}

TEST(CliVerify, AlmOnly) {
  const auto r = run({"verify", "--only", "alm"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("alm", 0), 0u);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST(CliVerify, FullBatteryPassesAndIgnoresThreadCount) {
  const auto a = run({"verify", "--seed", "12345", "--threads", "1"});
  const auto b = run({"verify", "--seed", "12345", "--threads", "8"});
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(static_cast<std::size_t>(std::count(a.out.begin(), a.out.end(), '\n')), verify_check_names().size());
}
