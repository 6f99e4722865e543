#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "realeig/cli/report.hpp"
#include "realeig/ensemble.hpp"

namespace realeig {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitTolerance = 2,
  kExitNonConvergence = 3,
  kExitBadArguments = 4,
};

/// Every parameter a subcommand can use, resolved to concrete values.
struct RunConfig {
  std::string command;
  EnsembleSpec ensemble;
  /// N values for the weak-regime sweep.
  std::vector<int> sweep;
  /// Coefficient index for the gj command.
  int j = 0;
  std::vector<Method> methods;
  long trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Allowed relative gap between the quadrature and sum routes.
  double rel_tol = 1e-5;
  /// Allowed absolute gap to a leading-order asymptotic law.
  double abs_tol = 2.0;
  /// Allowed Monte Carlo gap in standard errors.
  double sigmas = 3.0;
  /// Allowed relative gap between fitted and predicted log-slope.
  double slope_tol = 0.1;
  /// Number of density cells.
  int grid = 40;
  int bins = 40;
  /// Densities and histograms cover (-range, range); 0 selects 1 for the
  /// truncated ensemble and 1.25 for Ginibre.
  double range = 0.0;
  std::vector<std::string> only;
  std::optional<std::string> out;
  Format format = Format::Csv;
  std::optional<std::string> cache_dir;

  /// All fields as ordered key=value pairs.
  Metadata describe() const;
  double resolved_range() const;
};

/// A computed pairwise comparison.
struct GapCheck {
  std::string label;
  double gap = 0.0;
  double allowed = 0.0;
  bool passed = true;
};

struct ComparisonOutcome {
  ComparisonReport report;
  std::vector<GapCheck> checks;
  int exit_code() const;
};

struct TableOutcome {
  TableReport report;
  std::vector<GapCheck> checks;
  int exit_code() const;
};

/// E(N_R) by each selected method, with every pair compared: quadrature
/// against sum to rel_tol, Monte Carlo against an exact route to sigmas
/// standard errors, asymptotic law against anything to abs_tol (or sigmas
/// standard errors if larger).
ComparisonOutcome cmd_expected(const RunConfig& c);

/// Cell averages of the normalized exact density, the Monte Carlo
/// histogram and the limiting density on `grid` equal cells over
/// (-range, range). Columns x, exact, mc, mc_err, limit; x is the cell
/// centre. With trials = 0 the mc columns are NaN.
TableOutcome cmd_density(const RunConfig& c);

/// E(N_R) from the alternating sum and the log-law for each N of the
/// sweep, the doubling increment D(N) = E(2N) - E(N), and the
/// least-squares slope of E against log N over the larger half of the
/// sweep.
ComparisonOutcome cmd_weak(const RunConfig& c);

/// g_j by contour quadrature, Monte Carlo and its large-j form.
ComparisonOutcome cmd_gj(const RunConfig& c);

/// A_{L,m} in closed form and by Monte Carlo, and the log-law coefficient
/// from both of its expressions.
ComparisonOutcome cmd_alm(const RunConfig& c);

/// A Monte Carlo run with histogram.
SimulationEstimate cmd_sample(const RunConfig& c);

struct CheckResult {
  std::string name;
  bool passed = false;
  /// One-line measured-vs-allowed summary, free of timings.
  std::string detail;
  /// True when the check failed by throwing a convergence error.
  bool nonconvergent = false;
};

/// Names of the checks in the verify battery, in run order.
std::vector<std::string> verify_check_names();

/// Runs the named checks (all when `only` is empty) at the pinned seed.
/// Throws DomainError on an unknown name.
std::vector<CheckResult> cmd_verify(const RunConfig& c);
int verify_exit_code(const std::vector<CheckResult>& results);

/// Least-squares slope of y against x and its standard error.
std::pair<double, double> fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace realeig
