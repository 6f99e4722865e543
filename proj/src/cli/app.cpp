#include "realeig/cli/app.hpp"

#include <cstdio>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "realeig/cache.hpp"
#include "realeig/cli/commands.hpp"
#include "realeig/errors.hpp"
#include "realeig/parallel.hpp"

namespace realeig {

namespace {

struct Options {
  std::vector<int> N;
  int L = 2;
  int m = 1;
  std::string ensemble = "truncated";
  std::optional<long> trials;
  std::uint64_t seed = 1;
  int threads = std::max(1u, std::thread::hardware_concurrency());
  double rel_tol = 1e-5;
  double abs_tol = 2.0;
  double sigmas = 3.0;
  double slope_tol = 0.1;
  std::string out;
  std::string format = "csv";
  std::vector<std::string> methods;
  int grid = 40;
  int bins = 40;
  double range = 0.0;
  int j = 0;
  std::vector<std::string> only;
  std::string cache_dir;
};

void add_options(CLI::App& app, Options& o) {
  app.add_option("--N", o.N, "Matrix size (weak: comma-separated sweep)")->delimiter(',');
  app.add_option("--L", o.L, "Truncation depth L")->capture_default_str();
  app.add_option("--m", o.m, "Number of factors")->capture_default_str();
  app.add_option("--ensemble", o.ensemble, "truncated or ginibre")->capture_default_str();
  app.add_option("--trials", o.trials, "Monte Carlo trials or samples (0 skips Monte Carlo)");
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rel-tol", o.rel_tol, "Allowed relative quadrature-vs-sum gap")->capture_default_str();
  app.add_option("--abs-tol", o.abs_tol, "Allowed absolute gap to the asymptotic law")->capture_default_str();
  app.add_option("--sigmas", o.sigmas, "Allowed Monte Carlo gap in standard errors")->capture_default_str();
  app.add_option("--slope-tol", o.slope_tol, "Allowed relative error of the fitted log-slope")->capture_default_str();
  app.add_option("--out", o.out, "Output file (default: standard output)");
  app.add_option("--format", o.format, "csv or json")->capture_default_str();
  app.add_option("--methods", o.methods, "quadrature,sum,montecarlo,asymptotic")->delimiter(',');
  app.add_option("--grid", o.grid, "Density cells")->capture_default_str();
  app.add_option("--bins", o.bins, "Histogram bins")->capture_default_str();
  app.add_option("--range", o.range, "Half-width of the density/histogram window (0: automatic)");
  app.add_option("--j", o.j, "Coefficient index for gj")->capture_default_str();
  app.add_option("--only", o.only, "Checks to run in verify")->delimiter(',');
  app.add_option("--cache-dir", o.cache_dir, "Cache directory (overrides REALEIG_CACHE_DIR)");
}

int single_n(const Options& o, const std::string& cmd) {
  if (o.N.size() != 1) throw DomainError(cmd + ": give exactly one --N");
  return o.N.front();
}

RunConfig resolve(const std::string& cmd, const Options& o) {
  RunConfig c;
  c.command = cmd;
  c.ensemble.kind = parse_ensemble_kind(o.ensemble);
  c.ensemble.L = o.L;
  c.ensemble.m = o.m;
  c.seed = o.seed;
  c.threads = o.threads;
  c.rel_tol = o.rel_tol;
  c.abs_tol = o.abs_tol;
  c.sigmas = o.sigmas;
  c.slope_tol = o.slope_tol;
  c.grid = o.grid;
  c.bins = o.bins;
  c.range = o.range;
  c.j = o.j;
  c.only = o.only;
  c.format = parse_format(o.format);
  if (!o.out.empty()) c.out = o.out;
  if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
  for (const auto& m : o.methods) c.methods.push_back(parse_method(m));

  long default_trials = 100000;
  if (cmd == "expected" || cmd == "density" || cmd == "sample") {
    c.ensemble.N = single_n(o, cmd);
  } else if (cmd == "weak") {
    c.sweep = o.N.empty() ? std::vector<int>{256, 512, 1024, 2048, 4096, 8192} : o.N;
  } else if (cmd == "alm") {
    default_trials = 1000000;
  } else if (cmd == "verify") {
    if (o.seed == 1) c.seed = 12345;
  }
  if (cmd == "expected" && c.methods.empty()) {
    c.methods = c.ensemble.kind == EnsembleKind::TruncatedOrthogonal
                    ? std::vector<Method>{Method::Quadrature, Method::Sum, Method::Asymptotic}
                    : std::vector<Method>{Method::Quadrature, Method::Asymptotic};
  }
  c.trials = o.trials.value_or(default_trials);
  if (c.trials < 0) throw DomainError("--trials must be >= 0");
  if (!(c.rel_tol > 0.0 && c.abs_tol > 0.0 && c.sigmas > 0.0 && c.slope_tol > 0.0)) {
    throw DomainError("tolerances must be positive");
  }
  return c;
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out) {
    write_file_atomic(*c.out, text);
    out << "wrote " << *c.out << "\n";
  } else {
    out << text;
  }
}

void report_checks(const std::vector<GapCheck>& checks, std::ostream& err) {
  for (const auto& g : checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g %s allowed %.6g", g.gap, g.passed ? "<=" : ">", g.allowed);
    err << (g.passed ? "pass " : "FAIL ") << g.label << ": gap " << buf << "\n";
  }
}

int run(const std::string& cmd, const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = resolve(cmd, o);
  set_thread_budget(c.threads);
  if (c.cache_dir) set_cache_directory(std::filesystem::path(*c.cache_dir));

  if (cmd == "verify") {
    const auto results = cmd_verify(c);
    for (const auto& r : results) {
      char name[32];
      std::snprintf(name, sizeof name, "%-12s", r.name.c_str());
      out << name << (r.passed ? "PASS  " : "FAIL  ") << r.detail << "\n";
    }
    return verify_exit_code(results);
  }
  if (cmd == "sample") {
    SimulationEstimate est = cmd_sample(c);
    if (c.format == Format::Json) {
      emit(c, write_json(est), out);
    } else {
      TableReport t = histogram_table(*est.histogram);
      Metadata md = c.describe();
      md.emplace_back("mean", format_double(est.mean));
      md.emplace_back("std_error", format_double(est.std_error));
      md.emplace_back("schur_failures", std::to_string(est.schur_failures));
      md.insert(md.end(), t.metadata.begin(), t.metadata.end());
      t.metadata = md;
      emit(c, write_csv(t), out);
    }
    return kExitOk;
  }
  if (cmd == "density") {
    const TableOutcome r = cmd_density(c);
    emit(c, write_report(r.report, c.format), out);
    report_checks(r.checks, err);
    return r.exit_code();
  }
  ComparisonOutcome r;
  if (cmd == "expected") r = cmd_expected(c);
  if (cmd == "weak") r = cmd_weak(c);
  if (cmd == "gj") r = cmd_gj(c);
  if (cmd == "alm") r = cmd_alm(c);
  emit(c, write_report(r.report, c.format), out);
  report_checks(r.checks, err);
  return r.exit_code();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Real eigenvalues of products of truncated orthogonal and real Ginibre matrices"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  add_options(app, o);
  const std::pair<const char*, const char*> commands[] = {
      {"expected", "Expected number of real eigenvalues by several methods"},
      {"density", "Exact, simulated and limiting density of real eigenvalues"},
      {"weak", "Logarithmic growth for fixed L over a sweep of N"},
      {"gj", "One series coefficient by contour integral and Monte Carlo"},
      {"alm", "The constant A_{L,m} in closed form and by Monte Carlo"},
      {"sample", "Monte Carlo count of real eigenvalues with histogram"},
      {"verify", "Invariant checks at a pinned seed"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadArguments;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o, out, err);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const NonConvergent& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const NanEncountered& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const PrecisionLoss& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const SlowConvergence& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const SchurNoConvergence& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace realeig
