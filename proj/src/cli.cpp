#include "wpath/cli.hpp"

#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "wpath/instance_io.hpp"
#include "wpath/report.hpp"

namespace wpath {

namespace {

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return kExitOptimal;
    case SolveStatus::Infeasible: return kExitInfeasible;
    case SolveStatus::Unbounded: return kExitUnbounded;
    case SolveStatus::IterationLimit: return kExitIterationLimit;
    case SolveStatus::NumericalFailure: return kExitNumericalFailure;
  }
  return kExitNumericalFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted path-following LP solver for min c^T x subject to A x >= b"};
  app.name("wpath-lp");
  std::string input;
  std::string format = "json-dense";
  double tol = 1e-8;
  std::string mode = "tolerance";
  std::uint64_t seed = 0;
  bool strict = false;
  std::string trace_path;
  std::string report = "text";
  long max_iters = 1000000;

  app.add_option("--input", input, "Instance file")->required();
  app.add_option("--format", format, "Instance format")->check(CLI::IsMember({"json-dense", "csv-triple"}));
  app.add_option("--tol", tol, "Duality gap tolerance")->check(CLI::Range(1e-15, 0.5));
  app.add_option("--mode", mode, "Solve mode")->check(CLI::IsMember({"tolerance", "integral"}));
  app.add_option("--seed", seed, "Random seed");
  app.add_flag("--strict-constants", strict, "Use the theoretical constants throughout");
  app.add_option("--trace", trace_path, "Write one JSON line per iteration");
  app.add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--max-iters", max_iters, "Path-following iteration budget")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOptimal;
  } catch (const CLI::ParseError& e) {
    err << "wpath-lp: " << e.what() << "\n";
    return kExitUsage;
  }

  RawLP lp;
  try {
    lp = parse_instance(input, parse_format(format));
  } catch (const Error& e) {
    err << "wpath-lp: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitUsage;
  }

  SolveOptions opts;
  opts.mode = mode == "integral" ? SolveMode::Integral : SolveMode::Tolerance;
  opts.tolerance = tol;
  opts.strict_constants = strict;
  opts.max_iterations = max_iters;
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) {
      err << "wpath-lp: cannot open trace file " << trace_path << "\n";
      return kExitUsage;
    }
    opts.trace = [&trace](const TraceRecord& rec) { trace << trace_json(rec) << '\n'; };
  }

  RandomSource rng(seed);
  SolveReport rep;
  try {
    rep = solve(lp, opts, rng);
  } catch (const Error& e) {
    err << "wpath-lp: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    err << "wpath-lp: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  for (const std::string& note : rep.notes) err << "wpath-lp: note: " << note << "\n";
  out << (report == "json" ? report_json(rep) : report_text(rep));
  return exit_code(rep.status);
}

}  // namespace wpath
