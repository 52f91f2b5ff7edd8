#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polygauss/problem_io.hpp"

namespace {

using namespace polygauss;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ParseError, "cannot open input file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& report) {
  if (path == "-") {
    std::cout << report << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) raise(ErrorCode::ParseError, "cannot open output file " + path);
  out << report << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian probability content of convex polyhedra"};
  app.require_subcommand(1);

  std::string input = "-";
  std::string output = "-";
  bool oracle = false;
  bool with_system = false;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 0;
  std::int64_t selftest_samples = 100000;
  std::int64_t bench_samples = 200000;

  auto add_file = [&](CLI::App* cmd) {
    cmd->add_option("file", input, "problem JSON (\"-\" for stdin)")->required();
    cmd->add_option("-o,--output", output, "report destination (\"-\" for stdout)");
  };

  auto* cmd_check = app.add_subcommand("check", "general position and face structure");
  add_file(cmd_check);

  auto* cmd_prob = app.add_subcommand("prob", "probability content");
  add_file(cmd_prob);
  cmd_prob->add_flag("--oracle", oracle, "cross-check against a Monte-Carlo estimate");
  cmd_prob->add_option("--samples", samples, "oracle sample count");
  cmd_prob->add_option("--seed", seed, "oracle seed");

  auto* cmd_faces = app.add_subcommand("faces", "list the nonempty faces");
  add_file(cmd_faces);
  cmd_faces->add_flag("--system", with_system, "include the coefficient matrices");

  auto* cmd_selftest = app.add_subcommand("selftest", "internal consistency checks");
  add_file(cmd_selftest);
  cmd_selftest->add_option("--samples", selftest_samples, "decomposition sample count");
  cmd_selftest->add_option("--seed", seed, "decomposition seed");

  auto* cmd_bench = app.add_subcommand("bench", "timings over the bundled instances");
  cmd_bench->add_option("-o,--output", output, "report destination");
  cmd_bench->add_option("--samples", bench_samples, "oracle sample count");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string report;
    int exit_code = 0;
    if (cmd_bench->parsed()) {
      report = run_bench(bench_samples);
    } else {
      const ProblemFile pf = parse_problem_json(read_input(input));
      if (cmd_check->parsed()) {
        report = run_check(pf);
      } else if (cmd_prob->parsed()) {
        OracleOptions opts;
        opts.enabled = oracle;
        opts.samples = samples;
        opts.seed = seed;
        report = run_prob(pf, opts, &exit_code);
      } else if (cmd_faces->parsed()) {
        report = run_faces(pf, with_system);
      } else {
        report = run_selftest(pf, selftest_samples, seed, &exit_code);
      }
    }
    write_output(output, report);
    return exit_code;
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}
