#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "polygauss/hgm.hpp"

namespace polygauss {

/// Parsed problem file: {"a": d x n rows, "b": [n], "mean"?, "covariance"?,
/// "config"?}.
struct ProblemFile {
  GaussianProblem<double> problem;
  HgmConfig config;
};

ProblemFile parse_problem_json(const std::string& text);

/// Geometry stage shared by the CLI commands: standardize, optionally check
/// the raw family, strip redundancy, re-check, build the nerve when the
/// stripped family is in general position.
struct GeometryPipeline {
  bool family_general_position = false;
  std::optional<FaceSet> family_witness;
  FaceSet removed;
  HPolyhedron<double> stripped;
  GeneralPositionReport report;
  std::optional<SimplicialComplex> complex;
};

GeometryPipeline run_geometry_pipeline(const GaussianProblem<double>& gp,
                                       bool with_family_check);

struct OracleOptions {
  bool enabled = false;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 0;
};

// Report builders; each returns a complete JSON document (no trailing newline).
std::string run_check(const ProblemFile& pf);
std::string run_faces(const ProblemFile& pf, bool with_system);
std::string run_prob(const ProblemFile& pf, const OracleOptions& oracle, int* exit_code);
std::string run_selftest(const ProblemFile& pf, std::int64_t samples, std::uint64_t seed,
                         int* exit_code);
std::string run_bench(std::int64_t samples);

/// Dense JSON export of the coefficient matrices at an evaluation point:
/// basis list, per-direction matrices in row-major order.
std::string pfaffian_system_json(const PfaffianSystem<double>& sys,
                                 const VectorX<double>& b);

int exit_code_for(ErrorCode code) noexcept;

}  // namespace polygauss
