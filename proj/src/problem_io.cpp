#include "polygauss/problem_io.hpp"

#include <chrono>
#include <json.hpp>

#include "polygauss/json_writer.hpp"
#include "polygauss/oracle.hpp"

namespace polygauss {

namespace {

using nlohmann::json;

Eigen::MatrixXd parse_matrix(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    raise(ErrorCode::ParseError, std::string(name) + " must be an array of rows");
  const auto rows = j.size();
  const auto cols = j.front().size();
  if (cols == 0) raise(ErrorCode::ParseError, std::string(name) + " has empty rows");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      raise(ErrorCode::ParseError, std::string(name) + " rows have inconsistent lengths");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        raise(ErrorCode::ParseError, std::string(name) + " entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd parse_vector(const json& j, const char* name) {
  if (!j.is_array() || j.empty())
    raise(ErrorCode::ParseError, std::string(name) + " must be a nonempty array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      raise(ErrorCode::ParseError, std::string(name) + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

void write_face_array(JsonWriter& w, const std::vector<FaceSet>& faces) {
  w.begin_array();
  for (const auto& J : faces) {
    w.begin_array();
    for (int j : J) w.value(j);
    w.end_array();
  }
  w.end_array();
}

void write_index_array(JsonWriter& w, const FaceSet& J) {
  w.begin_array();
  for (int j : J) w.value(j);
  w.end_array();
}

}  // namespace

ProblemFile parse_problem_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) raise(ErrorCode::ParseError, "problem file must be a JSON object");
  if (!j.contains("a") || !j.contains("b"))
    raise(ErrorCode::ParseError, "problem file needs keys \"a\" and \"b\"");

  ProblemFile pf;
  Eigen::MatrixXd a = parse_matrix(j["a"], "a");
  Eigen::VectorXd b = parse_vector(j["b"], "b");
  if (b.size() != a.cols())
    raise(ErrorCode::ParseError, "length of b must equal the number of columns of a");
  pf.problem.polyhedron = HPolyhedron<double>(std::move(a), std::move(b));
  const Eigen::Index d = pf.problem.polyhedron.dim();

  if (j.contains("mean")) {
    pf.problem.mean = parse_vector(j["mean"], "mean");
    if (pf.problem.mean.size() != d)
      raise(ErrorCode::ParseError, "mean length must equal the dimension");
  }
  if (j.contains("covariance")) {
    pf.problem.covariance = parse_matrix(j["covariance"], "covariance");
    if (pf.problem.covariance.rows() != d || pf.problem.covariance.cols() != d)
      raise(ErrorCode::ParseError, "covariance must be d x d");
    const double scale = std::max(1.0, pf.problem.covariance.cwiseAbs().maxCoeff());
    const double asym =
        (pf.problem.covariance - pf.problem.covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
      raise(ErrorCode::ParseError, "covariance must be symmetric within 1e-12");
  }
  if (j.contains("config")) {
    const json& c = j["config"];
    if (!c.is_object()) raise(ErrorCode::ParseError, "config must be an object");
    auto number = [&](const char* key, double fallback) {
      if (!c.contains(key)) return fallback;
      if (!c[key].is_number()) raise(ErrorCode::ParseError, std::string("config.") + key + " must be a number");
      return c[key].get<double>();
    };
    pf.config.rel_tol = number("rel_tol", pf.config.rel_tol);
    pf.config.abs_tol = number("abs_tol", pf.config.abs_tol);
    pf.config.init_tol = number("init_tol", pf.config.init_tol);
    if (c.contains("shift_t")) pf.config.shift_t = number("shift_t", 0.0);
    if (c.contains("max_retries")) {
      if (!c["max_retries"].is_number_integer())
        raise(ErrorCode::ParseError, "config.max_retries must be an integer");
      pf.config.max_retries = c["max_retries"].get<int>();
    }
  }
  return pf;
}

GeometryPipeline run_geometry_pipeline(const GaussianProblem<double>& gp,
                                       bool with_family_check) {
  GeometryPipeline out;
  const HPolyhedron<double> std_poly = standardize(gp);
  if (with_family_check) {
    const auto family = check_general_position(homogenize(std_poly));
    out.family_general_position = family.in_general_position;
    out.family_witness = family.witness;
  }
  auto strip = strip_redundant(std_poly);
  out.removed = strip.removed;
  out.stripped = strip.polyhedron;
  out.report = check_general_position(homogenize(out.stripped));
  if (out.report.in_general_position) out.complex = nerve(out.stripped, out.report);
  return out;
}

std::string run_check(const ProblemFile& pf) {
  const auto pipe = run_geometry_pipeline(pf.problem, true);
  JsonWriter w;
  w.begin_object();
  w.key("general_position").value(pipe.report.in_general_position);
  w.key("witness");
  if (pipe.report.witness)
    write_index_array(w, *pipe.report.witness);
  else
    w.null();
  w.key("removed_redundant");
  write_index_array(w, pipe.removed);
  w.key("n_faces").value(pipe.complex ? pipe.complex->size() : 0);
  w.key("rank").value(pipe.complex ? holonomic_rank(*pipe.complex) : 0);
  w.key("faces");
  write_face_array(w, pipe.complex ? pipe.complex->faces() : std::vector<FaceSet>{});
  w.key("family_general_position").value(pipe.family_general_position);
  w.key("family_witness");
  if (pipe.family_witness)
    write_index_array(w, *pipe.family_witness);
  else
    w.null();
  w.end_object();
  return w.str();
}

std::string pfaffian_system_json(const PfaffianSystem<double>& sys,
                                 const VectorX<double>& b) {
  JsonWriter w;
  w.begin_object();
  w.key("dimension").value(sys.dimension);
  w.key("basis");
  write_face_array(w, sys.complex.faces());
  w.key("point").begin_object();
  w.key("a").begin_array();
  for (Eigen::Index i = 0; i < sys.polyhedron.a.rows(); ++i) {
    w.begin_array();
    for (Eigen::Index j = 0; j < sys.polyhedron.a.cols(); ++j)
      w.value(sys.polyhedron.a(i, j));
    w.end_array();
  }
  w.end_array();
  w.key("b").begin_array();
  for (Eigen::Index j = 0; j < b.size(); ++j) w.value(b(j));
  w.end_array();
  w.end_object();

  auto dump_matrix = [&](const MatrixX<double>& m) {
    w.begin_array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.value(m(r, c));
    w.end_array();
  };

  const int n = static_cast<int>(sys.polyhedron.n_constraints());
  const int d = static_cast<int>(sys.polyhedron.dim());
  w.key("b_directions").begin_array();
  for (int j = 1; j <= n; ++j) {
    w.begin_object();
    w.key("j").value(j);
    w.key("matrix");
    dump_matrix(b_direction_matrix(sys, j, b));
    w.end_object();
  }
  w.end_array();
  w.key("a_directions").begin_array();
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= n; ++j) {
      w.begin_object();
      w.key("i").value(i);
      w.key("j").value(j);
      w.key("matrix");
      dump_matrix(a_direction_matrix(sys, i, j, b));
      w.end_object();
    }
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string run_faces(const ProblemFile& pf, bool with_system) {
  const auto pipe = run_geometry_pipeline(pf.problem, false);
  if (!pipe.complex)
    raise(ErrorCode::NotGeneralPosition,
          "family is not in general position after stripping" +
              (pipe.report.witness ? " (witness " + to_string(*pipe.report.witness) + ")"
                                   : std::string()));
  JsonWriter w;
  w.begin_object();
  w.key("n_constraints").value(static_cast<int>(pipe.stripped.n_constraints()));
  w.key("removed_redundant");
  write_index_array(w, pipe.removed);
  w.key("n_faces").value(pipe.complex->size());
  w.key("rank").value(holonomic_rank(*pipe.complex));
  w.key("faces");
  write_face_array(w, pipe.complex->faces());
  if (with_system) {
    const auto sys = build_system(pipe.stripped, *pipe.complex);
    w.key("pfaffian_system").raw_value(pfaffian_system_json(sys, pipe.stripped.b));
  }
  w.end_object();
  return w.str();
}

std::string run_prob(const ProblemFile& pf, const OracleOptions& oracle, int* exit_code) {
  *exit_code = 0;
  const auto result = compute_probability(pf.problem, pf.config);
  JsonWriter w;
  w.begin_object();
  w.key("probability").value(result.probability);
  w.key("rank").value(result.diagnostics.rank);
  w.key("doubling_gap").value(result.diagnostics.doubling_gap);
  w.key("singular_distance").value(result.diagnostics.singular_distance);
  w.key("singular_warning").value(result.diagnostics.singular_warning);
  w.key("shift_used").value(result.diagnostics.shift_used);
  w.key("steps_accepted").value(static_cast<long long>(result.diagnostics.steps_accepted));
  w.key("removed_redundant");
  write_index_array(w, result.diagnostics.removed_redundant);
  if (oracle.enabled) {
    const auto est = estimate_phi(standardize(pf.problem), oracle.samples, oracle.seed);
    const double diff = std::abs(result.probability - est.value);
    w.key("mc_value").value(est.value);
    w.key("mc_stderr").value(est.std_error);
    w.key("abs_diff").value(diff);
    if (diff > 4.0 * est.std_error + 1e-6) *exit_code = 4;
  }
  w.end_object();
  return w.str();
}

std::string run_selftest(const ProblemFile& pf, std::int64_t samples, std::uint64_t seed,
                         int* exit_code) {
  *exit_code = 0;
  const auto pipe = run_geometry_pipeline(pf.problem, false);
  if (!pipe.complex)
    raise(ErrorCode::NotGeneralPosition, "family is not in general position after stripping");
  const auto sys = build_system(pipe.stripped, *pipe.complex);
  const auto& b = pipe.stripped.b;
  const int n = static_cast<int>(pipe.stripped.n_constraints());
  const int d = static_cast<int>(pipe.stripped.dim());

  std::vector<Coordinate> coords;
  for (int j = 1; j <= n; ++j) coords.push_back(b_coord(j));
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= n; ++j) coords.push_back(a_coord(i, j));

  double integ = 0.0;
  for (std::size_t u = 0; u < coords.size(); ++u)
    for (std::size_t v = u + 1; v < coords.size(); ++v)
      integ = std::max(integ, integrability_residual(sys, b, coords[u], coords[v]));

  const double gram_res = gram_identity_residual(sys, b);
  const double decomp = check_decomposition(pipe.stripped, *pipe.complex, samples, seed);
  const auto sd = singular_distance(sys);

  const bool integ_pass = integ <= 1e-6;
  const bool gram_pass = gram_res <= 1e-10;
  const bool decomp_pass = decomp <= 1e-10;
  if (!integ_pass || !gram_pass || !decomp_pass) *exit_code = 5;

  JsonWriter w;
  w.begin_object();
  w.key("rank").value(holonomic_rank(*pipe.complex));
  w.key("singular_distance").value(sd.value);
  w.key("singular_warning").value(sd.warning);
  w.key("integrability_max_residual").value(integ);
  w.key("integrability_pass").value(integ_pass);
  w.key("gram_identity_residual").value(gram_res);
  w.key("gram_identity_pass").value(gram_pass);
  w.key("decomposition_residual").value(decomp);
  w.key("decomposition_samples").value(static_cast<long long>(samples));
  w.key("decomposition_pass").value(decomp_pass);
  w.key("pass").value(integ_pass && gram_pass && decomp_pass);
  w.end_object();
  return w.str();
}

namespace {

struct BenchInstance {
  const char* name;
  GaussianProblem<double> problem;
};

std::vector<BenchInstance> bench_instances() {
  std::vector<BenchInstance> out;
  {
    Eigen::MatrixXd a(2, 4);
    a << 1, -1, 0, 0, 0, 0, 1, -1;
    Eigen::VectorXd b(4);
    b << 0, 1, 0, 1;
    out.push_back({"unit_square", {HPolyhedron<double>(a, b), {}, {}}});
  }
  {
    Eigen::MatrixXd a(2, 3);
    a << 1, 0, -1, 0, 1, -1;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    out.push_back({"triangle", {HPolyhedron<double>(a, b), {}, {}}});
  }
  {
    const double rho = 0.5;
    Eigen::MatrixXd a(2, 2);
    a << 1, rho, 0, std::sqrt(1 - rho * rho);
    out.push_back({"orthant_rho_0.5", {HPolyhedron<double>(a, Eigen::VectorXd::Zero(2)), {}, {}}});
  }
  {
    Eigen::MatrixXd a(2, 3);
    a << 1, 0.6, 1.3, 0, 0.8, -0.4;
    Eigen::VectorXd b(3);
    b << 0, 0, 0.05;
    out.push_back({"wedge", {HPolyhedron<double>(a, b), {}, {}}});
  }
  {
    Eigen::MatrixXd a(3, 5);
    a << 0.9, -0.3, 0.1, -1.1, 0.4,
         0.2, 1.0, -0.7, 0.3, 0.8,
         -0.4, 0.2, 0.9, 0.5, -1.0;
    Eigen::VectorXd b(5);
    b << 0.8, 1.1, 0.6, 1.3, 0.9;
    out.push_back({"random_d3_n5", {HPolyhedron<double>(a, b), {}, {}}});
  }
  return out;
}

}  // namespace

std::string run_bench(std::int64_t samples) {
  JsonWriter w;
  w.begin_object();
  w.key("instances").begin_array();
  for (const auto& inst : bench_instances()) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = compute_probability(inst.problem);
    const auto t1 = std::chrono::steady_clock::now();
    const auto est = estimate_phi(standardize(inst.problem), samples, 0);
    const auto t2 = std::chrono::steady_clock::now();
    w.begin_object();
    w.key("name").value(std::string_view(inst.name));
    w.key("d").value(static_cast<int>(inst.problem.polyhedron.dim()));
    w.key("n").value(static_cast<int>(inst.problem.polyhedron.n_constraints()));
    w.key("rank").value(result.diagnostics.rank);
    w.key("probability").value(result.probability);
    w.key("mc_value").value(est.value);
    w.key("hgm_ms").value(std::chrono::duration<double, std::milli>(t1 - t0).count());
    w.key("mc_ms").value(std::chrono::duration<double, std::milli>(t2 - t1).count());
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
      return 2;
    case ErrorCode::InvalidPolyhedron:
    case ErrorCode::EmptyPolyhedron:
    case ErrorCode::NotGeneralPosition:
    case ErrorCode::NonPositiveDefinite:
      return 3;
    case ErrorCode::OracleMismatch:
      return 4;
    default:
      return 5;
  }
}

}  // namespace polygauss
