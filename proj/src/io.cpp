#include "riemspline/io.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "riemspline/embedded.hpp"
#include "riemspline/format.hpp"
#include "riemspline/rods.hpp"
#include "riemspline/shells.hpp"

namespace riemspline {

using nlohmann::json;

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("RIEMSPLINE_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    if (v == "warn") return LogLevel::warn;
    if (v == "error") return LogLevel::error;
    return LogLevel::warn;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) < static_cast<int>(log_level())) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::cerr << "[riemspline:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

double parse_time_value(const std::string& raw, int K) {
  const auto slash = raw.find('/');
  if (slash != std::string::npos) {
    long long num = 0, den = 0;
    try {
      num = std::stoll(raw.substr(0, slash));
      den = std::stoll(raw.substr(slash + 1));
    } catch (const std::exception&) {
      throw InputError("malformed fraction '" + raw + "'");
    }
    if (den <= 0 || num < 0 || num > den)
      throw InputError("time fraction '" + raw + "' must lie in [0,1]");
    if ((static_cast<long long>(K) * num) % den != 0)
      throw InputError("K * t must be an integer: t = " + raw + " with K = " +
                       std::to_string(K) + " violates the integrality constraint");
    return static_cast<double>(num) / static_cast<double>(den);
  }
  double t = 0.0;
  try {
    t = std::stod(raw);
  } catch (const std::exception&) {
    throw InputError("malformed time value '" + raw + "'");
  }
  const double kt = K * t;
  if (std::abs(kt - std::round(kt)) > 1e-9)
    throw InputError("K * t must be an integer: t = " + raw + " with K = " +
                     std::to_string(K) + " violates the integrality constraint");
  return t;
}

Mat read_polygon_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open polygon CSV: " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y;
    if (ss >> x >> y) rows.emplace_back(x, y);
  }
  if (rows.size() < 3) throw InputError("polygon CSV needs at least 3 points");
  Mat out(static_cast<int>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(i, 0) = rows[i].first;
    out(i, 1) = rows[i].second;
  }
  return out;
}

namespace {

Vec json_to_vec(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

std::shared_ptr<ManifoldModel> build_manifold(const json& j,
                                              const std::filesystem::path& base_dir,
                                              std::string* canonical) {
  if (!j.is_object() || !j.contains("type"))
    throw InputError("manifold block needs a 'type'");
  const std::string type = j.at("type").get<std::string>();
  json canon{{"type", type}};
  std::shared_ptr<ManifoldModel> model;
  if (type == "euclidean") {
    const int dim = j.value("dim", 2);
    canon["dim"] = dim;
    model = make_euclidean_model(dim);
  } else if (type == "sphere") {
    const double radius = j.value("radius", 1.0);
    canon["radius"] = radius;
    model = make_sphere_model(radius);
  } else if (type == "torus") {
    const double R = j.value("R", 2.0), r = j.value("r", 1.0);
    canon["R"] = R;
    canon["r"] = r;
    model = make_torus_model(R, r);
  } else if (type == "cylinder") {
    const double perimeter = j.value("perimeter", 1.0);
    canon["perimeter"] = perimeter;
    model = make_cylinder_model(perimeter);
  } else if (type == "rod") {
    const int N = j.value("N", 16);
    const int M = j.value("M", 128);
    const double delta = j.value("delta", 0.1);
    const double c_min = j.value("c_min", 1e-3);
    canon["N"] = N;
    canon["M"] = M;
    canon["delta"] = delta;
    canon["c_min"] = c_min;
    model = make_rod_model(N, M, delta, c_min);
  } else if (type == "shell") {
    if (!j.contains("reference_obj"))
      throw InputError("shell manifold needs 'reference_obj'");
    const std::string ref = j.at("reference_obj").get<std::string>();
    canon["reference_obj"] = ref;
    ShellParams params;
    params.lambda = j.value("lambda", 1.0);
    params.mu = j.value("mu", 1.0);
    params.zeta = j.value("zeta", 1.0);
    params.eta = j.value("eta", 1e-4);
    canon["lambda"] = params.lambda;
    canon["mu"] = params.mu;
    canon["zeta"] = params.zeta;
    canon["eta"] = params.eta;
    const double rho = j.value("rho", 0.0);
    const double h = j.value("h", 0.0);
    if (rho > 0.0) canon["rho"] = rho;
    if (h > 0.0) canon["h"] = h;
    ObjMesh mesh = read_obj(base_dir / ref);
    model = std::make_shared<ShellModel>(mesh.positions, mesh.triangles, params, rho, h);
  } else {
    throw InputError("unknown manifold type '" + type + "'");
  }
  if (canonical) *canonical = canon.dump();
  return model;
}

Vec interpolation_point(const json& entry, const ManifoldModel& model,
                        const std::filesystem::path& base_dir) {
  if (entry.contains("point")) return json_to_vec(entry.at("point"));
  if (entry.contains("csv")) {
    const auto* rod = dynamic_cast<const RodModel*>(&model);
    if (!rod) throw InputError("'csv' interpolation data requires the rod backend");
    Mat poly = read_polygon_csv(base_dir / entry.at("csv").get<std::string>());
    return polygon_to_rod(poly, rod->truncation_order()).coeffs;
  }
  if (entry.contains("obj")) {
    const auto* shell = dynamic_cast<const ShellModel*>(&model);
    if (!shell) throw InputError("'obj' interpolation data requires the shell backend");
    ObjMesh mesh = read_obj(base_dir / entry.at("obj").get<std::string>());
    return shell->to_chart(mesh.positions);
  }
  throw InputError("interpolation entry needs 'point', 'csv' or 'obj'");
}

}  // namespace

ParsedProblem parse_problem_json(const std::string& text,
                                 const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("problem file must be a JSON object");

  ParsedProblem out;
  if (!j.contains("manifold")) throw InputError("problem file needs a 'manifold' block");
  out.model = build_manifold(j.at("manifold"), base_dir, &out.manifold_json);

  out.problem.K = j.value("K", 0);
  if (out.problem.K < 2) throw InputError("problem file needs K >= 2");
  out.problem.sigma = j.value("sigma", 1e-4);

  const json& bcj = j.value("boundary", json{{"type", "natural"}});
  const std::string bc = bcj.value("type", "natural");
  if (bc == "natural") {
    out.problem.bc = BoundaryKind::natural;
  } else if (bc == "hermite") {
    out.problem.bc = BoundaryKind::hermite;
    if (!bcj.contains("v0") || !bcj.contains("v1"))
      throw InputError("hermite boundary block needs 'v0' and 'v1'");
    out.problem.hermite_v0 = json_to_vec(bcj.at("v0"));
    out.problem.hermite_v1 = json_to_vec(bcj.at("v1"));
  } else if (bc == "periodic") {
    out.problem.bc = BoundaryKind::periodic;
  } else {
    throw InputError("unknown boundary condition '" + bc +
                     "' (expected natural, hermite or periodic)");
  }

  if (!j.contains("interpolation") || !j.at("interpolation").is_array() ||
      j.at("interpolation").empty())
    throw InputError("problem file needs a nonempty 'interpolation' array");
  for (const auto& entry : j.at("interpolation")) {
    std::string raw;
    if (!entry.contains("t")) throw InputError("interpolation entry needs 't'");
    if (entry.at("t").is_string())
      raw = entry.at("t").get<std::string>();
    else
      raw = format_double(entry.at("t").get<double>());
    out.t_raw.push_back(raw);
    out.problem.times.push_back(parse_time_value(raw, out.problem.K));
    out.problem.data.push_back(interpolation_point(entry, *out.model, base_dir));
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    out.problem.settings.tol_mid = s.value("tol_mid", out.problem.settings.tol_mid);
    out.problem.settings.tol_grad = s.value("tol_grad", out.problem.settings.tol_grad);
    out.problem.settings.max_iters = s.value("max_iters", out.problem.settings.max_iters);
    out.problem.settings.threads = s.value("threads", out.problem.settings.threads);
    out.problem.settings.seed = s.value("seed", out.problem.settings.seed);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    out.output.curve_csv = o.value("curve_csv", true);
    out.output.diagnostics_csv = o.value("diagnostics_csv", true);
    out.output.report = o.value("report", true);
    out.output.svg = o.value("svg", false);
    out.output.obj_sequence = o.value("obj", false);
  } else {
    out.output.svg = dynamic_cast<const RodModel*>(out.model.get()) != nullptr;
    out.output.obj_sequence = dynamic_cast<const ShellModel*>(out.model.get()) != nullptr;
  }
  return out;
}

ParsedProblem parse_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem_json(buf.str(), path.parent_path());
}

std::string serialize_problem(const ParsedProblem& parsed) {
  json j;
  j["manifold"] = json::parse(parsed.manifold_json);
  j["K"] = parsed.problem.K;
  j["sigma"] = parsed.problem.sigma;
  json bc;
  switch (parsed.problem.bc) {
    case BoundaryKind::natural: bc["type"] = "natural"; break;
    case BoundaryKind::hermite:
      bc["type"] = "hermite";
      bc["v0"] = vec_to_json(parsed.problem.hermite_v0);
      bc["v1"] = vec_to_json(parsed.problem.hermite_v1);
      break;
    case BoundaryKind::periodic: bc["type"] = "periodic"; break;
  }
  j["boundary"] = bc;
  json interp = json::array();
  for (std::size_t i = 0; i < parsed.problem.times.size(); ++i) {
    json entry;
    entry["t"] = parsed.t_raw[i];
    entry["point"] = vec_to_json(parsed.problem.data[i]);
    interp.push_back(entry);
  }
  j["interpolation"] = interp;
  j["solver"] = {{"tol_mid", parsed.problem.settings.tol_mid},
                 {"tol_grad", parsed.problem.settings.tol_grad},
                 {"max_iters", parsed.problem.settings.max_iters},
                 {"threads", parsed.problem.settings.threads},
                 {"seed", parsed.problem.settings.seed}};
  j["output"] = {{"curve_csv", parsed.output.curve_csv},
                 {"diagnostics_csv", parsed.output.diagnostics_csv},
                 {"report", parsed.output.report},
                 {"svg", parsed.output.svg},
                 {"obj", parsed.output.obj_sequence}};
  return j.dump(2) + "\n";
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string curve_csv(const ManifoldModel& model, const SplineSolution& sol) {
  const auto* embedded = dynamic_cast<const EmbeddedModel*>(&model);
  const int d = model.dof_count();
  std::ostringstream os;
  os << "k,t";
  for (int i = 0; i < d; ++i) os << ",c" << i;
  if (embedded)
    for (int i = 0; i < embedded->parameterization().embed_dim; ++i) os << ",e" << i;
  os << "\n";
  const int K = sol.path.K;
  for (int k = 0; k <= K; ++k) {
    os << k << ',' << format_double(static_cast<double>(k) / K);
    for (int i = 0; i < d; ++i) os << ',' << format_double(sol.path.points[k][i]);
    if (embedded) {
      const Vec e = embedded->parameterization().phi(sol.path.points[k]);
      for (int i = 0; i < e.size(); ++i) os << ',' << format_double(e[i]);
    }
    os << "\n";
  }
  return os.str();
}

std::string diagnostics_csv(const SplineSolution& sol) {
  std::ostringstream os;
  os << "k,segment_energy\n";
  for (std::size_t k = 0; k < sol.segment_diagnostics.size(); ++k)
    os << (k + 1) << ',' << format_double(sol.segment_diagnostics[k]) << "\n";
  return os.str();
}

std::string run_report_json(const ParsedProblem& parsed, const SplineSolution& sol,
                            const std::string& command) {
  json j;
  j["tool"] = {{"name", "riemspline"}, {"version", "0.1.0"}};
  j["command"] = command;
  j["manifold"] = json::parse(parsed.manifold_json);
  j["K"] = sol.path.K;
  j["sigma"] = sol.sigma;
  switch (sol.path.bc) {
    case BoundaryKind::natural: j["boundary"] = "natural"; break;
    case BoundaryKind::hermite: j["boundary"] = "hermite"; break;
    case BoundaryKind::periodic: j["boundary"] = "periodic"; break;
  }
  j["energies"] = {{"path", sol.path_energy},
                   {"spline", sol.spline_energy},
                   {"regularized", sol.regularized_energy}};
  j["diagnostics"] = sol.segment_diagnostics;
  j["telemetry"] = {{"iterations", sol.telemetry.iterations},
                    {"evaluations", sol.telemetry.evaluations},
                    {"final_grad_norm", sol.telemetry.final_grad_norm},
                    {"max_midpoint_residual", sol.telemetry.max_midpoint_residual},
                    {"converged", sol.telemetry.converged},
                    {"stop_reason", sol.telemetry.stop_reason},
                    {"seconds", sol.telemetry.seconds}};
  return j.dump(2) + "\n";
}

std::string rod_solution_svg(const ManifoldModel& model, const SplineSolution& sol,
                             const std::vector<int>& keyframe_indices) {
  const auto* rod = dynamic_cast<const RodModel*>(&model);
  if (!rod) throw InputError("SVG output requires the rod backend");
  if (sol.path.points.empty()) throw InputError("empty solution, nothing to render");
  const int samples = 256;
  std::vector<Mat> lines;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : sol.path.points) {
    Mat line = rod->sample_polyline(p, samples);
    xmin = std::min(xmin, line.col(0).minCoeff());
    xmax = std::max(xmax, line.col(0).maxCoeff());
    ymin = std::min(ymin, line.col(1).minCoeff());
    ymax = std::max(ymax, line.col(1).maxCoeff());
    lines.push_back(std::move(line));
  }
  const double margin = 0.05 * std::max(xmax - xmin, ymax - ymin);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
     << format_double(xmin - margin) << ' ' << format_double(ymin - margin) << ' '
     << format_double(xmax - xmin + 2 * margin) << ' '
     << format_double(ymax - ymin + 2 * margin) << "\">\n";
  const double stroke = 0.004 * std::max(xmax - xmin, ymax - ymin);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const bool key =
        std::find(keyframe_indices.begin(), keyframe_indices.end(), static_cast<int>(k)) !=
        keyframe_indices.end();
    os << "<polyline fill=\"none\" stroke=\"" << (key ? "#ff8c00" : "#9a9a9a")
       << "\" stroke-width=\"" << format_double(key ? 2.0 * stroke : stroke)
       << "\" points=\"";
    for (int i = 0; i < lines[k].rows(); ++i) {
      if (i) os << ' ';
      // SVG y axis points down.
      os << format_double(lines[k](i, 0)) << ',' << format_double(-lines[k](i, 1));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_obj_sequence(const std::filesystem::path& dir, const ManifoldModel& model,
                        const SplineSolution& sol) {
  const auto* shell = dynamic_cast<const ShellModel*>(&model);
  if (!shell) throw InputError("OBJ sequence output requires the shell backend");
  if (sol.path.points.empty()) throw InputError("empty solution, nothing to render");
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < sol.path.points.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.obj", k);
    write_obj((dir / name).string(), shell->to_positions(sol.path.points[k]),
              shell->triangles());
  }
}

void emit_solution(const std::filesystem::path& out_dir, const ParsedProblem& parsed,
                   const SplineSolution& sol, const std::string& command) {
  std::filesystem::create_directories(out_dir);
  if (parsed.output.curve_csv)
    atomic_write(out_dir / "curve.csv", curve_csv(*parsed.model, sol));
  if (parsed.output.diagnostics_csv)
    atomic_write(out_dir / "diagnostics.csv", diagnostics_csv(sol));
  if (parsed.output.report)
    atomic_write(out_dir / "report.json", run_report_json(parsed, sol, command));
  if (parsed.output.svg) {
    std::vector<int> keys;
    for (double t : parsed.problem.times)
      keys.push_back(static_cast<int>(std::llround(t * sol.path.K)));
    atomic_write(out_dir / "curve.svg", rod_solution_svg(*parsed.model, sol, keys));
  }
  if (parsed.output.obj_sequence) write_obj_sequence(out_dir / "frames", *parsed.model, sol);
}

}  // namespace riemspline
