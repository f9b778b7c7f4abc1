#ifndef RIEMSPLINE_IO_HPP
#define RIEMSPLINE_IO_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "riemspline/solver.hpp"

namespace riemspline {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };
LogLevel log_level();  // from RIEMSPLINE_LOG
void log_message(LogLevel level, const std::string& msg);

struct OutputSpec {
  bool curve_csv = true;
  bool diagnostics_csv = true;
  bool report = true;
  bool svg = false;           // rods
  bool obj_sequence = false;  // shells
};

/// A parsed problem file: the manifold backend, the interpolation task, and
/// what to emit. `t_raw` keeps the time fields as written (decimal or exact
/// fraction) so serialization round-trips.
struct ParsedProblem {
  std::shared_ptr<ManifoldModel> model;
  InterpolationProblem problem;
  OutputSpec output;
  std::vector<std::string> t_raw;
  std::string manifold_json;  // canonical manifold block
};

ParsedProblem parse_problem_file(const std::filesystem::path& path);
ParsedProblem parse_problem_json(const std::string& text,
                                 const std::filesystem::path& base_dir);
std::string serialize_problem(const ParsedProblem& parsed);

/// Write-temp-then-rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string curve_csv(const ManifoldModel& model, const SplineSolution& sol);
std::string diagnostics_csv(const SplineSolution& sol);
std::string run_report_json(const ParsedProblem& parsed, const SplineSolution& sol,
                            const std::string& command);

/// One polyline per time step; interpolation keyframes stroked distinctly.
std::string rod_solution_svg(const ManifoldModel& model, const SplineSolution& sol,
                             const std::vector<int>& keyframe_indices);
void write_obj_sequence(const std::filesystem::path& dir, const ManifoldModel& model,
                        const SplineSolution& sol);

/// Emits everything requested by the output spec into `out_dir`.
void emit_solution(const std::filesystem::path& out_dir, const ParsedProblem& parsed,
                   const SplineSolution& sol, const std::string& command);

/// Parses a time field that is either a decimal or an exact fraction "a/b";
/// checks K-divisibility exactly for fractions.
double parse_time_value(const std::string& raw, int K);

/// Reads a closed polygon CSV of x,y rows.
Mat read_polygon_csv(const std::filesystem::path& path);

}  // namespace riemspline

#endif
