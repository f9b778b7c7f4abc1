#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

const fs::path kWorkDir = RIEMSPLINE_TEST_DIR;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RIEMSPLINE_CLI_PATH) + " " + args + " 2> " +
                          (kWorkDir / "stderr.txt").string() + " > " +
                          (kWorkDir / "stdout.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
}

const char* kSphereDemo = R"({
  "manifold": {"type": "sphere", "radius": 1.0},
  "K": 32,
  "sigma": 0.0,
  "boundary": {"type": "natural"},
  "interpolation": [
    {"t": "0", "point": [1.1, 0.2]},
    {"t": "1/2", "point": [1.9, 1.2]},
    {"t": "1", "point": [1.2, 2.3]}
  ]
})";

}  // namespace

TEST_CASE("spline command: convergence, outputs, determinism") {
  fs::remove_all(kWorkDir);
  fs::create_directories(kWorkDir);
  const fs::path problem = kWorkDir / "sphere.json";
  write_file(problem, kSphereDemo);

  const fs::path out1 = kWorkDir / "run1";
  const fs::path out2 = kWorkDir / "run2";
  CHECK(run_cli("spline --problem " + problem.string() + " --out " + out1.string()) == 0);
  CHECK(run_cli("spline --problem " + problem.string() + " --out " + out2.string()) == 0);

  const std::string curve1 = slurp(out1 / "curve.csv");
  const std::string curve2 = slurp(out2 / "curve.csv");
  CHECK(curve1 == curve2);  // byte-identical reruns
  int rows = -1;            // header discounted
  for (char c : curve1)
    if (c == '\n') ++rows;
  CHECK(rows == 33);
  CHECK(fs::exists(out1 / "diagnostics.csv"));
  CHECK(fs::exists(out1 / "report.json"));
}

TEST_CASE("geodesic command exits cleanly") {
  const fs::path problem = kWorkDir / "sphere.json";
  write_file(problem, kSphereDemo);
  CHECK(run_cli("geodesic --problem " + problem.string() + " --out " +
                (kWorkDir / "geo").string()) == 0);
}

TEST_CASE("malformed interpolation time yields exit 2 naming the violation") {
  const fs::path problem = kWorkDir / "bad.json";
  write_file(problem, R"({
    "manifold": {"type": "sphere", "radius": 1.0},
    "K": 32,
    "interpolation": [
      {"t": "1/3", "point": [1.1, 0.2]},
      {"t": "1", "point": [1.2, 2.3]}
    ]
  })");
  CHECK(run_cli("spline --problem " + problem.string() + " --out " +
                (kWorkDir / "bad_out").string()) == 2);
  CHECK(slurp(kWorkDir / "stderr.txt").find("integrality") != std::string::npos);
}

TEST_CASE("non-convergence is signalled with exit 3") {
  const fs::path problem = kWorkDir / "hard.json";
  write_file(problem, R"({
    "manifold": {"type": "sphere", "radius": 1.0},
    "K": 16,
    "sigma": 0.001,
    "interpolation": [
      {"t": "0", "point": [1.1, 0.2]},
      {"t": "1/2", "point": [1.9, 1.2]},
      {"t": "1", "point": [1.2, 2.3]}
    ],
    "solver": {"max_iters": 1, "tol_grad": 1e-16}
  })");
  CHECK(run_cli("spline --problem " + problem.string() + " --out " +
                (kWorkDir / "hard_out").string()) == 3);
}

TEST_CASE("nonexistence demo") {
  CHECK(run_cli("nonexistence --n-max 1000 --out " + (kWorkDir / "ne").string()) == 0);
  const std::string out = slurp(kWorkDir / "stdout.txt");
  CHECK(out.find("min winding energy") != std::string::npos);
  CHECK(fs::exists(kWorkDir / "ne" / "nonexistence.csv"));
  // Best-so-far energies in the emitted table are non-increasing.
  {
    std::ifstream table(kWorkDir / "ne" / "nonexistence.csv");
    std::string line;
    std::getline(table, line);  // header
    double prev = std::numeric_limits<double>::infinity();
    int data_rows = 0;
    while (std::getline(table, line)) {
      const auto last_comma = line.rfind(',');
      REQUIRE(last_comma != std::string::npos);
      const double best = std::stod(line.substr(last_comma + 1));
      CHECK(best <= prev);
      prev = best;
      ++data_rows;
    }
    CHECK(data_rows >= 3);
  }

  CHECK(run_cli("nonexistence --r 0.5 --n-max 10") == 0);
  CHECK(slurp(kWorkDir / "stdout.txt").find("rational") != std::string::npos);

  CHECK(run_cli("nonexistence --r 1.5 --n-max 10") == 2);
}

TEST_CASE("gradcheck passes clean and fails when corrupted") {
  CHECK(run_cli("gradcheck --paths 2 --seed 7") == 0);
  CHECK(run_cli("gradcheck --paths 1 --seed 7 --inject-derivative-bug") != 0);
}

TEST_CASE("convergence command on the exact Euclidean preset") {
  CHECK(run_cli("convergence --preset euclid3 --k-list 4,8,16 --sigma 0 --out " +
                (kWorkDir / "conv").string()) == 0);
  CHECK(fs::exists(kWorkDir / "conv" / "euclid3_rates.csv"));
  CHECK(slurp(kWorkDir / "stdout.txt").find("exact") != std::string::npos);
}

TEST_CASE("render emits only visual artifacts for rods") {
  // Three circles as polygon CSVs.
  for (int i = 0; i < 3; ++i) {
    std::ostringstream csv;
    const double r = 1.0 + 0.3 * i;
    for (int j = 0; j < 64; ++j) {
      const double a = 2.0 * M_PI * j / 64;
      csv << r * std::cos(a) << "," << r * std::sin(a) << "\n";
    }
    write_file(kWorkDir / ("circle" + std::to_string(i) + ".csv"), csv.str());
  }
  write_file(kWorkDir / "rod.json", R"({
    "manifold": {"type": "rod", "N": 3, "M": 16, "delta": 0.1},
    "K": 4,
    "sigma": 0.001,
    "interpolation": [
      {"t": "0", "csv": "circle0.csv"},
      {"t": "1/2", "csv": "circle1.csv"},
      {"t": "1", "csv": "circle2.csv"}
    ]
  })");
  CHECK(run_cli("render --problem " + (kWorkDir / "rod.json").string() + " --out " +
                (kWorkDir / "rod_render").string()) == 0);
  CHECK(fs::exists(kWorkDir / "rod_render" / "curve.svg"));
  CHECK_FALSE(fs::exists(kWorkDir / "rod_render" / "curve.csv"));
}
