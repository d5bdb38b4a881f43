// End-to-end tests that drive the installed command-line binary. The binary
// path is injected by the build as POINTPCA_CLI_BIN.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pointpca/ply_io.hpp"
#include "pointpca/quality.hpp"
#include "test_support.hpp"

using namespace pointpca;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() /
                       ("ppca_cli_out_" + std::to_string(counter) + ".txt");
  const fs::path err = fs::temp_directory_path() /
                       ("ppca_cli_err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(POINTPCA_CLI_BIN) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "ppca_cli_work";
  fs::create_directories(dir);
  return dir;
}

// Reference cloud plus jittered variants used across the test cases.
fs::path make_ref() {
  const fs::path p = work_dir() / "ref.ply";
  save_ply(pointpca::testing::random_cloud(150, 400), p.string(),
           PlyFormat::BinaryLittleEndian);
  return p;
}

fs::path make_distorted(double sigma, std::uint64_t seed, const char* name) {
  PointCloud cloud = pointpca::testing::random_cloud(150, 400);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  for (auto& p : cloud.positions) p += Vec3{g(rng), g(rng), g(rng)};
  for (auto& c : cloud.colors) {
    for (int a = 0; a < 3; ++a) {
      c[a] = std::min(255.0, std::max(0.0, c[a] + g(rng) * 100.0));
    }
  }
  const fs::path p = work_dir() / name;
  save_ply(cloud, p.string(), PlyFormat::BinaryLittleEndian);
  return p;
}

// Parses "score,<name>,<value>" from a CSV report.
double score_of(const std::string& report, const std::string& name) {
  std::istringstream in(report);
  std::string line;
  const std::string prefix = "score," + name + ",";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return std::stod(line.substr(prefix.size()));
  }
  FAIL("score row not found: ", name);
  return 0.0;
}

const std::string kFlags = " --radius-factor 0.3 --k 7";

}  // namespace

TEST_CASE("compare of a cloud with itself scores zero") {
  const fs::path ref = make_ref();
  const RunResult r =
      run_cli("compare " + ref.string() + " " + ref.string() + kFlags);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.rfind("# pointpca-report-v1", 0) == 0);
  CHECK(score_of(r.out, "q_g") == 0.0);
  CHECK(score_of(r.out, "q_t") == 0.0);
  CHECK(score_of(r.out, "final") == 0.0);
}

TEST_CASE("omega blends the domain scores reported by the same run") {
  const fs::path ref = make_ref();
  const fs::path dist = make_distorted(0.01, 7, "dist_omega.ply");

  const RunResult base =
      run_cli("compare " + ref.string() + " " + dist.string() + kFlags);
  REQUIRE(base.exit_code == 0);
  const double q_g = score_of(base.out, "q_g");
  const double q_t = score_of(base.out, "q_t");
  CHECK(q_g > 0.0);
  CHECK(q_t > 0.0);

  const RunResult blended = run_cli("compare " + ref.string() + " " +
                                    dist.string() + kFlags + " --omega 0.25");
  REQUIRE(blended.exit_code == 0);
  CHECK(score_of(blended.out, "final") ==
        doctest::Approx(0.25 * q_g + 0.75 * q_t).epsilon(1e-12));

  // Default weighting differs from the blend in general.
  CHECK(score_of(base.out, "final") ==
        doctest::Approx((30.0 * q_g + 2.0 * q_t) / 32.0).epsilon(1e-9));
}

TEST_CASE("json report carries the same scores as csv") {
  const fs::path ref = make_ref();
  const fs::path dist = make_distorted(0.01, 7, "dist_json.ply");
  const RunResult csv =
      run_cli("compare " + ref.string() + " " + dist.string() + kFlags);
  const RunResult js = run_cli("compare " + ref.string() + " " +
                               dist.string() + kFlags + " --format json");
  REQUIRE(csv.exit_code == 0);
  REQUIRE(js.exit_code == 0);
  // Avoid a JSON dependency: locate the final score field textually.
  const double want = score_of(csv.out, "final");
  std::ostringstream needle;
  needle << "\"final\": ";
  const auto pos = js.out.find(needle.str());
  REQUIRE(pos != std::string::npos);
  const double got = std::stod(js.out.substr(pos + needle.str().size()));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("predictor cache returns byte-identical reports") {
  const fs::path ref = make_ref();
  const fs::path dist = make_distorted(0.02, 9, "dist_cache.ply");
  const fs::path cache = work_dir() / "cache";
  fs::remove_all(cache);

  const std::string cmd = "compare " + ref.string() + " " + dist.string() +
                          kFlags + " --cache " + cache.string();
  const RunResult cold = run_cli(cmd);
  REQUIRE(cold.exit_code == 0);
  REQUIRE(fs::exists(cache));
  CHECK(std::distance(fs::directory_iterator(cache),
                      fs::directory_iterator{}) == 1);
  const RunResult warm = run_cli(cmd);
  REQUIRE(warm.exit_code == 0);
  CHECK(warm.out == cold.out);

  // A different configuration must miss the cache, not reuse the entry.
  const RunResult other = run_cli("compare " + ref.string() + " " +
                                  dist.string() +
                                  " --radius-factor 0.4 --k 7 --cache " +
                                  cache.string());
  REQUIRE(other.exit_code == 0);
  CHECK(other.out != cold.out);
  CHECK(std::distance(fs::directory_iterator(cache),
                      fs::directory_iterator{}) == 2);
}

TEST_CASE("colorless input downgrades to a geometry-only score") {
  PointCloud bare = pointpca::testing::random_cloud(100, 31, false);
  const fs::path a = work_dir() / "bare_a.ply";
  save_ply(bare, a.string(), PlyFormat::Ascii);
  PointCloud moved = bare;
  for (auto& p : moved.positions) p += Vec3{0.005, 0.0, 0.0};
  const fs::path b = work_dir() / "bare_b.ply";
  save_ply(moved, b.string(), PlyFormat::Ascii);

  const RunResult r = run_cli("compare " + a.string() + " " + b.string() + kFlags);
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("notice: colorless input") != std::string::npos);
  CHECK(r.out.find("score,q_t,") == std::string::npos);
  CHECK(r.out.find("# texture,absent") != std::string::npos);

  // Blending needs both domains.
  const RunResult blend_fail =
      run_cli("compare " + a.string() + " " + b.string() + kFlags + " --omega 0.5");
  CHECK(blend_fail.exit_code == 1);
  CHECK(blend_fail.err.find("error:") != std::string::npos);
}

TEST_CASE("missing input is a clean error") {
  const RunResult r = run_cli("compare /no/such.ply /no/other.ply");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("benchmark correlates perfectly with scores it produced itself") {
  const fs::path ref = make_ref();
  std::vector<fs::path> dists;
  for (int i = 0; i < 6; ++i) {
    const std::string name = "bench_" + std::to_string(i) + ".ply";
    dists.push_back(make_distorted(0.002 * (i + 1), 100 + i, name.c_str()));
  }

  auto write_manifest = [&](const fs::path& path,
                            const std::vector<double>& mos) {
    std::ofstream out(path);
    out << std::setprecision(17);
    out << "content_id,reference_path,distorted_path,mos\n";
    for (std::size_t i = 0; i < dists.size(); ++i) {
      out << "c" << i % 2 << ',' << ref.string() << ',' << dists[i].string()
          << ',' << mos[i] << "\n";
    }
  };

  // First pass with placeholder scores, only to harvest the fused pqs.
  const fs::path manifest = work_dir() / "manifest.csv";
  write_manifest(manifest, {1, 2, 3, 4, 5, 6});
  const fs::path report = work_dir() / "bench_report.csv";
  const RunResult first = run_cli("benchmark " + manifest.string() + kFlags +
                                  " --output " + report.string());
  REQUIRE(first.exit_code == 0);

  std::ifstream scatter(report.string() + ".scatter.csv");
  REQUIRE(scatter.good());
  std::string line;
  std::getline(scatter, line);
  CHECK(line == "content_id,pqs,pmos,mos");
  std::vector<double> pqs;
  while (std::getline(scatter, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    pqs.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  REQUIRE(pqs.size() == 6);

  // Second pass: subjective scores are an exact affine map of the fused
  // objective score, so the logistic regression should track them.
  std::vector<double> mos;
  for (double v : pqs) mos.push_back(2.0 * v + 1.0);
  write_manifest(manifest, mos);
  const RunResult second = run_cli("benchmark " + manifest.string() + kFlags +
                                   " --output " + report.string());
  REQUIRE(second.exit_code == 0);

  std::ifstream rep(report);
  bool found = false;
  while (std::getline(rep, line)) {
    if (line.rfind("fused,", 0) == 0) {
      std::istringstream ls(line.substr(6));
      std::string plcc_s, srocc_s, rmse_s;
      std::getline(ls, plcc_s, ',');
      std::getline(ls, srocc_s, ',');
      std::getline(ls, rmse_s, ',');
      CHECK(std::stod(plcc_s) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::stod(srocc_s) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::stod(rmse_s) < 1e-5);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("benchmark refuses tiny manifests") {
  const fs::path ref = make_ref();
  const fs::path dist = make_distorted(0.01, 7, "dist_tiny.ply");
  const fs::path manifest = work_dir() / "tiny.csv";
  {
    std::ofstream out(manifest);
    out << "content_id,reference_path,distorted_path,mos\n";
    out << "c0," << ref.string() << ',' << dist.string() << ",3.5\n";
  }
  const RunResult r = run_cli("benchmark " + manifest.string() + kFlags);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("at least 5 records") != std::string::npos);
}

TEST_CASE("fit-weights learns texture weights over two contents") {
  const fs::path ref = make_ref();
  const fs::path manifest = work_dir() / "fit.csv";
  {
    std::ofstream out(manifest);
    out << "content_id,reference_path,distorted_path,mos\n";
    for (int i = 0; i < 12; ++i) {
      const std::string name = "fit_" + std::to_string(i) + ".ply";
      const fs::path dist =
          make_distorted(0.001 * (i + 1), 200 + i, name.c_str());
      out << (i % 2 == 0 ? "ca" : "cb") << ',' << ref.string() << ','
          << dist.string() << ',' << 5.0 - 0.3 * i << "\n";
    }
  }
  const fs::path weights_path = work_dir() / "learned.txt";
  const RunResult r = run_cli("fit-weights " + manifest.string() + " " +
                              weights_path.string() + kFlags + " --domain t");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("splits,1") != std::string::npos);
  CHECK(r.out.find("average_objective,") != std::string::npos);
  CHECK(r.out.find("weights_written,") != std::string::npos);

  const WeightVector learned = load_weights(weights_path.string());
  CHECK(learned.selected_count() == 2);
  CHECK(learned.selected[15]);
  CHECK(learned.selected[31]);
  CHECK(learned.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit-weights rejects a single content") {
  const fs::path ref = make_ref();
  const fs::path manifest = work_dir() / "fit_single.csv";
  {
    std::ofstream out(manifest);
    out << "content_id,reference_path,distorted_path,mos\n";
    for (int i = 0; i < 8; ++i) {
      const std::string name = "fits_" + std::to_string(i) + ".ply";
      const fs::path dist =
          make_distorted(0.001 * (i + 1), 300 + i, name.c_str());
      out << "only," << ref.string() << ',' << dist.string() << ','
          << 5.0 - 0.3 * i << "\n";
    }
  }
  const RunResult r =
      run_cli("fit-weights " + manifest.string() + " " +
              (work_dir() / "w.txt").string() + kFlags + " --domain t");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}
