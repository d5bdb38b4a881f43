// Command-line front end: score a pair of PLY clouds, benchmark a manifest
// against subjective scores, or fit predictor weights.

#include <omp.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pointpca/calibration.hpp"
#include "pointpca/ply_io.hpp"
#include "pointpca/quality.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pointpca;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CliOptions {
  double radius_factor = 0.01;
  std::size_t k = 25;
  std::string method = "rd1";
  std::string color_space = "y";
  std::string weights = "equal";
  std::optional<double> omega;
  int threads = 0;
  std::string output;
  std::string format = "csv";
  std::string cache;
  std::uint64_t seed = 0;
  bool strict = false;

  PipelineConfig pipeline() const {
    PipelineConfig cfg;
    cfg.radius_factor = radius_factor;
    cfg.k = k;
    cfg.method = compare_method_from_string(method);
    cfg.color_space = color_space_from_string(color_space);
    return cfg;
  }
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--radius-factor", opt.radius_factor,
                  "Support radius as a fraction of the reference bounding-box "
                  "max side")
      ->default_val(0.01)
      ->check(CLI::PositiveNumber)
      ->envname("POINTPCA_RADIUS_FACTOR");
  cmd->add_option("--k", opt.k, "Neighborhood size for statistical features")
      ->default_val(25)
      ->check(CLI::PositiveNumber)
      ->envname("POINTPCA_K");
  cmd->add_option("--method", opt.method, "Feature comparison method")
      ->default_val("rd1")
      ->check(CLI::IsMember({"rd1", "rd2", "rd3", "rd4", "ad", "sd"}))
      ->envname("POINTPCA_METHOD");
  cmd->add_option("--color-space", opt.color_space,
                  "Color space for the textural descriptor")
      ->default_val("y")
      ->check(CLI::IsMember({"y", "ycbcr", "rgb", "cielab"}))
      ->envname("POINTPCA_COLOR_SPACE");
  cmd->add_option("--weights", opt.weights,
                  "'equal' or a path to a weight file")
      ->default_val("equal")
      ->envname("POINTPCA_WEIGHTS");
  cmd->add_option("--omega", opt.omega,
                  "Blend factor between geometry and texture scores")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("POINTPCA_OMEGA");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = default)")
      ->default_val(0)
      ->envname("POINTPCA_THREADS");
  cmd->add_option("--output", opt.output, "Report path (default: stdout)")
      ->envname("POINTPCA_OUTPUT");
  cmd->add_option("--format", opt.format, "Report format")
      ->default_val("csv")
      ->check(CLI::IsMember({"csv", "json"}))
      ->envname("POINTPCA_FORMAT");
  cmd->add_option("--cache", opt.cache, "Predictor cache directory")
      ->envname("POINTPCA_CACHE");
  cmd->add_option("--seed", opt.seed, "Seed for sampled leave-p-out splits")
      ->default_val(0)
      ->envname("POINTPCA_SEED");
  cmd->add_flag("--strict", opt.strict,
                "Reject weight files whose sum drifts from 1 instead of "
                "renormalizing")
      ->envname("POINTPCA_STRICT");
}

void apply_threads(const CliOptions& opt) {
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
}

bool is_distance_method(CompareMethod m) {
  return m == CompareMethod::AD || m == CompareMethod::SD ||
         m == CompareMethod::RD1 || m == CompareMethod::RD3;
}

// ---------------------------------------------------------------- caching

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hash_file(const std::string& path, std::uint64_t h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

std::string cache_key(const std::string& ref, const std::string& dist,
                      const CliOptions& opt) {
  std::uint64_t h = 1469598103934665603ull;
  h = hash_file(ref, h);
  h = hash_file(dist, h);
  const std::string cfg = opt.method + "|" + opt.color_space + "|" +
                          fmt(opt.radius_factor) + "|" +
                          std::to_string(opt.k);
  h = fnv1a(cfg.data(), cfg.size(), h);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

PredictorResult compute_with_cache(const std::string& ref_path,
                                   const std::string& dist_path,
                                   const CliOptions& opt) {
  std::string entry;
  if (!opt.cache.empty()) {
    fs::create_directories(opt.cache);
    entry = (fs::path(opt.cache) / (cache_key(ref_path, dist_path, opt) +
                                    ".json"))
                .string();
    std::ifstream in(entry);
    if (in) {
      json j = json::parse(in);
      PredictorResult r;
      for (int i = 0; i < kFeatureCount; ++i) {
        r.symmetric[i] = j["symmetric"][i].get<double>();
        r.dist_to_ref[i] = j["dist_to_ref"][i].get<double>();
        r.ref_to_dist[i] = j["ref_to_dist"][i].get<double>();
      }
      r.radius = j["radius"].get<double>();
      r.has_texture = j["has_texture"].get<bool>();
      return r;
    }
  }

  const PointCloud ref = load_ply(ref_path);
  const PointCloud dist = load_ply(dist_path);
  const PredictorResult r = compute_predictors(ref, dist, opt.pipeline());

  if (!entry.empty()) {
    json j;
    j["symmetric"] = r.symmetric;
    j["dist_to_ref"] = r.dist_to_ref;
    j["ref_to_dist"] = r.ref_to_dist;
    j["radius"] = r.radius;
    j["has_texture"] = r.has_texture;
    std::ofstream out(entry);
    out << j.dump();
  }
  return r;
}

// ---------------------------------------------------------------- scoring

struct Scores {
  QualityScore q_g;
  std::optional<QualityScore> q_t;
  QualityScore final_score;
  std::string weights_source;
};

Scores score_predictors(const PredictorResult& r, const CliOptions& opt) {
  Scores s;
  s.q_g = combine(r.symmetric, default_weights(Domain::Geometry, true), "g");
  if (r.has_texture) {
    s.q_t = combine(r.symmetric, default_weights(Domain::Texture, true), "t");
  }

  if (opt.omega) {
    if (!s.q_t) {
      throw std::runtime_error(
          "--omega requires texture on both clouds (colorless input)");
    }
    s.final_score = blend(s.q_g, *s.q_t, *opt.omega);
    s.weights_source = "equal+blend";
    return s;
  }

  WeightVector w;
  if (opt.weights == "equal") {
    w = default_weights(r.has_texture ? Domain::GeometryTexture
                                      : Domain::Geometry,
                        r.has_texture);
    s.weights_source = "equal";
  } else {
    w = load_weights(opt.weights, opt.strict);
    if (!r.has_texture) {
      bool touches_texture = false;
      for (int j = 0; j < kFeatureCount; ++j) {
        if (w.selected[j] && is_texture_feature(j) && w.weights[j] > 0.0) {
          touches_texture = true;
        }
      }
      if (touches_texture) {
        throw std::runtime_error(
            "weight file assigns weight to texture predictors but the input "
            "has no color");
      }
    }
    s.weights_source = opt.weights;
  }
  s.final_score =
      combine(r.symmetric, w, r.has_texture ? "g+t" : "g");
  return s;
}

// ---------------------------------------------------------------- reports

void write_out(const std::string& text, const CliOptions& opt) {
  if (opt.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opt.output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + opt.output + "'");
    out << text;
  }
}

std::string compare_report_csv(const PredictorResult& r, const Scores& s,
                               const CliOptions& opt) {
  std::ostringstream out;
  out << "# pointpca-report-v1\n";
  out << "# layout,pointpca-v1\n";
  out << "# method," << opt.method << "\n";
  out << "# polarity,"
      << (is_distance_method(compare_method_from_string(opt.method))
              ? "distance"
              : "similarity")
      << "\n";
  out << "# k," << opt.k << "\n";
  out << "# radius_factor," << fmt(opt.radius_factor) << "\n";
  out << "# radius," << fmt(r.radius) << "\n";
  out << "# color_space," << opt.color_space << "\n";
  out << "# weights," << s.weights_source << "\n";
  if (opt.omega) out << "# omega," << fmt(*opt.omega) << "\n";
  out << "# texture," << (r.has_texture ? "present" : "absent") << "\n";

  out << "direction";
  for (int j = 1; j <= kFeatureCount; ++j) {
    char col[8];
    std::snprintf(col, sizeof(col), ",s_%02d", j);
    out << col;
  }
  out << "\n";
  auto row = [&](const char* name, const FeatureVector& v) {
    out << name;
    for (int j = 0; j < kFeatureCount; ++j) out << ',' << fmt(v[j]);
    out << "\n";
  };
  row("dist_to_ref", r.dist_to_ref);
  row("ref_to_dist", r.ref_to_dist);
  row("symmetric", r.symmetric);

  out << "score,q_g," << fmt(s.q_g.value) << "\n";
  if (s.q_t) out << "score,q_t," << fmt(s.q_t->value) << "\n";
  out << "score,final," << fmt(s.final_score.value) << "\n";
  return out.str();
}

std::string compare_report_json(const PredictorResult& r, const Scores& s,
                                const CliOptions& opt) {
  json j;
  j["report"] = "pointpca-report-v1";
  j["layout"] = "pointpca-v1";
  json cfg;
  cfg["method"] = opt.method;
  cfg["polarity"] =
      is_distance_method(compare_method_from_string(opt.method))
          ? "distance"
          : "similarity";
  cfg["k"] = opt.k;
  cfg["radius_factor"] = opt.radius_factor;
  cfg["radius"] = r.radius;
  cfg["color_space"] = opt.color_space;
  cfg["weights"] = s.weights_source;
  if (opt.omega) cfg["omega"] = *opt.omega;
  cfg["texture"] = r.has_texture ? "present" : "absent";
  j["config"] = cfg;
  j["predictors"]["dist_to_ref"] = r.dist_to_ref;
  j["predictors"]["ref_to_dist"] = r.ref_to_dist;
  j["predictors"]["symmetric"] = r.symmetric;
  j["scores"]["q_g"] = s.q_g.value;
  if (s.q_t) j["scores"]["q_t"] = s.q_t->value;
  j["scores"]["final"] = s.final_score.value;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- commands

int cmd_compare(const std::string& ref_path, const std::string& dist_path,
                const CliOptions& opt) {
  apply_threads(opt);
  const PredictorResult r = compute_with_cache(ref_path, dist_path, opt);
  if (!r.has_texture) {
    std::cerr << "notice: colorless input; texture predictors omitted, "
                 "geometry-only score reported\n";
  }
  const Scores s = score_predictors(r, opt);
  write_out(opt.format == "json" ? compare_report_json(r, s, opt)
                                 : compare_report_csv(r, s, opt),
            opt);
  return 0;
}

std::vector<BenchmarkRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "content_id,reference_path,distorted_path,mos") {
    throw std::runtime_error(
        "manifest header must be "
        "'content_id,reference_path,distorted_path,mos'");
  }
  std::vector<BenchmarkRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    BenchmarkRecord rec;
    std::string mos;
    if (!std::getline(ls, rec.content_id, ',') ||
        !std::getline(ls, rec.reference_path, ',') ||
        !std::getline(ls, rec.distorted_path, ',') ||
        !std::getline(ls, mos)) {
      throw std::runtime_error("malformed manifest line: " + line);
    }
    rec.mos = std::stod(mos);
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw std::runtime_error("manifest has no records");
  return records;
}

void fill_predictors(std::vector<BenchmarkRecord>& records,
                     const CliOptions& opt, bool& any_texture,
                     std::vector<std::string>& failures) {
  any_texture = true;
  for (auto& rec : records) {
    try {
      const PredictorResult r =
          compute_with_cache(rec.reference_path, rec.distorted_path, opt);
      rec.predictors = r.symmetric;
      any_texture = any_texture && r.has_texture;
    } catch (const std::exception& e) {
      failures.push_back(rec.distorted_path + ": " + e.what());
    }
  }
}

int cmd_benchmark(const std::string& manifest_path, const CliOptions& opt) {
  apply_threads(opt);
  auto records = read_manifest(manifest_path);
  if (records.size() < 5) {
    throw std::runtime_error(
        "benchmark needs at least 5 records for the regression");
  }
  bool texture = false;
  std::vector<std::string> failures;
  fill_predictors(records, opt, texture, failures);
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "error: " << f << "\n";
    return 1;
  }

  std::vector<double> mos(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) mos[i] = records[i].mos;

  // Fused score per record.
  std::vector<double> pqs(records.size());
  CliOptions score_opt = opt;
  for (std::size_t i = 0; i < records.size(); ++i) {
    PredictorResult r;
    r.symmetric = records[i].predictors;
    r.has_texture = texture;
    pqs[i] = score_predictors(r, score_opt).final_score.value;
  }

  std::ostringstream out;
  out << "# pointpca-benchmark-v1\n";
  out << "# layout,pointpca-v1\n";
  out << "# method," << opt.method << "\n";
  out << "# k," << opt.k << "\n";
  out << "# radius_factor," << fmt(opt.radius_factor) << "\n";
  out << "# color_space," << opt.color_space << "\n";
  out << "# weights," << opt.weights << "\n";
  out << "# records," << records.size() << "\n";
  out << "predictor,plcc,srocc,rmse\n";

  std::vector<double> col(records.size());
  for (int j = 0; j < kFeatureCount; ++j) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      col[i] = records[i].predictors[j];
    }
    char name[8];
    std::snprintf(name, sizeof(name), "s_%02d", j + 1);
    try {
      const LogisticModel f = fit_logistic(col, mos);
      std::vector<double> pmos(col.size());
      for (std::size_t i = 0; i < col.size(); ++i) pmos[i] = f(col[i]);
      out << name << ',' << fmt(plcc(pmos, mos)) << ','
          << fmt(srocc(col, mos)) << ',' << fmt(rmse(pmos, mos)) << "\n";
    } catch (const std::exception&) {
      out << name << ",nan,nan,nan\n";
    }
  }

  const LogisticModel f = fit_logistic(pqs, mos);
  std::vector<double> pmos(pqs.size());
  for (std::size_t i = 0; i < pqs.size(); ++i) pmos[i] = f(pqs[i]);
  out << "fused," << fmt(plcc(pmos, mos)) << ',' << fmt(srocc(pqs, mos))
      << ',' << fmt(rmse(pmos, mos)) << "\n";
  write_out(out.str(), opt);

  // Scatter data mirroring the plotted quantities.
  std::ostringstream scatter;
  scatter << "content_id,pqs,pmos,mos\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    scatter << records[i].content_id << ',' << fmt(pqs[i]) << ','
            << fmt(pmos[i]) << ',' << fmt(mos[i]) << "\n";
  }
  if (opt.output.empty()) {
    std::cout << scatter.str();
  } else {
    std::ofstream sout(opt.output + ".scatter.csv", std::ios::binary);
    sout << scatter.str();
  }
  return 0;
}

int cmd_fit_weights(const std::string& manifest_path,
                    const std::string& out_path, const std::string& domain,
                    const CliOptions& opt) {
  apply_threads(opt);
  auto records = read_manifest(manifest_path);
  bool texture = false;
  std::vector<std::string> failures;
  fill_predictors(records, opt, texture, failures);
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "error: " << f << "\n";
    return 1;
  }

  Domain dom = domain_from_string(domain);
  if (dom != Domain::Geometry && !texture) {
    std::cerr << "notice: colorless records; restricting selection to "
                 "geometry predictors\n";
    dom = Domain::Geometry;
  }
  const WeightVector sel = default_weights(dom, texture);

  const auto result = leave_p_out(records, sel.selected, 10000, opt.seed);
  save_weights(result.weights, out_path);

  std::cout << "splits," << result.split_count
            << (result.sampled ? " (sampled, seed=" + std::to_string(result.seed) + ")"
                               : "")
            << "\n";
  for (std::size_t i = 0; i < result.split_objectives.size(); ++i) {
    std::cout << "half_objective," << i << ',' << fmt(result.split_objectives[i])
              << "\n";
  }
  double avg = 0.0;
  for (double o : result.split_objectives) avg += o;
  avg /= result.split_objectives.empty() ? 1.0
                                         : result.split_objectives.size();
  std::cout << "average_objective," << fmt(avg) << "\n";
  std::cout << "weights_written," << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PointPCA: full-reference point cloud quality metric"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string ref_path, dist_path, manifest_path, weights_out;
  std::string domain = "g+t";

  auto* compare =
      app.add_subcommand("compare", "Score a distorted cloud against its reference");
  compare->add_option("reference", ref_path, "Reference PLY")->required();
  compare->add_option("distorted", dist_path, "Distorted PLY")->required();
  add_common_flags(compare, opt);

  auto* benchmark = app.add_subcommand(
      "benchmark", "Run a manifest of stimuli and report correlation indexes");
  benchmark->add_option("manifest", manifest_path, "Manifest CSV")->required();
  add_common_flags(benchmark, opt);

  auto* fit = app.add_subcommand(
      "fit-weights", "Learn predictor weights with content-disjoint leave-p-out");
  fit->add_option("manifest", manifest_path, "Manifest CSV")->required();
  fit->add_option("out", weights_out, "Output weight file")->required();
  fit->add_option("--domain", domain, "Predictor domain")
      ->default_val("g+t")
      ->check(CLI::IsMember({"g", "t", "g+t"}))
      ->envname("POINTPCA_DOMAIN");
  add_common_flags(fit, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (compare->parsed()) return cmd_compare(ref_path, dist_path, opt);
    if (benchmark->parsed()) return cmd_benchmark(manifest_path, opt);
    if (fit->parsed())
      return cmd_fit_weights(manifest_path, weights_out, domain, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
