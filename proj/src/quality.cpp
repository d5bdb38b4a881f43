#include "pointpca/quality.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pointpca {

Domain domain_from_string(const std::string& name) {
  if (name == "g") return Domain::Geometry;
  if (name == "t") return Domain::Texture;
  if (name == "g+t" || name == "gt" || name == "gut") {
    return Domain::GeometryTexture;
  }
  throw std::invalid_argument("unknown domain '" + name + "'");
}

std::string to_string(Domain domain) {
  switch (domain) {
    case Domain::Geometry:
      return "g";
    case Domain::Texture:
      return "t";
    case Domain::GeometryTexture:
      return "g+t";
  }
  return "?";
}

double WeightVector::sum() const {
  double s = 0.0;
  for (int j = 0; j < kFeatureCount; ++j) {
    if (selected[j]) s += weights[j];
  }
  return s;
}

int WeightVector::selected_count() const {
  int n = 0;
  for (bool b : selected) n += b;
  return n;
}

QualityScore combine(const FeatureVector& predictors,
                     const WeightVector& weights, const std::string& domain) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < kFeatureCount; ++j) {
    if (!weights.selected[j]) continue;
    const double w = weights.weights[j];
    if (!(w >= 0.0)) {
      throw std::invalid_argument("combine: negative weight");
    }
    num += w * predictors[j];
    den += w;
  }
  if (!(den > 0.0)) throw std::invalid_argument("combine: zero weight sum");
  return {num / den, domain};
}

QualityScore blend(const QualityScore& q_g, const QualityScore& q_t,
                   double omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw std::invalid_argument("blend: omega must lie in [0,1]");
  }
  return {omega * q_g.value + (1.0 - omega) * q_t.value, "blend"};
}

WeightVector default_weights(Domain domain, bool texture_available) {
  if (domain == Domain::Texture && !texture_available) {
    throw std::invalid_argument(
        "default_weights: texture domain requested on a colorless pair");
  }
  WeightVector w;
  for (int j = 0; j < kFeatureCount; ++j) {
    const bool texture = is_texture_feature(j);
    switch (domain) {
      case Domain::Geometry:
        w.selected[j] = !texture;
        break;
      case Domain::Texture:
        w.selected[j] = texture;
        break;
      case Domain::GeometryTexture:
        w.selected[j] = !texture || texture_available;
        break;
    }
  }
  const double equal = 1.0 / w.selected_count();
  for (int j = 0; j < kFeatureCount; ++j) {
    if (w.selected[j]) w.weights[j] = equal;
  }
  return w;
}

WeightVector load_weights(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_weights: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_weights: empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "# layout: pointpca-v1") {
    throw std::runtime_error(
        "load_weights: missing or unknown layout header (expected "
        "'# layout: pointpca-v1')");
  }

  WeightVector w;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int j;
    double value;
    ls >> j >> value;
    if (ls.fail() || j < 1 || j > kFeatureCount) {
      throw std::runtime_error("load_weights: malformed line '" + line + "'");
    }
    if (value < 0.0 || value > 1.0) {
      throw std::runtime_error("load_weights: weight outside [0,1] at index " +
                               std::to_string(j));
    }
    w.weights[j - 1] = value;
    w.selected[j - 1] = true;
  }
  if (w.selected_count() == 0) {
    throw std::runtime_error("load_weights: no weights in file");
  }
  const double total = w.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    if (strict) {
      throw std::runtime_error("load_weights: weights do not sum to 1");
    }
    std::fprintf(stderr,
                 "warning: weights in '%s' sum to %.9g; renormalizing\n",
                 path.c_str(), total);
    if (!(total > 0.0)) {
      throw std::runtime_error("load_weights: weight sum not positive");
    }
    for (int j = 0; j < kFeatureCount; ++j) {
      if (w.selected[j]) w.weights[j] /= total;
    }
  }
  return w;
}

void save_weights(const WeightVector& weights, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_weights: cannot open '" + path + "'");
  out << "# layout: pointpca-v1\n";
  char buf[48];
  for (int j = 0; j < kFeatureCount; ++j) {
    if (!weights.selected[j]) continue;
    std::snprintf(buf, sizeof(buf), "%d %.17g\n", j + 1, weights.weights[j]);
    out << buf;
  }
}

}  // namespace pointpca
