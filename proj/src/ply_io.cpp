#include "pointpca/ply_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace pointpca {

namespace {

enum class ScalarType {
  Int8,
  UInt8,
  Int16,
  UInt16,
  Int32,
  UInt32,
  Float32,
  Float64
};

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8:
      return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16:
      return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32:
      return 4;
    case ScalarType::Float64:
      return 8;
  }
  return 0;
}

ScalarType parse_scalar_type(const std::string& s, const std::string& prop) {
  if (s == "char" || s == "int8") return ScalarType::Int8;
  if (s == "uchar" || s == "uint8") return ScalarType::UInt8;
  if (s == "short" || s == "int16") return ScalarType::Int16;
  if (s == "ushort" || s == "uint16") return ScalarType::UInt16;
  if (s == "int" || s == "int32") return ScalarType::Int32;
  if (s == "uint" || s == "uint32") return ScalarType::UInt32;
  if (s == "float" || s == "float32") return ScalarType::Float32;
  if (s == "double" || s == "float64") return ScalarType::Float64;
  throw CloudError("load_ply: unsupported property type '" + s +
                   "' for property '" + prop + "'");
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float32;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  PlyFormat format = PlyFormat::Ascii;
  std::vector<Element> elements;
  std::streampos data_start;
};

Header parse_header(std::istream& in) {
  Header h;
  std::string line;
  if (!std::getline(in, line)) throw CloudError("load_ply: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw CloudError("load_ply: missing 'ply' magic");

  bool have_format = false;
  bool done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt == "ascii") {
        h.format = PlyFormat::Ascii;
      } else if (fmt == "binary_little_endian") {
        h.format = PlyFormat::BinaryLittleEndian;
      } else {
        throw CloudError("load_ply: unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (tok == "element") {
      Element e;
      ls >> e.name >> e.count;
      if (ls.fail()) throw CloudError("load_ply: malformed element line");
      h.elements.push_back(e);
    } else if (tok == "property") {
      if (h.elements.empty()) {
        throw CloudError("load_ply: property before any element");
      }
      std::string type;
      ls >> type;
      if (type == "list") {
        throw CloudError("load_ply: list properties are unsupported (element '" +
                         h.elements.back().name + "')");
      }
      Property p;
      ls >> p.name;
      if (ls.fail()) throw CloudError("load_ply: malformed property line");
      p.type = parse_scalar_type(type, p.name);
      h.elements.back().properties.push_back(p);
    } else if (tok == "end_header") {
      done = true;
      break;
    } else {
      throw CloudError("load_ply: unrecognized header token '" + tok + "'");
    }
  }
  if (!done) throw CloudError("load_ply: missing end_header");
  if (!have_format) throw CloudError("load_ply: missing format line");
  h.data_start = in.tellg();
  return h;
}

double read_binary_scalar(std::istream& in, ScalarType t) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), scalar_size(t));
  if (!in) throw CloudError("load_ply: unexpected end of binary data");
  auto le = [&](std::size_t n) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return v;
  };
  switch (t) {
    case ScalarType::Int8:
      return static_cast<double>(static_cast<std::int8_t>(buf[0]));
    case ScalarType::UInt8:
      return static_cast<double>(buf[0]);
    case ScalarType::Int16:
      return static_cast<double>(static_cast<std::int16_t>(le(2)));
    case ScalarType::UInt16:
      return static_cast<double>(static_cast<std::uint16_t>(le(2)));
    case ScalarType::Int32:
      return static_cast<double>(static_cast<std::int32_t>(le(4)));
    case ScalarType::UInt32:
      return static_cast<double>(static_cast<std::uint32_t>(le(4)));
    case ScalarType::Float32: {
      std::uint32_t v = static_cast<std::uint32_t>(le(4));
      float f;
      std::memcpy(&f, &v, 4);
      return static_cast<double>(f);
    }
    case ScalarType::Float64: {
      std::uint64_t v = le(8);
      double d;
      std::memcpy(&d, &v, 8);
      return d;
    }
  }
  return 0.0;
}

}  // namespace

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CloudError("load_ply: cannot open '" + path + "'");
  Header h = parse_header(in);

  const Element* vertex = nullptr;
  for (const auto& e : h.elements) {
    if (e.name == "vertex") {
      vertex = &e;
      break;
    }
    // Elements preceding the vertex data must be skipped byte-exactly;
    // they only contain scalars (lists were rejected in the header).
    if (h.format == PlyFormat::Ascii) {
      std::string line;
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!std::getline(in, line)) {
          throw CloudError("load_ply: truncated element '" + e.name + "'");
        }
      }
    } else {
      std::size_t row = 0;
      for (const auto& p : e.properties) row += scalar_size(p.type);
      in.seekg(static_cast<std::streamoff>(row * e.count), std::ios::cur);
    }
  }
  if (!vertex) throw CloudError("load_ply: no vertex element");

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
    const auto& p = vertex->properties[i];
    const int idx = static_cast<int>(i);
    if (p.name == "x") ix = idx;
    if (p.name == "y") iy = idx;
    if (p.name == "z") iz = idx;
    if (p.name == "red") ir = idx;
    if (p.name == "green") ig = idx;
    if (p.name == "blue") ib = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw CloudError("load_ply: vertex element lacks x/y/z properties");
  }
  const bool with_color = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud;
  cloud.positions.reserve(vertex->count);
  if (with_color) cloud.colors.reserve(vertex->count);

  std::vector<double> row(vertex->properties.size());
  for (std::size_t n = 0; n < vertex->count; ++n) {
    if (h.format == PlyFormat::Ascii) {
      std::string line;
      do {
        if (!std::getline(in, line)) {
          throw CloudError("load_ply: vertex count mismatch");
        }
      } while (line.find_first_not_of(" \t\r\n") == std::string::npos);
      std::istringstream ls(line);
      for (auto& v : row) {
        ls >> v;
        if (ls.fail()) throw CloudError("load_ply: malformed vertex line");
      }
    } else {
      for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] = read_binary_scalar(in, vertex->properties[i].type);
      }
    }
    cloud.positions.push_back({row[ix], row[iy], row[iz]});
    if (with_color) cloud.colors.push_back({row[ir], row[ig], row[ib]});
  }
  if (cloud.positions.empty()) throw CloudError("load_ply: empty vertex element");
  return cloud;
}

namespace {

std::uint8_t quantize_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

void append_le(std::string& out, const void* src, std::size_t n) {
  // Little-endian host assumed; asserted at build configuration time on the
  // supported platforms.
  out.append(reinterpret_cast<const char*>(src), n);
}

}  // namespace

void save_ply(const PointCloud& cloud, const std::string& path,
              PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CloudError("save_ply: cannot open '" + path + "' for writing");

  const bool with_color = cloud.has_colors();
  out << "ply\n";
  out << (format == PlyFormat::Ascii ? "format ascii 1.0\n"
                                     : "format binary_little_endian 1.0\n");
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (with_color) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";

  if (format == PlyFormat::Ascii) {
    char buf[96];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto& p = cloud.positions[i];
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", p.x, p.y, p.z);
      out << buf;
      if (with_color) {
        const auto& c = cloud.colors[i];
        out << ' ' << int(quantize_channel(c.x)) << ' '
            << int(quantize_channel(c.y)) << ' ' << int(quantize_channel(c.z));
      }
      out << '\n';
    }
  } else {
    std::string data;
    data.reserve(cloud.size() * (24 + (with_color ? 3 : 0)));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto& p = cloud.positions[i];
      append_le(data, &p.x, 8);
      append_le(data, &p.y, 8);
      append_le(data, &p.z, 8);
      if (with_color) {
        const auto& c = cloud.colors[i];
        std::uint8_t rgb[3] = {quantize_channel(c.x), quantize_channel(c.y),
                               quantize_channel(c.z)};
        data.append(reinterpret_cast<const char*>(rgb), 3);
      }
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  }
  if (!out) throw CloudError("save_ply: write failure on '" + path + "'");
}

}  // namespace pointpca
