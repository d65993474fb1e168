#include "pcqa/ply.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "pcqa/error.hpp"

namespace pcqa {

namespace {

enum class Scalar {
  kInt8,
  kUInt8,
  kInt16,
  kUInt16,
  kInt32,
  kUInt32,
  kFloat32,
  kFloat64
};

struct Property {
  Scalar type;
  std::string name;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
  bool has_list = false;
};

Scalar parse_scalar(const std::string& token, const std::string& where) {
  if (token == "char" || token == "int8") return Scalar::kInt8;
  if (token == "uchar" || token == "uint8") return Scalar::kUInt8;
  if (token == "short" || token == "int16") return Scalar::kInt16;
  if (token == "ushort" || token == "uint16") return Scalar::kUInt16;
  if (token == "int" || token == "int32") return Scalar::kInt32;
  if (token == "uint" || token == "uint32") return Scalar::kUInt32;
  if (token == "float" || token == "float32") return Scalar::kFloat32;
  if (token == "double" || token == "float64") return Scalar::kFloat64;
  throw InputError(where + ": unknown property type '" + token + "'");
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUInt8:
      return 1;
    case Scalar::kInt16:
    case Scalar::kUInt16:
      return 2;
    case Scalar::kInt32:
    case Scalar::kUInt32:
    case Scalar::kFloat32:
      return 4;
    case Scalar::kFloat64:
      return 8;
  }
  return 0;
}

double decode_scalar(Scalar type, const unsigned char* bytes) {
  // Little-endian payloads only; assemble integers explicitly so the reader
  // does not depend on host byte order.
  auto u16 = [&] {
    return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
  };
  auto u32 = [&] {
    return static_cast<std::uint32_t>(bytes[0]) |
           (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
  };
  switch (type) {
    case Scalar::kInt8:
      return static_cast<double>(static_cast<std::int8_t>(bytes[0]));
    case Scalar::kUInt8:
      return static_cast<double>(bytes[0]);
    case Scalar::kInt16:
      return static_cast<double>(static_cast<std::int16_t>(u16()));
    case Scalar::kUInt16:
      return static_cast<double>(u16());
    case Scalar::kInt32:
      return static_cast<double>(static_cast<std::int32_t>(u32()));
    case Scalar::kUInt32:
      return static_cast<double>(u32());
    case Scalar::kFloat32: {
      std::uint32_t raw = u32();
      float f;
      std::memcpy(&f, &raw, 4);
      return static_cast<double>(f);
    }
    case Scalar::kFloat64: {
      std::uint64_t raw = static_cast<std::uint64_t>(u32()) |
                          (static_cast<std::uint64_t>(bytes[4]) << 32) |
                          (static_cast<std::uint64_t>(bytes[5]) << 40) |
                          (static_cast<std::uint64_t>(bytes[6]) << 48) |
                          (static_cast<std::uint64_t>(bytes[7]) << 56);
      double d;
      std::memcpy(&d, &raw, 8);
      return d;
    }
  }
  return 0.0;
}

struct Header {
  PlyFormat format = PlyFormat::kAscii;
  std::vector<Element> elements;
};

Header parse_header(std::istream& in, const std::string& path, int& line_no) {
  Header header;
  std::string line;
  auto fail = [&](const std::string& msg) -> InputError {
    return InputError(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw fail("unexpected end of header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
  };

  next_line();
  if (line != "ply") throw fail("not a PLY file (missing 'ply' magic)");

  bool have_format = false;
  bool done = false;
  while (!done) {
    next_line();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) {
      continue;
    } else if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        header.format = PlyFormat::kAscii;
      } else if (fmt == "binary_little_endian") {
        header.format = PlyFormat::kBinaryLittleEndian;
      } else {
        throw fail("unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      if (!(ls >> e.name >> e.count)) throw fail("malformed element line");
      header.elements.push_back(e);
    } else if (keyword == "property") {
      if (header.elements.empty()) throw fail("property before any element");
      std::string type;
      ls >> type;
      Element& e = header.elements.back();
      if (type == "list") {
        e.has_list = true;
        continue;
      }
      Property p;
      p.type = parse_scalar(type, path + ":" + std::to_string(line_no));
      if (!(ls >> p.name)) throw fail("property without a name");
      e.properties.push_back(p);
    } else if (keyword == "end_header") {
      done = true;
    } else {
      throw fail("unknown header keyword '" + keyword + "'");
    }
  }
  if (!have_format) throw fail("header has no format line");
  return header;
}

}  // namespace

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");

  int line_no = 0;
  const Header header = parse_header(in, path, line_no);

  const Element* vertex = nullptr;
  for (const Element& e : header.elements) {
    if (e.name == "vertex") {
      vertex = &e;
      break;
    }
  }
  if (!vertex) throw InputError(path + ": no vertex element");
  if (vertex->has_list) {
    throw InputError(path + ": list properties on the vertex element are not supported");
  }

  // Slot per property: 0..2 xyz, 3..5 rgb, 6..8 normal, -1 skip.
  std::vector<int> slot(vertex->properties.size(), -1);
  std::array<bool, 9> present{};
  for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
    const Property& p = vertex->properties[i];
    int s = -1;
    if (p.name == "x") s = 0;
    else if (p.name == "y") s = 1;
    else if (p.name == "z") s = 2;
    else if (p.name == "red") s = 3;
    else if (p.name == "green") s = 4;
    else if (p.name == "blue") s = 5;
    else if (p.name == "nx") s = 6;
    else if (p.name == "ny") s = 7;
    else if (p.name == "nz") s = 8;
    if (s >= 0) {
      slot[i] = s;
      present[static_cast<std::size_t>(s)] = true;
      if (s < 3 && p.type != Scalar::kFloat32 && p.type != Scalar::kFloat64 &&
          p.type != Scalar::kInt32 && p.type != Scalar::kUInt32) {
        throw InputError(path + ": unsupported coordinate type for '" + p.name + "'");
      }
      if (s >= 3 && s < 6 && p.type != Scalar::kUInt8) {
        throw InputError(path + ": color property '" + p.name + "' must be uchar");
      }
    }
  }
  if (!present[0] || !present[1] || !present[2]) {
    throw InputError(path + ": vertex element lacks x,y,z coordinates");
  }
  if (!present[3] || !present[4] || !present[5]) {
    throw InputError(path + ": no color attributes (red,green,blue required)");
  }
  const bool with_normals = present[6] && present[7] && present[8];

  // Skip any elements stored ahead of the vertices.
  for (const Element& e : header.elements) {
    if (&e == vertex) break;
    if (e.has_list) {
      throw InputError(path + ": cannot skip list element '" + e.name +
                       "' stored before vertices");
    }
    if (header.format == PlyFormat::kAscii) {
      std::string line;
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!std::getline(in, line)) {
          throw InputError(path + ": unexpected end of file in element '" + e.name + "'");
        }
        ++line_no;
      }
    } else {
      std::size_t stride = 0;
      for (const Property& p : e.properties) stride += scalar_size(p.type);
      in.seekg(static_cast<std::streamoff>(stride * e.count), std::ios::cur);
    }
  }

  PointCloud cloud;
  cloud.positions.resize(vertex->count);
  cloud.colors.resize(vertex->count);
  if (with_normals) cloud.normals.resize(vertex->count);

  auto store = [&](std::size_t i, int s, double value) {
    if (s < 0) return;
    if (s < 3) {
      cloud.positions[i][static_cast<std::size_t>(s)] = value;
    } else if (s < 6) {
      cloud.colors[i][static_cast<std::size_t>(s - 3)] =
          static_cast<std::uint8_t>(value);
    } else if (with_normals) {
      cloud.normals[i][static_cast<std::size_t>(s - 6)] = value;
    }
  };

  if (header.format == PlyFormat::kAscii) {
    for (std::size_t i = 0; i < vertex->count; ++i) {
      std::string line;
      if (!std::getline(in, line)) {
        throw InputError(path + ": unexpected end of file at vertex " + std::to_string(i));
      }
      ++line_no;
      std::istringstream ls(line);
      for (std::size_t pi = 0; pi < vertex->properties.size(); ++pi) {
        double v;
        if (!(ls >> v)) {
          throw InputError(path + ":" + std::to_string(line_no) + ": malformed vertex line");
        }
        store(i, slot[pi], v);
      }
    }
  } else {
    std::size_t stride = 0;
    for (const Property& p : vertex->properties) stride += scalar_size(p.type);
    std::vector<unsigned char> row(stride);
    for (std::size_t i = 0; i < vertex->count; ++i) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(stride));
      if (!in) {
        throw InputError(path + ": unexpected end of file at vertex " + std::to_string(i));
      }
      std::size_t off = 0;
      for (std::size_t pi = 0; pi < vertex->properties.size(); ++pi) {
        store(i, slot[pi], decode_scalar(vertex->properties[pi].type, row.data() + off));
        off += scalar_size(vertex->properties[pi].type);
      }
    }
  }

  if (with_normals) {
    for (std::size_t i = 0; i < cloud.normals.size(); ++i) {
      Vec3& n = cloud.normals[i];
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      if (len < 1e-12) {
        throw InputError(path + ": zero-length normal at vertex " + std::to_string(i));
      }
      for (double& c : n) c /= len;
    }
  }
  return cloud;
}

void write_ply(const PointCloud& cloud, const std::string& path, PlyFormat format) {
  if (cloud.colors.size() != cloud.positions.size()) {
    throw InputError("cloud has mismatched position/color counts");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");

  const bool int_coords = cloud.voxelized();
  const bool with_normals = cloud.has_normals();
  out << "ply\n";
  out << (format == PlyFormat::kAscii ? "format ascii 1.0\n"
                                      : "format binary_little_endian 1.0\n");
  out << "element vertex " << cloud.size() << "\n";
  const char* coord_type = int_coords ? "int32" : "float64";
  out << "property " << coord_type << " x\n";
  out << "property " << coord_type << " y\n";
  out << "property " << coord_type << " z\n";
  if (with_normals) {
    out << "property float64 nx\nproperty float64 ny\nproperty float64 nz\n";
  }
  out << "property uint8 red\nproperty uint8 green\nproperty uint8 blue\n";
  out << "end_header\n";

  auto put_le = [&out](const void* src, std::size_t bytes) {
    // Host is little-endian on every supported target; memcpy-and-write.
    out.write(static_cast<const char*>(src), static_cast<std::streamsize>(bytes));
  };

  char buf[64];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (format == PlyFormat::kAscii) {
      for (int a = 0; a < 3; ++a) {
        if (int_coords) {
          std::snprintf(buf, sizeof buf, "%d", static_cast<int>(cloud.positions[i][static_cast<std::size_t>(a)]));
        } else {
          std::snprintf(buf, sizeof buf, "%.17g", cloud.positions[i][static_cast<std::size_t>(a)]);
        }
        out << buf << ' ';
      }
      if (with_normals) {
        for (int a = 0; a < 3; ++a) {
          std::snprintf(buf, sizeof buf, "%.17g", cloud.normals[i][static_cast<std::size_t>(a)]);
          out << buf << ' ';
        }
      }
      out << static_cast<int>(cloud.colors[i][0]) << ' '
          << static_cast<int>(cloud.colors[i][1]) << ' '
          << static_cast<int>(cloud.colors[i][2]) << '\n';
    } else {
      for (int a = 0; a < 3; ++a) {
        if (int_coords) {
          const std::int32_t v = static_cast<std::int32_t>(cloud.positions[i][static_cast<std::size_t>(a)]);
          put_le(&v, 4);
        } else {
          put_le(&cloud.positions[i][static_cast<std::size_t>(a)], 8);
        }
      }
      if (with_normals) {
        for (int a = 0; a < 3; ++a) put_le(&cloud.normals[i][static_cast<std::size_t>(a)], 8);
      }
      out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    }
  }
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace pcqa
