#include "xnocs/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xnocs/error.hpp"

namespace xnocs {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// ---------------------------------------------------------------------------
// OBJ
// ---------------------------------------------------------------------------

int resolve_obj_index(long idx, std::size_t count, const std::string& line) {
  // OBJ indices are 1-based; negative indices count from the end.
  long r = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
  if (r < 0 || r >= static_cast<long>(count))
    throw InputError("obj: face index out of range in line: " + line);
  return static_cast<int>(r);
}

}  // namespace

Mesh parse_obj(std::istream& in) {
  Mesh mesh;
  bool any_color = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw InputError("obj: malformed vertex line: " + line);
      mesh.vertices.push_back({x, y, z});
      double r, g, b;
      if (ls >> r >> g >> b) {
        mesh.vertex_colors.resize(mesh.vertices.size(), Rgb{});
        mesh.vertex_colors.back() = {r, g, b};
        any_color = true;
      } else if (any_color) {
        mesh.vertex_colors.resize(mesh.vertices.size(), Rgb{});
      }
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string vert;
      while (ls >> vert) {
        // v, v/vt, v//vn, v/vt/vn — the leading field is the position index.
        const std::size_t slash = vert.find('/');
        const std::string head = slash == std::string::npos ? vert : vert.substr(0, slash);
        long raw = 0;
        try {
          raw = std::stol(head);
        } catch (const std::exception&) {
          throw InputError("obj: malformed face line: " + line);
        }
        idx.push_back(resolve_obj_index(raw, mesh.vertices.size(), line));
      }
      if (idx.size() < 3) throw InputError("obj: face with fewer than 3 vertices: " + line);
      for (std::size_t i = 1; i + 1 < idx.size(); ++i)
        mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
    // Ignore vn/vt/usemtl/etc.
  }
  if (!any_color) mesh.vertex_colors.clear();
  cleanup_mesh(mesh);
  return mesh;
}

// ---------------------------------------------------------------------------
// PLY
// ---------------------------------------------------------------------------

namespace {

enum class PlyType { Int8, Uint8, Int16, Uint16, Int32, Uint32, Float32, Float64 };

PlyType ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::Uint8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::Uint16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::Uint32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  throw InputError("ply: unknown property type '" + name + "'");
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::Uint8;
  PlyType value_type = PlyType::Float32;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
};

PlyHeader parse_ply_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("ply: empty stream");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw InputError("ply: missing magic line");

  PlyHeader header;
  bool format_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info" || tag.empty()) continue;
    if (tag == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii")
        header.binary = false;
      else if (fmt == "binary_little_endian")
        header.binary = true;
      else
        throw InputError("ply: unsupported format '" + fmt + "'");
      format_seen = true;
    } else if (tag == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      header.elements.push_back(el);
    } else if (tag == "property") {
      if (header.elements.empty()) throw InputError("ply: property before element");
      std::string t;
      ls >> t;
      PlyProperty prop;
      if (t == "list") {
        std::string ct, vt;
        ls >> ct >> vt >> prop.name;
        prop.is_list = true;
        prop.count_type = ply_type(ct);
        prop.value_type = ply_type(vt);
      } else {
        prop.value_type = ply_type(t);
        ls >> prop.name;
      }
      header.elements.back().properties.push_back(prop);
    } else if (tag == "end_header") {
      if (!format_seen) throw InputError("ply: missing format line");
      return header;
    } else {
      throw InputError("ply: unexpected header line: " + line);
    }
  }
  throw InputError("ply: truncated header");
}

class PlyValueReader {
 public:
  PlyValueReader(std::istream& in, bool binary) : in_(in), binary_(binary) {}

  double read(PlyType t) {
    if (!binary_) {
      double v;
      if (!(in_ >> v)) throw InputError("ply: truncated ascii body");
      return v;
    }
    switch (t) {
      case PlyType::Int8: return read_raw<std::int8_t>();
      case PlyType::Uint8: return read_raw<std::uint8_t>();
      case PlyType::Int16: return read_raw<std::int16_t>();
      case PlyType::Uint16: return read_raw<std::uint16_t>();
      case PlyType::Int32: return read_raw<std::int32_t>();
      case PlyType::Uint32: return read_raw<std::uint32_t>();
      case PlyType::Float32: return read_raw<float>();
      case PlyType::Float64: return read_raw<double>();
    }
    return 0.0;
  }

 private:
  template <typename T>
  double read_raw() {
    T v;
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof(T)))
      throw InputError("ply: truncated binary body");
    return static_cast<double>(v);
  }

  std::istream& in_;
  bool binary_;
};

struct PlyContents {
  std::vector<Vec3> vertices;
  std::vector<Rgb> colors;
  bool has_colors = false;
  std::vector<std::vector<int>> faces;
};

PlyContents parse_ply(std::istream& in) {
  const PlyHeader header = parse_ply_header(in);
  PlyValueReader reader(in, header.binary);
  PlyContents out;

  for (const auto& el : header.elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    if (is_vertex) {
      out.vertices.reserve(el.count);
      for (const auto& p : el.properties)
        if (p.name == "red" || p.name == "green" || p.name == "blue") out.has_colors = true;
      if (out.has_colors) out.colors.reserve(el.count);
    }
    for (std::size_t i = 0; i < el.count; ++i) {
      Vec3 pos;
      Rgb color;
      std::vector<int> face;
      for (const auto& p : el.properties) {
        if (p.is_list) {
          const auto n = static_cast<std::size_t>(reader.read(p.count_type));
          for (std::size_t k = 0; k < n; ++k) {
            const double v = reader.read(p.value_type);
            if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index"))
              face.push_back(static_cast<int>(v));
          }
        } else {
          const double v = reader.read(p.value_type);
          const bool byte_scaled = p.value_type == PlyType::Uint8 || p.value_type == PlyType::Int8;
          if (is_vertex) {
            if (p.name == "x") pos.x = v;
            else if (p.name == "y") pos.y = v;
            else if (p.name == "z") pos.z = v;
            else if (p.name == "red") color.x = byte_scaled ? v / 255.0 : v;
            else if (p.name == "green") color.y = byte_scaled ? v / 255.0 : v;
            else if (p.name == "blue") color.z = byte_scaled ? v / 255.0 : v;
          }
        }
      }
      if (is_vertex) {
        out.vertices.push_back(pos);
        if (out.has_colors) out.colors.push_back(color);
      } else if (is_face && !face.empty()) {
        out.faces.push_back(std::move(face));
      }
    }
  }
  return out;
}

void write_ply_header(std::ostream& os, PlyFormat format, std::size_t n_vertices,
                      bool with_colors, std::size_t n_faces, bool with_faces) {
  os << "ply\n";
  os << (format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
  os << "element vertex " << n_vertices << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  if (with_colors) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (with_faces) {
    os << "element face " << n_faces << "\n";
    os << "property list uchar int vertex_indices\n";
  }
  os << "end_header\n";
}

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

void write_ply_vertex(std::ostream& os, PlyFormat format, const Vec3& p, const Rgb* color) {
  const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y),
                        static_cast<float>(p.z)};
  if (format == PlyFormat::Ascii) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", xyz[0], xyz[1], xyz[2]);
    os << buf;
    if (color)
      os << ' ' << int(to_byte(color->x)) << ' ' << int(to_byte(color->y)) << ' '
         << int(to_byte(color->z));
    os << '\n';
  } else {
    os.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    if (color) {
      const std::uint8_t rgb[3] = {to_byte(color->x), to_byte(color->y), to_byte(color->z)};
      os.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  return is;
}

}  // namespace

Mesh parse_ply_mesh(std::istream& in) {
  PlyContents contents = parse_ply(in);
  Mesh mesh;
  mesh.vertices = std::move(contents.vertices);
  if (contents.has_colors) mesh.vertex_colors = std::move(contents.colors);
  for (const auto& face : contents.faces) {
    if (face.size() < 3) throw InputError("ply: face with fewer than 3 vertices");
    for (std::size_t i = 1; i + 1 < face.size(); ++i)
      mesh.triangles.push_back({face[0], face[i], face[i + 1]});
  }
  cleanup_mesh(mesh);
  return mesh;
}

Mesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  auto in = open_in(path);
  if (ext == ".obj") return parse_obj(in);
  if (ext == ".ply") return parse_ply_mesh(in);
  throw InputError("unsupported mesh format '" + ext + "' for " + path.string());
}

void save_mesh_ply(const std::filesystem::path& path, const Mesh& mesh, PlyFormat format) {
  auto os = open_out(path);
  write_ply_header(os, format, mesh.vertices.size(), mesh.has_colors(), mesh.triangles.size(),
                   true);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    write_ply_vertex(os, format, mesh.vertices[i],
                     mesh.has_colors() ? &mesh.vertex_colors[i] : nullptr);
  for (const auto& t : mesh.triangles) {
    if (format == PlyFormat::Ascii) {
      os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    } else {
      const std::uint8_t n = 3;
      const std::int32_t idx[3] = {t[0], t[1], t[2]};
      os.write(reinterpret_cast<const char*>(&n), 1);
      os.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  }
  if (!os) throw InputError("short write to " + path.string());
}

PointCloud load_cloud_ply(const std::filesystem::path& path) {
  auto in = open_in(path);
  PlyContents contents = parse_ply(in);
  PointCloud cloud;
  cloud.points = std::move(contents.vertices);
  if (contents.has_colors) cloud.colors = std::move(contents.colors);
  return cloud;
}

void save_cloud_ply(const std::filesystem::path& path, const PointCloud& cloud,
                    PlyFormat format) {
  if (cloud.has_colors() && cloud.colors.size() != cloud.points.size())
    throw InputError("point cloud colors do not match point count");
  auto os = open_out(path);
  write_ply_header(os, format, cloud.points.size(), cloud.has_colors(), 0, false);
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    write_ply_vertex(os, format, cloud.points[i],
                     cloud.has_colors() ? &cloud.colors[i] : nullptr);
  if (!os) throw InputError("short write to " + path.string());
}

}  // namespace xnocs
