#include "mgmvs/point_cloud.hpp"

#include "mgmvs/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace mgmvs {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PLY I/O assumes a little-endian host");

struct Property {
  std::string name;
  int size = 0;
  bool is_float = false;
};

int type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorKind::MalformedPly, path.string() + ": " + what);
}

}  // namespace

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  const bool colored = cloud.has_colors();
  if (colored && cloud.colors.size() != cloud.points.size())
    throw Error(ErrorKind::InvalidConfig, "write_ply: color count mismatch");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\n";
  if (colored) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.write(reinterpret_cast<const char*>(cloud.points[i].data()), 3 * sizeof(float));
    if (colored) out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != "ply") malformed(path, "missing 'ply' magic");

  std::size_t vertex_count = 0;
  bool in_vertex = false, seen_vertex = false, binary_le = false;
  std::vector<Property> props;
  while (true) {
    if (!std::getline(in, line)) malformed(path, "unterminated header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      std::string name;
      long long n = -1;
      ls >> name >> n;
      if (n < 0) malformed(path, "bad element line");
      in_vertex = name == "vertex";
      if (in_vertex) {
        if (seen_vertex) malformed(path, "duplicate vertex element");
        seen_vertex = true;
        vertex_count = std::size_t(n);
      } else if (!seen_vertex) {
        malformed(path, "elements before vertex are not supported");
      }
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      if (type == "list") malformed(path, "list properties are not supported");
      if (!in_vertex) continue;
      const int size = type_size(type);
      if (size == 0) malformed(path, "unknown property type '" + type + "'");
      props.push_back({name, size, type == "float" || type == "float32"});
    } else {
      malformed(path, "unexpected header line '" + line + "'");
    }
  }
  if (!binary_le) malformed(path, "only binary_little_endian is supported");
  if (!seen_vertex) malformed(path, "no vertex element");

  int stride = 0;
  int offset[6] = {-1, -1, -1, -1, -1, -1};
  static const char* wanted[6] = {"x", "y", "z", "red", "green", "blue"};
  for (const Property& p : props) {
    for (int k = 0; k < 6; ++k) {
      if (p.name != wanted[k]) continue;
      if (k < 3 && !(p.is_float && p.size == 4)) malformed(path, "coordinates must be float");
      if (k >= 3 && p.size != 1) malformed(path, "colors must be uchar");
      offset[k] = stride;
    }
    stride += p.size;
  }
  if (offset[0] < 0 || offset[1] < 0 || offset[2] < 0) malformed(path, "missing x/y/z");
  const bool colored = offset[3] >= 0 && offset[4] >= 0 && offset[5] >= 0;

  PointCloud cloud;
  cloud.points.resize(vertex_count);
  if (colored) cloud.colors.resize(vertex_count);
  std::vector<char> record(stride);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!in.read(record.data(), stride)) malformed(path, "truncated vertex data");
    for (int k = 0; k < 3; ++k)
      std::memcpy(&cloud.points[i][k], record.data() + offset[k], sizeof(float));
    if (colored)
      for (int k = 0; k < 3; ++k)
        cloud.colors[i][k] = static_cast<std::uint8_t>(record[offset[3 + k]]);
  }
  return cloud;
}

}  // namespace mgmvs
