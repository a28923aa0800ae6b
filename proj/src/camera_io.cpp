#include "mgmvs/camera_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace mgmvs {

namespace {

std::vector<double> read_numbers(std::istream& in, std::size_t count,
                                 const char* block) {
  std::vector<double> values;
  values.reserve(count);
  double x = 0;
  while (values.size() < count && in >> x) values.push_back(x);
  if (values.size() != count)
    throw Error(ErrorKind::MalformedFile,
                std::string("camera file: truncated ") + block + " block");
  return values;
}

void expect_keyword(std::istream& in, const std::string& keyword) {
  std::string token;
  if (!(in >> token) || token != keyword)
    throw Error(ErrorKind::MalformedFile,
                "camera file: expected '" + keyword + "', got '" + token + "'");
}

}  // namespace

Camera read_camera(std::istream& in, int width, int height) {
  expect_keyword(in, "extrinsic");
  const auto ext = read_numbers(in, 16, "extrinsic");
  expect_keyword(in, "intrinsic");
  const auto intr = read_numbers(in, 9, "intrinsic");

  std::string line;
  std::vector<double> range;
  while (range.empty() && std::getline(in, line)) {
    std::istringstream ls(line);
    double x = 0;
    while (ls >> x) range.push_back(x);
  }
  if (range.size() < 2)
    throw Error(ErrorKind::MalformedFile,
                "camera file: missing 'depth_min depth_interval' line");

  Matrix3<double> R, K;
  Vector3<double> t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      R(r, c) = ext[r * 4 + c];
      K(r, c) = intr[r * 3 + c];
    }
    t(r) = ext[r * 4 + 3];
  }

  const double depth_min = range[0];
  double depth_max = 0;
  if (range.size() >= 4) {
    depth_max = range[3];
  } else {
    const double planes = range.size() >= 3 ? range[2] : 192.0;
    depth_max = depth_min + range[1] * (planes - 1.0);
  }
  return Camera(K, R, t, depth_min, depth_max, width, height);
}

Camera read_camera(const std::filesystem::path& path, int width, int height) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_camera(in, width, height);
}

void write_camera(std::ostream& out, const Camera& camera) {
  out << std::setprecision(17);
  out << "extrinsic\n";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << camera.rotation()(r, c) << ' ';
    out << camera.translation()(r) << '\n';
  }
  out << "0 0 0 1\n\nintrinsic\n";
  for (int r = 0; r < 3; ++r)
    out << camera.intrinsics()(r, 0) << ' ' << camera.intrinsics()(r, 1) << ' '
        << camera.intrinsics()(r, 2) << '\n';
  constexpr int planes = 192;
  const double interval =
      (camera.depth_max() - camera.depth_min()) / double(planes - 1);
  out << '\n'
      << camera.depth_min() << ' ' << interval << ' ' << planes << ' '
      << camera.depth_max() << '\n';
}

void write_camera(const std::filesystem::path& path, const Camera& camera) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_camera(out, camera);
}

}  // namespace mgmvs
