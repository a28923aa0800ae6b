#include "mgmvs/io.hpp"

#include "mgmvs/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mgmvs {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

[[noreturn]] void malformed(const std::filesystem::path& path,
                            const std::string& what) {
  throw Error(ErrorKind::MalformedFile, path.string() + ": " + what);
}

float to_host(float f, bool big_endian) {
  if (big_endian == (std::endian::native == std::endian::big)) return f;
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) |
         ((bits >> 8) & 0xFF00u) | (bits >> 24);
  std::memcpy(&f, &bits, 4);
  return f;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(ch);
  }
  return token;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const Grid& grid) {
  auto out = open_out(path);
  out << "Pf\n" << grid.cols() << ' ' << grid.rows() << "\n-1\n";
  std::vector<float> row(grid.cols());
  for (Eigen::Index v = grid.rows() - 1; v >= 0; --v) {
    for (Eigen::Index u = 0; u < grid.cols(); ++u)
      row[u] = to_host(static_cast<float>(grid(v, u)), false);
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Grid read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string magic = header_token(in);
  int channels = 0;
  if (magic == "Pf")
    channels = 1;
  else if (magic == "PF")
    channels = 3;
  else
    malformed(path, "not a PFM file");

  int width = 0, height = 0;
  double scale = 0;
  try {
    width = std::stoi(header_token(in));
    height = std::stoi(header_token(in));
    scale = std::stod(header_token(in));
  } catch (const std::exception&) {
    malformed(path, "bad PFM header");
  }
  if (width <= 0 || height <= 0 || scale == 0) malformed(path, "bad PFM header");
  const bool big_endian = scale > 0;

  Grid grid(height, width);
  std::vector<float> row(std::size_t(width) * channels);
  for (int v = height - 1; v >= 0; --v) {
    if (!in.read(reinterpret_cast<char*>(row.data()),
                 std::streamsize(row.size() * sizeof(float))))
      malformed(path, "truncated PFM data");
    for (int u = 0; u < width; ++u) {
      double sum = 0;
      for (int c = 0; c < channels; ++c)
        sum += to_host(row[std::size_t(u) * channels + c], big_endian);
      grid(v, u) = sum / channels;
    }
  }
  return grid;
}

void write_ppm(const std::filesystem::path& path, const Grid& image) {
  auto out = open_out(path);
  out << "P3\n" << image.cols() << ' ' << image.rows() << "\n65535\n";
  for (Eigen::Index v = 0; v < image.rows(); ++v) {
    for (Eigen::Index u = 0; u < image.cols(); ++u) {
      const double x = std::clamp(image(v, u), 0.0, 1.0);
      const long q = std::lround(x * 65535.0);
      out << q << ' ' << q << ' ' << q << (u + 1 == image.cols() ? '\n' : ' ');
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Grid read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string magic = header_token(in);
  const bool ascii = magic == "P2" || magic == "P3";
  const bool binary = magic == "P5" || magic == "P6";
  if (!ascii && !binary) malformed(path, "unsupported netpbm type " + magic);
  const int channels = (magic == "P3" || magic == "P6") ? 3 : 1;

  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(header_token(in));
    height = std::stoi(header_token(in));
    maxval = std::stoi(header_token(in));
  } catch (const std::exception&) {
    malformed(path, "bad netpbm header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    malformed(path, "bad netpbm header");

  Grid image(height, width);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      double sum = 0;
      for (int c = 0; c < channels; ++c) {
        long sample = 0;
        if (ascii) {
          if (!(in >> sample)) malformed(path, "truncated image data");
        } else if (maxval < 256) {
          unsigned char b = 0;
          if (!in.read(reinterpret_cast<char*>(&b), 1))
            malformed(path, "truncated image data");
          sample = b;
        } else {
          unsigned char b[2];
          if (!in.read(reinterpret_cast<char*>(b), 2))
            malformed(path, "truncated image data");
          sample = (long(b[0]) << 8) | b[1];
        }
        sum += double(sample) / maxval;
      }
      image(v, u) = sum / channels;
    }
  }
  return image;
}

const std::string& KeyValueFile::at(const std::string& key) const {
  const auto it = entries.find(key);
  if (it == entries.end())
    throw Error(ErrorKind::MalformedFile, "missing key '" + key + "'");
  return it->second.value;
}

KeyValueFile parse_key_values(std::istream& in) {
  KeyValueFile file;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config,
                  "line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw Error(ErrorKind::Config,
                  "line " + std::to_string(number) + ": empty key");
    if (file.has(key))
      throw Error(ErrorKind::Config, "line " + std::to_string(number) +
                                         ": duplicate key '" + key + "'");
    file.entries[key] = {trim(line.substr(eq + 1)), number};
  }
  return file;
}

KeyValueFile read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_key_values(in);
}

}  // namespace mgmvs
