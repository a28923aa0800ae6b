#pragma once

#include "mgmvs/types.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace mgmvs {

// Single-channel PFM ("Pf"), little-endian, rows stored bottom to top.
void write_pfm(const std::filesystem::path& path, const Grid& grid);
// Accepts "Pf" and "PF" (channels averaged) in either byte order.
Grid read_pfm(const std::filesystem::path& path);

// Grayscale image in [0,1] written as a plain (ASCII, P3) PPM with 16-bit
// samples. The reader accepts P2/P3/P5/P6 and converts to luminance.
void write_ppm(const std::filesystem::path& path, const Grid& image);
Grid read_ppm(const std::filesystem::path& path);

// key=value files: '#' starts a comment, blank lines ignored, whitespace
// around keys and values trimmed, duplicate keys rejected.
struct KeyValueFile {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  const std::string& at(const std::string& key) const;
};

KeyValueFile parse_key_values(std::istream& in);
KeyValueFile read_key_values(const std::filesystem::path& path);

}  // namespace mgmvs
