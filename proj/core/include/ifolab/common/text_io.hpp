#pragma once

#include <cstdio>
#include <string>

namespace ifolab {

// Serializes a double with enough digits that parsing it back restores the
// exact bit pattern (17 significant decimal digits for IEEE binary64).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path);

// Writes content to a temp file in the target directory, then renames it into
// place, so readers never observe a partially written file.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace ifolab
