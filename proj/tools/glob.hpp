#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ncbc::cli {

struct GlobMatch {
  std::filesystem::path path;
  // Path relative to the pattern's wildcard-free leading directories.
  std::string relative;
};

// Expands '*', '?' and '[...]' per path component (fnmatch semantics).
// Results are sorted by path.
std::vector<GlobMatch> expand_glob(const std::string& pattern);

}  // namespace ncbc::cli
