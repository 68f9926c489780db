#include "glob.hpp"

#include <fnmatch.h>

#include <algorithm>

namespace ncbc::cli {
namespace fs = std::filesystem;

namespace {

bool has_wildcard(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

void expand(const fs::path& base, const std::vector<std::string>& parts, std::size_t i,
            std::vector<fs::path>& out) {
  if (i == parts.size()) {
    if (fs::exists(base)) out.push_back(base);
    return;
  }
  const std::string& part = parts[i];
  if (!has_wildcard(part)) {
    expand(base / part, parts, i + 1, out);
    return;
  }
  const fs::path dir = base.empty() ? fs::path(".") : base;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return;
  std::vector<fs::path> entries;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (::fnmatch(part.c_str(), name.c_str(), FNM_PERIOD) == 0) {
      entries.push_back(base.empty() ? fs::path(name) : base / name);
    }
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& e : entries) expand(e, parts, i + 1, out);
}

}  // namespace

std::vector<GlobMatch> expand_glob(const std::string& pattern) {
  const fs::path p(pattern);
  fs::path base;
  std::vector<std::string> parts;
  bool wild = false;
  for (const auto& comp : p) {
    const std::string s = comp.string();
    if (!wild && !has_wildcard(s)) {
      base /= comp;
    } else {
      wild = true;
      parts.push_back(s);
    }
  }
  std::vector<fs::path> found;
  if (parts.empty()) {
    if (fs::exists(base)) found.push_back(base);
  } else {
    expand(base, parts, 0, found);
  }
  std::sort(found.begin(), found.end());

  std::vector<GlobMatch> out;
  for (const auto& f : found) {
    std::string rel = parts.empty() ? f.filename().string() : f.lexically_relative(base).generic_string();
    out.push_back({f, rel});
  }
  return out;
}

}  // namespace ncbc::cli
