#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace modflow {

/// Shortest decimal rendering that round-trips the double exactly.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  char sep = ',') {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    std::string_view f = (pos == std::string_view::npos)
                             ? line.substr(start)
                             : line.substr(start, pos - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) {
      f.remove_prefix(1);
    }
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' ||
                          f.back() == '\r')) {
      f.remove_suffix(1);
    }
    out.push_back(f);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// FNV-1a over raw bytes, for input manifests.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace modflow
