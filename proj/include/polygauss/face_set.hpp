#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace polygauss {

/// Index set of constraints, sorted ascending and duplicate-free.
/// Constraint indices are 1-based; homogenized sets may also contain 0.
using FaceSet = std::vector<int>;

inline bool is_sorted_unique(const FaceSet& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i - 1] >= s[i]) return false;
  return true;
}

inline bool set_contains(const FaceSet& s, int j) {
  return std::binary_search(s.begin(), s.end(), j);
}

/// s with element j inserted (no-op if already present).
inline FaceSet with_element(const FaceSet& s, int j) {
  FaceSet out;
  out.reserve(s.size() + 1);
  auto it = std::lower_bound(s.begin(), s.end(), j);
  out.insert(out.end(), s.begin(), it);
  if (it == s.end() || *it != j) out.push_back(j);
  out.insert(out.end(), it, s.end());
  return out;
}

inline bool is_subset(const FaceSet& a, const FaceSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// Order by cardinality first, lexicographically within a cardinality.
struct CardLexLess {
  bool operator()(const FaceSet& a, const FaceSet& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

struct FaceSetHash {
  std::size_t operator()(const FaceSet& s) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ s.size();
    for (int v : s) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

inline std::string to_string(const FaceSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += "}";
  return out;
}

}  // namespace polygauss
