#pragma once

#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "polygauss/face_set.hpp"
#include "polygauss/geometry.hpp"
#include "polygauss/types.hpp"

namespace polygauss {

/// The nerve: all index sets J in [n] whose facets intersect, downward closed,
/// always containing {}.  Faces are ordered by cardinality then
/// lexicographically; that order fixes the basis layout downstream.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  SimplicialComplex(int n_ground, std::vector<FaceSet> faces)
      : n_ground_(n_ground), faces_(std::move(faces)) {
    std::sort(faces_.begin(), faces_.end(), CardLexLess{});
    for (std::size_t i = 0; i < faces_.size(); ++i) {
      if (!is_sorted_unique(faces_[i]))
        throw std::invalid_argument("face sets must be sorted and duplicate-free");
      if (i > 0 && faces_[i] == faces_[i - 1])
        throw std::invalid_argument("duplicate face " + to_string(faces_[i]));
      index_.emplace(faces_[i], static_cast<int>(i));
    }
    if (faces_.empty() || !faces_.front().empty())
      throw std::invalid_argument("complex must contain the empty set");
    for (const auto& J : faces_) {
      for (std::size_t k = 0; k < J.size(); ++k) {
        FaceSet sub = J;
        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(k));
        if (!contains(sub))
          throw std::invalid_argument("complex is not downward closed at " + to_string(J));
      }
      if (!J.empty() && (J.front() < 1 || J.back() > n_ground_))
        throw std::invalid_argument("face index outside ground set: " + to_string(J));
    }
  }

  int size() const { return static_cast<int>(faces_.size()); }
  int n_ground() const { return n_ground_; }
  const FaceSet& face(int i) const { return faces_[static_cast<std::size_t>(i)]; }
  const std::vector<FaceSet>& faces() const { return faces_; }

  int index_of(const FaceSet& J) const {
    auto it = index_.find(J);
    return it == index_.end() ? -1 : it->second;
  }
  bool contains(const FaceSet& J) const { return index_.count(J) > 0; }

 private:
  int n_ground_ = 0;
  std::vector<FaceSet> faces_;
  std::unordered_map<FaceSet, int, FaceSetHash> index_;
};

/// Number of nonempty faces, counting the polyhedron itself (the empty index
/// set).  Equals the dimension of the Pfaffian system.
inline int holonomic_rank(const SimplicialComplex& c) { return c.size(); }

/// Builds the nerve from a general-position report: J is a face exactly when
/// its homogenized cone is full-dimensional.  Requires the stripped input to
/// have passed the general-position check.
template <typename Scalar>
SimplicialComplex nerve(const HPolyhedron<Scalar>& p, const GeneralPositionReport& gp) {
  if (!gp.in_general_position)
    raise(ErrorCode::NotGeneralPosition,
          "family is not in general position" +
              (gp.witness ? " (witness " + to_string(*gp.witness) + ")" : std::string()));
  const int n = static_cast<int>(p.n_constraints());
  std::vector<FaceSet> faces;
  for (const auto& [J, cls] : gp.face_dims) {
    if (cls != ConeClass::FullDimCone) continue;
    if (!J.empty() && J.front() == 0) continue;  // restrict to J within [n]
    faces.push_back(J);
  }
  SimplicialComplex c(n, std::move(faces));
  for (int j = 1; j <= n; ++j) {
    if (!c.contains({j}))
      raise(ErrorCode::NotGeneralPosition,
            "constraint " + std::to_string(j) +
                " bounds no facet; strip redundant constraints first");
  }
  return c;
}

}  // namespace polygauss
