#pragma once

#include <stdexcept>
#include <string>

namespace mmpde {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Element with |det E_K| at or below the geometric degeneracy threshold.
struct DegenerateElement : MeshError {
  explicit DegenerateElement(const std::string& what, int element = -1)
      : MeshError(what), element_index(element) {}
  int element_index;
};

struct NonSPDMetric : MeshError {
  using MeshError::MeshError;
};

struct ParseError : MeshError {
  ParseError(const std::string& what, int line)
      : MeshError(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

struct IndexBaseError : MeshError {
  using MeshError::MeshError;
};

struct SingularPatch : MeshError {
  using MeshError::MeshError;
};

struct UnsupportedDimension : MeshError {
  using MeshError::MeshError;
};

struct ZeroSurfaceGradient : MeshError {
  using MeshError::MeshError;
};

struct NotCoercive : MeshError {
  using MeshError::MeshError;
};

}  // namespace mmpde
