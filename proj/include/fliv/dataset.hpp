#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fliv/fda.hpp"

namespace fliv {

/// Outcome, error-prone curve W, instrument M, optional latent X, error-free
/// covariates Z (one column per covariate) and optional observation weights.
struct Dataset {
  Vector y;
  FunctionalSample w;
  FunctionalSample m;
  std::optional<FunctionalSample> x;
  Matrix z;
  std::vector<std::string> z_names;
  std::optional<Vector> weights;
  std::vector<std::string> subject_ids;

  std::size_t n() const noexcept { return static_cast<std::size_t>(y.size()); }
  const TimeGrid& grid() const noexcept { return w.grid; }

  /// Throws Dimension/GridMismatch if the parts disagree.
  void validate() const;

  /// Subjects at the given row indices (with repetition), e.g. a bootstrap draw.
  Dataset select_rows(const std::vector<Eigen::Index>& rows) const;
};

}  // namespace fliv
