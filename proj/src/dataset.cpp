#include "fliv/dataset.hpp"

#include <sstream>

#include "fliv/errors.hpp"

namespace fliv {

void Dataset::validate() const {
  const auto n_rows = y.size();
  auto check_rows = [&](Eigen::Index rows, const char* what) {
    if (rows != n_rows) {
      std::ostringstream msg;
      msg << what << " has " << rows << " rows, outcome has " << n_rows;
      fail(ErrorKind::Dimension, msg.str());
    }
  };
  check_rows(w.values.rows(), "W");
  check_rows(m.values.rows(), "M");
  check_rows(z.rows(), "Z");
  if (x) check_rows(x->values.rows(), "X");
  if (weights) check_rows(weights->size(), "weights");
  if (!(m.grid == w.grid) || (x && !(x->grid == w.grid)))
    fail(ErrorKind::GridMismatch, "W, M and X must share one grid");
  if (!z_names.empty() && static_cast<Eigen::Index>(z_names.size()) != z.cols())
    fail(ErrorKind::Dimension, "covariate names do not match covariate columns");
  if (!subject_ids.empty() && static_cast<Eigen::Index>(subject_ids.size()) != n_rows)
    fail(ErrorKind::Dimension, "subject ids do not match outcome length");
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
  const auto idx = Eigen::Map<const Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1>>(
      rows.data(), static_cast<Eigen::Index>(rows.size()));
  auto take = [&](const Matrix& mat) -> Matrix { return mat(idx, Eigen::all); };
  Dataset out{y(idx), FunctionalSample(take(w.values), w.grid), FunctionalSample(take(m.values), m.grid),
              std::nullopt, take(z), z_names, std::nullopt, {}};
  if (x) out.x = FunctionalSample(take(x->values), x->grid);
  if (weights) out.weights = Vector((*weights)(idx));
  if (!subject_ids.empty()) {
    out.subject_ids.reserve(rows.size());
    for (auto r : rows) out.subject_ids.push_back(subject_ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace fliv
