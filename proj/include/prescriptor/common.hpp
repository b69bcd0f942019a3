#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace prescriptor {

// Observations are stored one per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Raised when a solver cannot certify its answer (iteration limits,
// ill-conditioned bases, inconsistent recomputation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Vector row_vector(const Matrix& m, Eigen::Index i) { return m.row(i).transpose(); }

}  // namespace prescriptor
