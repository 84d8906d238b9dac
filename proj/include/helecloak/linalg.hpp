#pragma once

#include <string>

#include "helecloak/kernels.hpp"

namespace helecloak {

// Failure threshold on the 1-norm condition estimate.
inline constexpr double kMaxCondition = 1e12;

// Dense LU with partial pivoting and a condition estimate. Construction
// throws NumericalError when the estimate exceeds kMaxCondition.
class DenseLU {
 public:
  DenseLU(const Matrix& a, const std::string& what);
  Vector solve(const Vector& rhs) const;
  double condition() const { return condition_; }
  Eigen::Index size() const { return lu_.rows(); }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  double condition_ = 0.0;
};

}  // namespace helecloak
