#include "helecloak/linalg.hpp"

#include <limits>
#include <sstream>

namespace helecloak {

DenseLU::DenseLU(const Matrix& a, const std::string& what) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgumentError(what + ": system matrix must be square");
  if (!a.allFinite()) throw NumericalError(what + ": system matrix has non-finite entries");
  lu_.compute(a);
  const double rc = lu_.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(condition_ <= kMaxCondition)) {
    std::ostringstream os;
    os.precision(3);
    os << what << ": linear system is singular or ill-conditioned (condition estimate " << condition_ << ")";
    throw NumericalError(os.str(), condition_);
  }
}

Vector DenseLU::solve(const Vector& rhs) const {
  if (rhs.size() != lu_.rows()) throw InvalidArgumentError("right-hand side has the wrong length");
  Vector x = lu_.solve(rhs);
  if (!x.allFinite()) throw NumericalError("linear solve produced non-finite values", condition_);
  return x;
}

}  // namespace helecloak
