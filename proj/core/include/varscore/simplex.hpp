#pragma once

// Dense two-phase simplex for small linear programs. Bland's rule, so no
// cycling; cost is O(rows * cols) per pivot, fine at the sizes used here
// (a few hundred rows).

#include <stdexcept>
#include <vector>

#include "varscore/matrix.hpp"

namespace varscore {

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

struct LpResult {
  std::vector<double> x;
  double objective = 0.0;
};

// min c^T x  subject to  A x <= b, x >= 0. b entries may be negative.
// Throws InfeasibleError when the feasible set is empty and
// std::runtime_error when the problem is unbounded.
LpResult solve_lp_inequality(const Matrix& a, const std::vector<double>& b,
                             const std::vector<double>& c);

}  // namespace varscore
