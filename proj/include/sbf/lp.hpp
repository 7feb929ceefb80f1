#pragma once

#include <vector>

#include "sbf/systems.hpp"

namespace sbf::lp {

enum class Status { Optimal, Infeasible, Unbounded };

// min c.x  subject to  A x (rel) rhs,  lower <= x <= upper.
// rel entries: '<' for <=, '>' for >=, '=' for equality. Infinite bounds are
// allowed; a variable with no finite bound starts at zero.
struct Problem {
  Vec c;
  Mat A;
  std::vector<char> rel;
  Vec rhs;
  Vec lower;
  Vec upper;
};

struct Solution {
  Status status = Status::Infeasible;
  Vec x;
  double objective = 0.0;
};

Solution solve(const Problem& prob);

}  // namespace sbf::lp
