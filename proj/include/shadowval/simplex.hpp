#pragma once

#include <gmpxx.h>

#include <vector>

namespace shadowval {

// Exact rational feasibility solver (two-phase primal simplex, Bland's rule).
// Variables are implicitly >= 0.
enum class RowSense { le, ge, eq };

struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<std::vector<mpq_class>> rows;
  std::vector<mpq_class> rhs;
  std::vector<RowSense> sense;

  void add_row(std::vector<mpq_class> coeffs, RowSense s, mpq_class b);
};

enum class LpStatus { feasible, infeasible };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<mpq_class> solution;  // length num_vars when feasible
  long pivots = 0;
};

LpResult solve_feasibility(const LinearProgram& lp);

}  // namespace shadowval
