#include "shadowval/simplex.hpp"

#include "shadowval/error.hpp"

namespace shadowval {

void LinearProgram::add_row(std::vector<mpq_class> coeffs, RowSense s, mpq_class b) {
  require(coeffs.size() == num_vars, ErrorKind::invalid_input, "LP row width mismatch");
  rows.push_back(std::move(coeffs));
  sense.push_back(s);
  rhs.push_back(std::move(b));
}

LpResult solve_feasibility(const LinearProgram& lp) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.num_vars;

  // Normalize to b >= 0 and count auxiliary columns.
  std::vector<std::vector<mpq_class>> a(m, std::vector<mpq_class>(n));
  std::vector<mpq_class> b(m);
  std::vector<RowSense> sense(m);
  for (std::size_t r = 0; r < m; ++r) {
    bool flip = lp.rhs[r] < 0;
    for (std::size_t c = 0; c < n; ++c) a[r][c] = flip ? mpq_class(-lp.rows[r][c]) : lp.rows[r][c];
    b[r] = flip ? mpq_class(-lp.rhs[r]) : lp.rhs[r];
    RowSense s = lp.sense[r];
    if (flip && s == RowSense::le) s = RowSense::ge;
    else if (flip && s == RowSense::ge) s = RowSense::le;
    sense[r] = s;
  }

  std::size_t slacks = 0, artificials = 0;
  for (auto s : sense) {
    if (s != RowSense::eq) ++slacks;
    if (s != RowSense::le) ++artificials;
  }
  const std::size_t total = n + slacks + artificials;

  // Tableau: m constraint rows plus the phase-1 objective row.
  std::vector<std::vector<mpq_class>> t(m + 1, std::vector<mpq_class>(total + 1));
  std::vector<std::size_t> basis(m);
  std::size_t scol = n, acol = n + slacks;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t[r][c] = a[r][c];
    t[r][total] = b[r];
    switch (sense[r]) {
      case RowSense::le:
        t[r][scol] = 1;
        basis[r] = scol++;
        break;
      case RowSense::ge:
        t[r][scol] = -1;
        ++scol;
        t[r][acol] = 1;
        basis[r] = acol++;
        break;
      case RowSense::eq:
        t[r][acol] = 1;
        basis[r] = acol++;
        break;
    }
  }
  // Phase-1 objective: minimize the sum of artificial variables. Reduced
  // costs over structural and slack columns are -sum of the artificial-basis
  // rows; artificial columns themselves have reduced cost 1 - 1 = 0.
  const std::size_t art_begin = n + slacks;
  auto& obj = t[m];
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] >= art_begin) {
      for (std::size_t c = 0; c < art_begin; ++c) obj[c] -= t[r][c];
      obj[total] -= t[r][total];
    }
  }

  LpResult res;
  for (;;) {
    // Bland's rule: entering = lowest-index column with negative reduced
    // cost; artificial columns never re-enter.
    std::size_t enter = total;
    for (std::size_t c = 0; c < art_begin; ++c) {
      if (obj[c] < 0) {
        enter = c;
        break;
      }
    }
    if (enter == total) break;  // optimal
    // Ratio test, lowest row index on ties.
    std::size_t leave = m;
    mpq_class best;
    for (std::size_t r = 0; r < m; ++r) {
      if (t[r][enter] > 0) {
        mpq_class ratio = t[r][total] / t[r][enter];
        if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    }
    require(leave != m, ErrorKind::solver_failure,
            "phase-1 simplex unbounded (cannot happen for a feasibility program)");
    // Pivot.
    ++res.pivots;
    mpq_class piv = t[leave][enter];
    for (std::size_t c = 0; c <= total; ++c) t[leave][c] /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      if (t[r][enter] != 0) {
        mpq_class f = t[r][enter];
        for (std::size_t c = 0; c <= total; ++c) t[r][c] -= f * t[leave][c];
      }
    }
    basis[leave] = enter;
  }

  // Phase-1 optimum is -obj rhs; > 0 means infeasible.
  mpq_class opt = -t[m][total];
  if (opt > 0) {
    res.status = LpStatus::infeasible;
    return res;
  }
  res.status = LpStatus::feasible;
  res.solution.assign(n, mpq_class(0));
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.solution[basis[r]] = t[r][total];
  return res;
}

}  // namespace shadowval
