#include "shadowval/cldm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "shadowval/simplex.hpp"

namespace shadowval {

namespace {

// Single-qubit snapshot letters in a fixed order: X+, X-, Y+, Y-, Z+, Z-.
constexpr int kQubitLetters = 6;

ComplexMatrix qubit_eta(int code) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<cplx> psi;
  switch (code) {
    case 0: psi = {s, s}; break;
    case 1: psi = {s, -s}; break;
    case 2: psi = {s, cplx(0, s)}; break;
    case 3: psi = {s, cplx(0, -s)}; break;
    case 4: psi = {1, 0}; break;
    case 5: psi = {0, 1}; break;
    default: throw Error(ErrorKind::invalid_input, "invalid restriction mask entry");
  }
  ComplexMatrix eta(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) eta(a, b) = 3.0 * psi[a] * std::conj(psi[b]) - (a == b ? 1.0 : 0.0);
  return eta;
}

// Jacobi eigenvalues of a small Hermitian matrix, values only; the row-major
// buffer is destroyed.
void small_herm_eigenvalues(std::vector<cplx>& a, int n, std::vector<double>& out) {
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = r + 1; c < n; ++c) off += std::norm(a[r * n + c]);
    if (off <= 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        cplx apq = a[p * n + q];
        double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        cplx u = apq / mag;
        double app = a[p * n + p].real(), aqq = a[q * n + q].real();
        double tau = (aqq - app) / (2.0 * mag);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        for (int r = 0; r < n; ++r) {
          cplx arp = a[r * n + p], arq = a[r * n + q];
          a[r * n + p] = c * arp - s * std::conj(u) * arq;
          a[r * n + q] = s * u * arp + c * arq;
        }
        for (int cc = 0; cc < n; ++cc) {
          cplx apc = a[p * n + cc], aqc = a[q * n + cc];
          a[p * n + cc] = c * apc - s * u * aqc;
          a[q * n + cc] = s * std::conj(u) * apc + c * aqc;
        }
      }
  }
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = a[i * n + i].real();
}

double trace_norm_small(std::vector<cplx>& buf, int n) {
  std::vector<double> ev;
  small_herm_eigenvalues(buf, n, ev);
  double s = 0.0;
  for (double v : ev) s += std::abs(v);
  return s;
}

}  // namespace

SnapshotAlphabet enumerate_alphabet(int ell, const std::vector<int>& restriction) {
  require(ell >= 1 && ell <= 3, ErrorKind::invalid_input, "alphabet: ell must be in [1,3]");
  std::vector<int> letters = restriction;
  if (letters.empty())
    for (int i = 0; i < kQubitLetters; ++i) letters.push_back(i);
  std::sort(letters.begin(), letters.end());
  letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
  for (int c : letters)
    require(c >= 0 && c < kQubitLetters, ErrorKind::invalid_input, "invalid restriction mask");

  SnapshotAlphabet a;
  a.qudit = false;
  a.ell = ell;
  a.d = 1 << ell;
  const std::size_t per = letters.size();
  std::size_t count = 1;
  for (int i = 0; i < ell; ++i) count *= per;
  for (std::size_t idx = 0; idx < count; ++idx) {
    LocalRecord rec;
    ComplexMatrix eta(1, 1);
    eta(0, 0) = 1.0;
    std::size_t rem = idx;
    std::vector<int> digits(ell);
    for (int q = ell - 1; q >= 0; --q) {
      digits[q] = static_cast<int>(rem % per);
      rem /= per;
    }
    for (int q = 0; q < ell; ++q) {
      int code = letters[digits[q]];
      rec.bases.push_back(static_cast<std::uint8_t>(code / 2));
      rec.outcomes.push_back(code % 2 == 0 ? 1 : -1);
      eta = kron(eta, qubit_eta(code));
    }
    a.etas.push_back(std::move(eta));
    a.site_records.push_back(std::move(rec));
  }
  return a;
}

SnapshotAlphabet enumerate_alphabet_qudit(int d, const std::vector<int>& restriction) {
  require(is_odd_prime(d) && d <= 13, ErrorKind::invalid_input,
          "qudit alphabet: d must be an odd prime <= 13");
  std::vector<int> codes = restriction;
  if (codes.empty())
    for (int i = 0; i < d * (d + 1); ++i) codes.push_back(i);
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());

  SnapshotAlphabet a;
  a.qudit = true;
  a.ell = 0;
  a.d = d;
  for (int code : codes) {
    require(code >= 0 && code < d * (d + 1), ErrorKind::invalid_input, "invalid restriction mask");
    LocalRecord rec;
    rec.bases.push_back(static_cast<std::uint8_t>(code / d));
    rec.outcomes.push_back(static_cast<std::int16_t>(code % d));
    a.etas.push_back(myz_snapshot_matrix(rec, d));
    a.site_records.push_back(std::move(rec));
  }
  return a;
}

bool CldmInstance::qudit_mode() const { return is_odd_prime(d); }

int CldmInstance::ell() const {
  int e = 0, v = d;
  while (v > 1 && v % 2 == 0) {
    v /= 2;
    ++e;
  }
  return (v == 1) ? e : 0;
}

void CldmInstance::validate() const {
  require(n >= 2, ErrorKind::invalid_input, "chain length must be >= 2");
  bool pow2 = (d >= 2) && ((d & (d - 1)) == 0);
  require(pow2 || is_odd_prime(d), ErrorKind::invalid_input,
          "site dimension must be a power of two or an odd prime");
  require(sigmas.size() == static_cast<std::size_t>(n - 1), ErrorKind::invalid_input,
          "need exactly n-1 edge marginals");
  require(0.0 <= alpha && alpha < beta && beta <= 2.0, ErrorKind::invalid_input,
          "thresholds must satisfy 0 <= alpha < beta <= 2");
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  for (const auto& s : sigmas) {
    require(s.rows() == dd && s.cols() == dd, ErrorKind::invalid_input,
            "edge marginal has wrong dimension");
    DensityMatrix check{s};  // throws when not a valid state
    (void)check;
  }
}

nlohmann::json cldm_to_json(const CldmInstance& inst) {
  nlohmann::json j;
  j["d"] = inst.d;
  j["n"] = inst.n;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : inst.sigmas) arr.push_back(matrix_to_json(s));
  j["sigmas"] = std::move(arr);
  j["alpha"] = inst.alpha;
  j["beta"] = inst.beta;
  return j;
}

CldmInstance cldm_from_json(const nlohmann::json& j) {
  CldmInstance inst;
  inst.d = j.at("d");
  inst.n = j.at("n");
  for (const auto& s : j.at("sigmas")) inst.sigmas.push_back(matrix_from_json(s));
  inst.alpha = j.at("alpha");
  inst.beta = j.at("beta");
  inst.validate();
  return inst;
}

std::vector<std::int64_t> WeightMatrix::row_sums() const {
  std::vector<std::int64_t> r(m, 0);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) r[j] += counts[j * m + k];
  return r;
}

std::vector<std::int64_t> WeightMatrix::col_sums() const {
  std::vector<std::int64_t> c(m, 0);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) c[k] += counts[j * m + k];
  return c;
}

bool marginal_match(const WeightMatrix& a, const WeightMatrix& b) {
  require(a.m == b.m && a.total == b.total, ErrorKind::invalid_input,
          "marginal_match: shape mismatch");
  return a.col_sums() == b.row_sums();
}

LpOutcome solve_marginal_lp(const CldmInstance& inst, const SnapshotAlphabet& alphabet) {
  inst.validate();
  require(alphabet.d == inst.d, ErrorKind::invalid_input,
          "alphabet site dimension does not match the instance");
  const int m = static_cast<int>(alphabet.size());
  const int edges = inst.n - 1;
  const std::size_t dd = static_cast<std::size_t>(inst.d) * inst.d;
  const std::size_t vars = static_cast<std::size_t>(edges) * m * m;
  const mpq_class tol(1, 10000000);  // +-1e-7 interval on Eq-(4a) rows

  std::vector<ComplexMatrix> pair(m * m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) pair[j * m + k] = kron(alphabet.etas[j], alphabet.etas[k]);

  LinearProgram lp;
  lp.num_vars = vars;
  auto var = [&](int i, int j, int k) { return static_cast<std::size_t>((i * m + j) * m + k); };

  for (int i = 0; i < edges; ++i) {
    const ComplexMatrix& sigma = inst.sigmas[i];
    for (std::size_t r = 0; r < dd; ++r)
      for (std::size_t c = r; c < dd; ++c)
        for (int part = 0; part < (r == c ? 1 : 2); ++part) {
          std::vector<mpq_class> row(vars, 0);
          for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
              const cplx v = pair[j * m + k](r, c);
              double comp = part == 0 ? v.real() : v.imag();
              if (comp != 0.0) row[var(i, j, k)] = mpq_class(comp);
            }
          double target = part == 0 ? sigma(r, c).real() : sigma(r, c).imag();
          mpq_class b(target);
          std::vector<mpq_class> row2 = row;
          lp.add_row(std::move(row), RowSense::ge, b - tol);
          lp.add_row(std::move(row2), RowSense::le, b + tol);
        }
  }
  // Eq-(4b): shared-site marginal consistency, exact.
  for (int i = 0; i + 1 < edges; ++i)
    for (int t = 0; t < m; ++t) {
      std::vector<mpq_class> row(vars, 0);
      for (int j = 0; j < m; ++j) row[var(i, j, t)] += 1;
      for (int k = 0; k < m; ++k) row[var(i + 1, t, k)] -= 1;
      lp.add_row(std::move(row), RowSense::eq, 0);
    }
  // Eq-(4d): normalization, exact.
  for (int i = 0; i < edges; ++i) {
    std::vector<mpq_class> row(vars, 0);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) row[var(i, j, k)] = 1;
    lp.add_row(std::move(row), RowSense::eq, 1);
  }

  LpResult r = solve_feasibility(lp);
  LpOutcome out;
  out.pivots = r.pivots;
  if (r.status == LpStatus::infeasible) {
    out.status = LpOutcomeStatus::infeasible;
    return out;
  }
  out.status = LpOutcomeStatus::feasible;
  out.solution.m = m;
  out.solution.edges = edges;
  out.solution.p = std::move(r.solution);
  double worst = 0.0;
  for (int i = 0; i < edges; ++i) {
    ComplexMatrix mix(dd, dd);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double w = out.solution.p[var(i, j, k)].get_d();
        if (w != 0.0) {
          const auto& pm = pair[j * m + k];
          for (std::size_t e = 0; e < mix.data().size(); ++e) mix.data()[e] += w * pm.data()[e];
        }
      }
    mix -= inst.sigmas[i];
    worst = std::max(worst, mix.max_abs());
  }
  out.solution.max_residual = worst;
  return out;
}

double edge_residual(const ComplexMatrix& sigma, const WeightMatrix& n,
                     const SnapshotAlphabet& alphabet) {
  const int m = static_cast<int>(alphabet.size());
  require(n.m == m, ErrorKind::invalid_input, "weight matrix does not match alphabet");
  const std::size_t dd = sigma.rows();
  std::vector<cplx> buf(sigma.data());
  const double inv = 1.0 / static_cast<double>(n.total);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      if (n.counts[j * m + k] == 0) continue;
      double w = inv * static_cast<double>(n.counts[j * m + k]);
      const ComplexMatrix& ej = alphabet.etas[j];
      const ComplexMatrix& ek = alphabet.etas[k];
      const std::size_t dk = ek.rows();
      for (std::size_t r = 0; r < dd; ++r)
        for (std::size_t c = 0; c < dd; ++c)
          buf[r * dd + c] -= w * ej(r / dk, c / dk) * ek(r % dk, c % dk);
    }
  return trace_norm_small(buf, static_cast<int>(dd));
}

std::uint64_t weight_domain_size(int m, std::int64_t L) {
  const int cells = m * m;
  unsigned __int128 num = 1;
  for (int i = 1; i <= cells - 1; ++i) {
    num = num * static_cast<unsigned __int128>(L + i);
    num /= i;
    if (num > (static_cast<unsigned __int128>(1) << 62)) return ~std::uint64_t{0};
  }
  return static_cast<std::uint64_t>(num);
}

namespace {

struct FilterContext {
  const ComplexMatrix* sigma;
  std::vector<ComplexMatrix> scaled_pair;  // (eta_j (x) eta_k) / L
  double eps;
  int m;
  std::int64_t L;
};

void filter_dfs(const FilterContext& ctx, int cell, std::int64_t remaining,
                std::vector<std::int32_t>& counts, std::vector<cplx>& deficit,
                const std::vector<std::pair<std::int32_t, std::int32_t>>& bounds,
                const std::vector<std::int64_t>& cap_after, const std::vector<std::int64_t>& min_after,
                std::vector<WeightMatrix>& out) {
  const int cells = ctx.m * ctx.m;
  if (cell == cells - 1) {
    if (remaining < bounds[cell].first || remaining > bounds[cell].second) return;
    counts[cell] = static_cast<std::int32_t>(remaining);
    std::vector<cplx> leaf = deficit;
    if (remaining != 0) {
      const auto& pm = ctx.scaled_pair[cell];
      for (std::size_t e = 0; e < leaf.size(); ++e)
        leaf[e] -= static_cast<double>(remaining) * pm.data()[e];
    }
    double tn = trace_norm_small(leaf, static_cast<int>(ctx.sigma->rows()));
    if (tn <= ctx.eps + 1e-12) {
      WeightMatrix w;
      w.m = ctx.m;
      w.total = ctx.L;
      w.counts = counts;
      out.push_back(std::move(w));
    }
    return;
  }
  for (std::int64_t v = bounds[cell].first;
       v <= std::min<std::int64_t>(bounds[cell].second, remaining); ++v) {
    std::int64_t rest = remaining - v;
    if (rest > cap_after[cell] || rest < min_after[cell]) continue;
    counts[cell] = static_cast<std::int32_t>(v);
    if (v != 0) {
      const auto& pm = ctx.scaled_pair[cell];
      for (std::size_t e = 0; e < deficit.size(); ++e)
        deficit[e] -= static_cast<double>(v) * pm.data()[e];
    }
    filter_dfs(ctx, cell + 1, rest, counts, deficit, bounds, cap_after, min_after, out);
    if (v != 0) {
      const auto& pm = ctx.scaled_pair[cell];
      for (std::size_t e = 0; e < deficit.size(); ++e)
        deficit[e] += static_cast<double>(v) * pm.data()[e];
    }
  }
}

}  // namespace

std::vector<WeightMatrix> trace_filter(const ComplexMatrix& sigma, std::int64_t L, double eps,
                                       const SnapshotAlphabet& alphabet,
                                       const std::optional<WeightMatrix>& center, int ball_radius,
                                       int threads) {
  const int m = static_cast<int>(alphabet.size());
  const int cells = m * m;
  require(L >= 1, ErrorKind::invalid_input, "denominator L must be >= 1");

  FilterContext ctx;
  ctx.sigma = &sigma;
  ctx.eps = eps;
  ctx.m = m;
  ctx.L = L;
  ctx.scaled_pair.resize(cells);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      ComplexMatrix p = kron(alphabet.etas[j], alphabet.etas[k]);
      p *= cplx(1.0 / static_cast<double>(L), 0.0);
      ctx.scaled_pair[j * m + k] = std::move(p);
    }

  std::vector<std::pair<std::int32_t, std::int32_t>> bounds(cells);
  if (m <= 3) {
    require(weight_domain_size(m, L) <= budgets().dp_domain, ErrorKind::budget_exceeded,
            "trace_filter: enumeration domain exceeds the budget");
    for (int c = 0; c < cells; ++c) bounds[c] = {0, static_cast<std::int32_t>(L)};
  } else {
    require(center.has_value(), ErrorKind::invalid_input,
            "trace_filter: alphabets with m > 3 require a pruning center");
    require(center->m == m && center->total == L, ErrorKind::invalid_input,
            "trace_filter: center shape mismatch");
    double interval_product = 1.0;
    for (int c = 0; c < cells; ++c) {
      std::int32_t ctr = center->counts[c];
      bounds[c] = {std::max<std::int32_t>(0, ctr - ball_radius),
                   static_cast<std::int32_t>(std::min<std::int64_t>(L, ctr + ball_radius))};
      interval_product = std::min(interval_product * (bounds[c].second - bounds[c].first + 1),
                                  1e30);
    }
    // The sum constraint caps the ball by the full balls-and-bars count.
    double est = std::min(interval_product, static_cast<double>(weight_domain_size(m, L)));
    require(est <= static_cast<double>(budgets().dp_domain), ErrorKind::budget_exceeded,
            "trace_filter: pruning ball exceeds the budget");
  }

  std::vector<std::int64_t> cap_after(cells, 0), min_after(cells, 0);
  for (int c = cells - 2; c >= 0; --c) {
    cap_after[c] = cap_after[c + 1] + bounds[c + 1].second;
    min_after[c] = min_after[c + 1] + bounds[c + 1].first;
  }

  // Parallel split on the first cell value; branch outputs concatenated in
  // order for a deterministic result.
  const auto [lo0, hi0] = bounds[0];
  std::vector<std::vector<WeightMatrix>> branch(hi0 - lo0 + 1);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t v0 = lo0; v0 <= hi0; ++v0) {
    if (v0 > L) continue;
    std::vector<std::int32_t> counts(cells, 0);
    counts[0] = static_cast<std::int32_t>(v0);
    std::vector<cplx> deficit(sigma.data());
    if (v0 != 0) {
      const auto& pm = ctx.scaled_pair[0];
      for (std::size_t e = 0; e < deficit.size(); ++e)
        deficit[e] -= static_cast<double>(v0) * pm.data()[e];
    }
    std::int64_t rest = L - v0;
    if (cells == 1) {
      if (rest == 0) {
        double tn = trace_norm_small(deficit, static_cast<int>(sigma.rows()));
        if (tn <= eps + 1e-12) {
          WeightMatrix w;
          w.m = m;
          w.total = L;
          w.counts = counts;
          branch[v0 - lo0].push_back(std::move(w));
        }
      }
    } else if (rest <= cap_after[0] && rest >= min_after[0]) {
      filter_dfs(ctx, 1, rest, counts, deficit, bounds, cap_after, min_after, branch[v0 - lo0]);
    }
  }
  std::vector<WeightMatrix> out;
  std::size_t total = 0;
  for (const auto& b : branch) total += b.size();
  require(total <= budgets().dp_domain, ErrorKind::budget_exceeded,
          "trace_filter: survivor set exceeds the budget");
  out.reserve(total);
  for (auto& b : branch)
    for (auto& w : b) out.push_back(std::move(w));
  return out;
}

DpResult dp_solve(const std::vector<std::vector<WeightMatrix>>& filters) {
  require(!filters.empty(), ErrorKind::invalid_input, "dp_solve: empty filter list");
  DpResult res;
  const std::size_t edges = filters.size();

  std::vector<std::vector<std::size_t>> frontier(edges);
  std::vector<std::map<std::vector<std::int64_t>, std::size_t>> colsig(edges);

  for (std::size_t idx = 0; idx < filters[0].size(); ++idx) frontier[0].push_back(idx);
  res.frontier_sizes.push_back(frontier[0].size());
  if (frontier[0].empty()) return res;
  for (std::size_t idx : frontier[0]) colsig[0].emplace(filters[0][idx].col_sums(), idx);

  for (std::size_t i = 1; i < edges; ++i) {
    for (std::size_t idx = 0; idx < filters[i].size(); ++idx)
      if (colsig[i - 1].count(filters[i][idx].row_sums())) frontier[i].push_back(idx);
    res.frontier_sizes.push_back(frontier[i].size());
    if (frontier[i].empty()) return res;
    for (std::size_t idx : frontier[i]) colsig[i].emplace(filters[i][idx].col_sums(), idx);
  }

  res.accepted = true;
  res.sequence.resize(edges);
  res.sequence[edges - 1] = filters[edges - 1][frontier[edges - 1].front()];
  for (std::size_t i = edges - 1; i-- > 0;) {
    auto it = colsig[i].find(res.sequence[i + 1].row_sums());
    require(it != colsig[i].end(), ErrorKind::solver_failure, "dp backtrack lost the trail");
    res.sequence[i] = filters[i][it->second];
  }
  return res;
}

Shadow stitch_global_shadow(const std::vector<WeightMatrix>& seq, const SnapshotAlphabet& alphabet,
                            std::int64_t L) {
  require(!seq.empty(), ErrorKind::invalid_input, "stitch: empty sequence");
  const int m = static_cast<int>(alphabet.size());
  const std::size_t edges = seq.size();
  for (std::size_t i = 0; i < edges; ++i) {
    require(seq[i].m == m && seq[i].total == L, ErrorKind::invalid_input,
            "stitch: weight matrix shape mismatch");
    if (i + 1 < edges)
      require(marginal_match(seq[i], seq[i + 1]), ErrorKind::invalid_input,
              "stitch: sequence violates the marginal-match relation");
  }
  const int sites = static_cast<int>(edges) + 1;

  auto expand = [&](const WeightMatrix& w) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(L);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (std::int32_t c = 0; c < w.counts[j * m + k]; ++c) pairs.emplace_back(j, k);
    return pairs;
  };

  std::vector<std::vector<int>> site_label(sites, std::vector<int>(L));
  auto edge0 = expand(seq[0]);
  for (std::int64_t l = 0; l < L; ++l) {
    site_label[0][l] = edge0[l].first;
    site_label[1][l] = edge0[l].second;
  }
  // Greedy bucket matching: rounds with right label t on edge i receive, in
  // order, the edge-(i+1) pairs with left label t; a perfect matching exists
  // because the marginals agree.
  for (std::size_t i = 1; i < edges; ++i) {
    auto pairs = expand(seq[i]);
    std::vector<std::vector<std::size_t>> bucket(m);
    for (std::size_t p = 0; p < pairs.size(); ++p) bucket[pairs[p].first].push_back(p);
    std::vector<std::size_t> next(m, 0);
    for (std::int64_t l = 0; l < L; ++l) {
      int t = site_label[i][l];
      require(next[t] < bucket[t].size(), ErrorKind::solver_failure,
              "stitch: bucket matching failed despite matching marginals");
      site_label[i + 1][l] = pairs[bucket[t][next[t]++]].second;
    }
  }

  Shadow s;
  s.K = 1;
  s.d = alphabet.qudit ? alphabet.d : 2;
  s.protocol = alphabet.qudit ? Protocol::local_qudit : Protocol::local_qubit;
  s.n = alphabet.qudit ? sites : sites * alphabet.ell;
  s.local_records.resize(L);
  for (std::int64_t l = 0; l < L; ++l) {
    LocalRecord rec;
    for (int site = 0; site < sites; ++site) {
      const LocalRecord& letter = alphabet.site_records[site_label[site][l]];
      rec.bases.insert(rec.bases.end(), letter.bases.begin(), letter.bases.end());
      rec.outcomes.insert(rec.outcomes.end(), letter.outcomes.begin(), letter.outcomes.end());
    }
    s.local_records[l] = std::move(rec);
  }
  return s;
}

namespace {

WeightMatrix round_center(const LpSolution& lp, int edge, std::int64_t L) {
  const int m = lp.m;
  WeightMatrix w;
  w.m = m;
  w.total = L;
  w.counts.assign(m * m, 0);
  std::vector<std::pair<double, int>> frac(m * m);
  std::int64_t sum = 0;
  for (int c = 0; c < m * m; ++c) {
    double exact = L * lp.p[(static_cast<std::size_t>(edge) * m * m) + c].get_d();
    std::int32_t v = static_cast<std::int32_t>(std::max(0.0, std::floor(exact + 0.5)));
    w.counts[c] = v;
    sum += v;
    frac[c] = {exact - v, c};
  }
  // Adjustment sweep: fix the total by nudging the cells with the largest
  // (respectively smallest) rounding remainders.
  std::sort(frac.begin(), frac.end());
  std::int64_t diff = L - sum;
  int guard = 0;
  while (diff != 0 && guard++ < 4 * m * m) {
    if (diff > 0) {
      for (int idx = m * m - 1; idx >= 0 && diff > 0; --idx) {
        w.counts[frac[idx].second] += 1;
        --diff;
      }
    } else {
      for (int idx = 0; idx < m * m && diff < 0; ++idx)
        if (w.counts[frac[idx].second] > 0) {
          w.counts[frac[idx].second] -= 1;
          ++diff;
        }
    }
  }
  require(diff == 0, ErrorKind::solver_failure, "center rounding could not reach the total");
  return w;
}

std::vector<ObsHandle> pair_observables(const CldmInstance& inst, int edge) {
  std::vector<ObsHandle> out;
  if (!inst.qudit_mode()) {
    const int ell = inst.ell();
    const int total_qubits = inst.n * ell;
    const int offset = edge * ell;
    const int width = 2 * ell;
    const char* letters = "IXYZ";
    std::size_t combos = 1;
    for (int i = 0; i < width; ++i) combos *= 4;
    for (std::size_t c = 1; c < combos; ++c) {  // skip the identity
      std::string s(total_qubits, 'I');
      std::size_t rem = c;
      for (int q = 0; q < width; ++q) {
        s[offset + q] = letters[rem % 4];
        rem /= 4;
      }
      out.push_back(PauliString::qubit(s));
    }
  } else {
    const int d = inst.d;
    auto neg4 = [&](const std::array<int, 4>& v) {
      std::array<int, 4> w;
      for (int i = 0; i < 4; ++i) w[i] = (d - v[i]) % d;
      return w;
    };
    for (int a1 = 0; a1 < d; ++a1)
      for (int b1 = 0; b1 < d; ++b1)
        for (int a2 = 0; a2 < d; ++a2)
          for (int b2 = 0; b2 < d; ++b2) {
            std::array<int, 4> v{a1, b1, a2, b2};
            if (v == std::array<int, 4>{0, 0, 0, 0}) continue;
            if (neg4(v) < v) continue;  // one representative of {v, -v}
            std::vector<std::pair<int, int>> labels(inst.n, {0, 0});
            labels[edge] = {a1, b1};
            labels[edge + 1] = {a2, b2};
            PauliString p = PauliString::qudit(d, labels);
            out.push_back(WeylPart{p, false});
            out.push_back(WeylPart{p, true});
          }
  }
  return out;
}

ObsConInstance trivial_no_instance(const CldmInstance& inst, double alpha, double beta) {
  ObsConInstance no;
  no.alpha = alpha;
  no.beta = beta;
  if (!inst.qudit_mode()) {
    const int total_qubits = inst.n * inst.ell();
    no.n = total_qubits;
    no.d = 2;
    no.dim = std::size_t{1} << total_qubits;
    std::string z(total_qubits, 'I');
    z[0] = 'Z';
    no.observables = {PauliString::qubit(z), PauliString::qubit(z)};
  } else {
    no.n = inst.n;
    no.d = inst.d;
    no.dim = 1;
    for (int i = 0; i < inst.n; ++i) no.dim *= static_cast<std::size_t>(inst.d);
    std::vector<std::pair<int, int>> labels(inst.n, {0, 0});
    labels[0] = {0, 1};  // Weyl Z on site 1
    PauliString p = PauliString::qudit(inst.d, labels);
    no.observables = {WeylPart{p, false}, WeylPart{p, false}};
  }
  no.targets = {1.0, -1.0};  // same observable, contradictory targets: chi* = 1
  return no;
}

}  // namespace

ReduceResult reduce(const CldmInstance& inst, std::int64_t L, double eps,
                    const SnapshotAlphabet& alphabet, int chi_bits, int ball_radius, int threads) {
  inst.validate();
  require(eps >= 0.0, ErrorKind::invalid_input, "eps must be nonnegative");
  ReduceResult res;
  res.report["L"] = L;
  res.report["eps"] = eps;
  res.report["m"] = alphabet.size();
  res.report["chi_bits"] = chi_bits;

  const double rounding = std::ldexp(1.0, -chi_bits);
  double conv = inst.qudit_mode() ? 1.0 / (2.0 * std::pow(static_cast<double>(inst.d), 4))
                                  : 1.0 / std::pow(4.0, 2 * inst.ell());
  double alpha_csv = inst.alpha + eps + rounding;
  double beta_csv = inst.beta * conv - eps - rounding;
  require(alpha_csv < beta_csv, ErrorKind::invalid_input,
          "reduce: derived CSV thresholds have no gap; lower eps or widen the source gap");
  res.report["alpha_csv"] = alpha_csv;
  res.report["beta_csv"] = beta_csv;

  LpOutcome lp = solve_marginal_lp(inst, alphabet);
  res.report["lp_pivots"] = lp.pivots;
  if (lp.status == LpOutcomeStatus::infeasible) {
    res.report["lp"] = "infeasible";
    res.trivial_no = true;
    res.instance = trivial_no_instance(inst, alpha_csv, beta_csv);
    return res;
  }
  res.report["lp"] = "feasible";
  res.report["lp_residual"] = lp.solution.max_residual;

  const int m = static_cast<int>(alphabet.size());
  std::vector<std::vector<WeightMatrix>> filters(inst.n - 1);
  nlohmann::json usizes = nlohmann::json::array();
  for (int i = 0; i < inst.n - 1; ++i) {
    std::optional<WeightMatrix> center;
    if (m > 3) center = round_center(lp.solution, i, L);
    filters[i] = trace_filter(inst.sigmas[i], L, eps, alphabet, center, ball_radius, threads);
    usizes.push_back(filters[i].size());
  }
  res.report["filter_sizes"] = usizes;

  DpResult dp = dp_solve(filters);
  res.report["dp_frontier_sizes"] = dp.frontier_sizes;
  if (!dp.accepted) {
    res.report["dp"] = "reject";
    res.trivial_no = true;
    res.instance = trivial_no_instance(inst, alpha_csv, beta_csv);
    return res;
  }
  res.report["dp"] = "accept";

  Shadow shadow = stitch_global_shadow(dp.sequence, alphabet, L);
  std::vector<ObsHandle> obs;
  for (int i = 0; i < inst.n - 1; ++i) {
    auto edge_obs = pair_observables(inst, i);
    obs.insert(obs.end(), edge_obs.begin(), edge_obs.end());
  }
  res.report["observable_count"] = obs.size();
  res.instance = instance_from_shadow(shadow, std::move(obs), shadow.K, chi_bits, alpha_csv,
                                      beta_csv, threads);
  res.shadow = std::move(shadow);
  return res;
}

}  // namespace shadowval
