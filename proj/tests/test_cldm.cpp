#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <set>

#include "shadowval/cldm.hpp"
#include "test_util.hpp"

using namespace shadowval;
using testutil::max_abs_diff;

namespace {

// sigma = (w . eta) (x) (w' . eta) for per-site mixtures over the alphabet.
ComplexMatrix mixture_sigma(const SnapshotAlphabet& a, const std::vector<double>& wl,
                            const std::vector<double>& wr) {
  ComplexMatrix left(a.d, a.d), right(a.d, a.d);
  for (std::size_t j = 0; j < a.size(); ++j) {
    ComplexMatrix t = a.etas[j];
    t *= cplx(wl[j], 0.0);
    left += t;
    t = a.etas[j];
    t *= cplx(wr[j], 0.0);
    right += t;
  }
  return kron(left, right);
}

}  // namespace

TEST_CASE("qubit alphabet enumeration") {
  SnapshotAlphabet full = enumerate_alphabet(1);
  CHECK(full.size() == 6);
  for (const auto& eta : full.etas) CHECK(std::abs(eta.trace() - cplx(1, 0)) < 1e-14);

  SnapshotAlphabet zonly = enumerate_alphabet(1, {4, 5});
  REQUIRE(zonly.size() == 2);
  CHECK(std::abs(zonly.etas[0](0, 0) - cplx(2, 0)) < 1e-14);
  CHECK(std::abs(zonly.etas[0](1, 1) - cplx(-1, 0)) < 1e-14);
  CHECK(std::abs(zonly.etas[1](0, 0) - cplx(-1, 0)) < 1e-14);
  CHECK(std::abs(zonly.etas[1](1, 1) - cplx(2, 0)) < 1e-14);

  SnapshotAlphabet two = enumerate_alphabet(2);
  CHECK(two.size() == 36);
  CHECK(two.etas[0].rows() == 4);

  CHECK_THROWS_AS(enumerate_alphabet(1, {7}), Error);
}

TEST_CASE("qudit alphabet: 12 letters for d=3, uniform average is I/3") {
  SnapshotAlphabet a = enumerate_alphabet_qudit(3);
  REQUIRE(a.size() == 12);
  ComplexMatrix avg(3, 3);
  for (const auto& eta : a.etas) {
    CHECK(std::abs(eta.trace() - cplx(1, 0)) < 1e-12);
    avg += eta;
  }
  avg *= cplx(1.0 / 12.0, 0.0);
  ComplexMatrix third = ComplexMatrix::identity(3);
  third *= cplx(1.0 / 3.0, 0.0);
  CHECK(max_abs_diff(avg, third) < 1e-12);
}

TEST_CASE("marginal_match basics") {
  WeightMatrix a{2, 2, {1, 0, 0, 1}};
  WeightMatrix b{2, 2, {1, 1, 0, 0}};
  CHECK(marginal_match(a, a));
  CHECK_FALSE(marginal_match(a, b));

  WeightMatrix u{2, 4, {1, 1, 1, 1}};
  CHECK(marginal_match(u, u));

  // random pairs vs an independent summation oracle
  RngStream r(1, stream_label("mm"), 0);
  for (int t = 0; t < 60; ++t) {
    int m = 2 + static_cast<int>(r.below(2));
    WeightMatrix x{m, 0, std::vector<std::int32_t>(m * m)};
    WeightMatrix y{m, 0, std::vector<std::int32_t>(m * m)};
    for (auto& c : x.counts) {
      c = static_cast<std::int32_t>(r.below(4));
      x.total += c;
    }
    for (auto& c : y.counts) {
      c = static_cast<std::int32_t>(r.below(4));
      y.total += c;
    }
    if (x.total != y.total) continue;
    bool expect = true;
    for (int k = 0; k < m && expect; ++k) {
      std::int64_t cs = 0, rs = 0;
      for (int j = 0; j < m; ++j) {
        cs += x.counts[j * m + k];
        rs += y.counts[k * m + j];
      }
      expect = (cs == rs);
    }
    CHECK(marginal_match(x, y) == expect);
  }
}

TEST_CASE("LP: maximally mixed marginals are feasible") {
  SnapshotAlphabet a = enumerate_alphabet(1);
  CldmInstance inst;
  inst.d = 2;
  inst.n = 3;
  inst.alpha = 0.05;
  inst.beta = 1.9;
  ComplexMatrix quarter = ComplexMatrix::identity(4);
  quarter *= cplx(0.25, 0.0);
  inst.sigmas = {quarter, quarter};
  LpOutcome out = solve_marginal_lp(inst, a);
  REQUIRE(out.status == LpOutcomeStatus::feasible);
  CHECK(out.solution.max_residual <= 1e-7 + 1e-12);
  mpq_class total = 0;
  for (const auto& q : out.solution.p) {
    CHECK(q >= 0);
    total += q;
  }
  CHECK(total == 2);  // one unit of probability per edge
}

TEST_CASE("LP: forward-generated mixture is recovered feasibly") {
  SnapshotAlphabet a = enumerate_alphabet(1, {0, 4, 5});  // X+, Z+, Z-
  CldmInstance inst;
  inst.d = 2;
  inst.n = 2;
  inst.alpha = 0.05;
  inst.beta = 1.9;
  inst.sigmas = {mixture_sigma(a, {0.1, 0.5, 0.4}, {0.2, 0.4, 0.4})};
  LpOutcome out = solve_marginal_lp(inst, a);
  REQUIRE(out.status == LpOutcomeStatus::feasible);
  CHECK(out.solution.max_residual <= 1e-7 + 1e-12);
}

TEST_CASE("LP: contradictory shared-site marginals are infeasible") {
  SnapshotAlphabet a = enumerate_alphabet(1, {4, 5});  // Z basis, m = 2
  CldmInstance inst;
  inst.d = 2;
  inst.n = 3;
  inst.alpha = 0.05;
  inst.beta = 1.9;
  ComplexMatrix s00(4, 4), s10(4, 4);
  s00(0, 0) = 1.0;  // |00><00|
  s10(2, 2) = 1.0;  // site2 = |1>, site3 = |0>
  inst.sigmas = {s00, s10};
  LpOutcome out = solve_marginal_lp(inst, a);
  CHECK(out.status == LpOutcomeStatus::infeasible);
}

TEST_CASE("trace_filter: vacuous, exact, and empty regimes") {
  SnapshotAlphabet a = enumerate_alphabet(1, {4, 5});
  const std::int64_t L = 4;
  ComplexMatrix sigma = mixture_sigma(a, {0.5, 0.5}, {0.5, 0.5});  // I/4
  // loose bound: every domain element passes
  auto all = trace_filter(sigma, L, 50.0, a);
  CHECK(all.size() == weight_domain_size(2, L));
  // eps = 0: exactly the exact representations; the diagonal span makes the
  // representation unique, so the all-ones matrix is the single survivor
  auto exact = trace_filter(sigma, L, 0.0, a);
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].counts == std::vector<std::int32_t>{1, 1, 1, 1});
  for (const auto& w : exact) CHECK(edge_residual(sigma, w, a) <= 1e-12);
  std::size_t exact_by_scan = 0;
  for (const auto& w : all)
    if (edge_residual(sigma, w, a) <= 1e-12) ++exact_by_scan;
  CHECK(exact.size() == exact_by_scan);
  // eps below the best achievable residual: empty set
  ComplexMatrix off = sigma;
  off(0, 0) += 0.013;
  off(3, 3) -= 0.013;
  double best = 1e9;
  for (const auto& w : all) best = std::min(best, edge_residual(off, w, a));
  CHECK(best > 1e-6);
  auto none = trace_filter(off, L, best * 0.5, a);
  CHECK(none.empty());
}

TEST_CASE("trace_filter is deterministic across thread counts") {
  SnapshotAlphabet a = enumerate_alphabet(1, {0, 4, 5});
  ComplexMatrix sigma = mixture_sigma(a, {0.25, 0.5, 0.25}, {0.25, 0.25, 0.5});
  auto s1 = trace_filter(sigma, 6, 0.3, a, std::nullopt, 2, 1);
  auto s4 = trace_filter(sigma, 6, 0.3, a, std::nullopt, 2, 4);
  REQUIRE(s1.size() == s4.size());
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].counts == s4[i].counts);
}

TEST_CASE("trace_filter budget is enforced") {
  SnapshotAlphabet a = enumerate_alphabet(1, {4, 5});
  ComplexMatrix sigma = mixture_sigma(a, {0.5, 0.5}, {0.5, 0.5});
  auto saved = budgets().dp_domain;
  budgets().dp_domain = 10;
  CHECK_THROWS_AS(trace_filter(sigma, 50, 1.0, a), Error);
  budgets().dp_domain = saved;
}

TEST_CASE("pruned mode explores an l-infinity ball around the center") {
  SnapshotAlphabet a = enumerate_alphabet(1);  // m = 6 > 3: pruned mode
  // sigma = I/2 (x) |+i><+i| = (u/2 . eta) (x) (v/3 . eta) for
  // u = (X+, X-), v = (X+, X-, Y+); center = u (x) v at L = 6.
  std::vector<double> wl = {0.5, 0.5, 0, 0, 0, 0}, wr = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0};
  ComplexMatrix sigma = mixture_sigma(a, wl, wr);
  WeightMatrix center{6, 6, std::vector<std::int32_t>(36, 0)};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 3; ++k) center.counts[j * 6 + k] = 1;
  CHECK(edge_residual(sigma, center, a) < 1e-12);
  auto res = trace_filter(sigma, 6, 1e-9, a, center, 1);
  CHECK(!res.empty());
  bool has_center = false;
  for (const auto& w : res) {
    for (int c = 0; c < 36; ++c) CHECK(std::abs(w.counts[c] - center.counts[c]) <= 1);
    has_center = has_center || w.counts == center.counts;
  }
  CHECK(has_center);
  // without a center the pruned mode refuses
  CHECK_THROWS_AS(trace_filter(sigma, 6, 1e-9, a), Error);
}

TEST_CASE("domain size formula matches enumeration counts") {
  for (int m : {2, 3}) {
    for (std::int64_t L : {1, 2, 5, 10}) {
      SnapshotAlphabet a =
          m == 2 ? enumerate_alphabet(1, {4, 5}) : enumerate_alphabet(1, {0, 4, 5});
      ComplexMatrix sigma = m == 2 ? mixture_sigma(a, {0.5, 0.5}, {0.5, 0.5})
                                   : mixture_sigma(a, {0.2, 0.4, 0.4}, {0.4, 0.3, 0.3});
      auto all = trace_filter(sigma, L, 100.0, a);
      CHECK(all.size() == weight_domain_size(m, L));
    }
  }
}

TEST_CASE("dp_solve basics") {
  WeightMatrix a{2, 3, {1, 1, 1, 0}};
  WeightMatrix b{2, 3, {2, 0, 1, 0}};
  DpResult r = dp_solve({{a, b}});
  REQUIRE(r.accepted);
  CHECK(r.sequence[0].counts == a.counts);

  WeightMatrix n1{2, 3, {2, 1, 0, 0}};  // colsums (2,1)
  WeightMatrix n2{2, 3, {1, 1, 1, 0}};  // rowsums (2,1), colsums (2,1)
  WeightMatrix n3{2, 3, {2, 0, 1, 0}};  // rowsums (2,1)
  DpResult forced = dp_solve({{n1}, {n2}, {n3}});
  REQUIRE(forced.accepted);
  CHECK(forced.sequence[0].counts == n1.counts);
  CHECK(forced.sequence[1].counts == n2.counts);
  CHECK(forced.sequence[2].counts == n3.counts);
  CHECK(forced.frontier_sizes == std::vector<std::size_t>{1, 1, 1});

  WeightMatrix bad{2, 3, {0, 0, 3, 0}};  // rowsums (0,3)
  DpResult rej = dp_solve({{n1}, {bad}});
  CHECK_FALSE(rej.accepted);
}

TEST_CASE("dp_solve matches exhaustive sequence enumeration") {
  RngStream r(2, stream_label("dp"), 0);
  SnapshotAlphabet a2 = enumerate_alphabet(1, {4, 5});
  SnapshotAlphabet a3 = enumerate_alphabet(1, {0, 4, 5});
  for (int trial = 0; trial < 60; ++trial) {
    int m = (trial % 2 == 0) ? 2 : 3;
    int edges = 1 + static_cast<int>(r.below(3));
    std::int64_t L = 1 + static_cast<std::int64_t>(r.below(6));
    const SnapshotAlphabet& a = (m == 2) ? a2 : a3;
    ComplexMatrix sigma = (m == 2) ? mixture_sigma(a, {0.5, 0.5}, {0.5, 0.5})
                                   : mixture_sigma(a, {0.25, 0.5, 0.25}, {0.5, 0.25, 0.25});
    auto domain = trace_filter(sigma, L, 100.0, a);  // the full domain
    std::vector<std::vector<WeightMatrix>> filters(edges);
    for (int i = 0; i < edges; ++i) {
      for (const auto& w : domain)
        if (r.uniform() < 0.2) filters[i].push_back(w);
      if (filters[i].size() > 40) filters[i].resize(40);
    }
    DpResult got = dp_solve(filters);
    // exhaustive DFS over all sequences with pairwise checks
    std::vector<std::size_t> pick(edges, 0);
    bool any = false;
    std::function<void(int)> rec = [&](int i) {
      if (any) return;
      if (i == edges) {
        any = true;
        return;
      }
      for (std::size_t idx = 0; idx < filters[i].size(); ++idx) {
        if (i > 0 && !marginal_match(filters[i - 1][pick[i - 1]], filters[i][idx])) continue;
        pick[i] = idx;
        rec(i + 1);
        if (any) return;
      }
    };
    rec(0);
    CHECK(got.accepted == any);
    if (got.accepted) {
      for (int i = 0; i < edges; ++i) {
        bool member = false;
        for (const auto& w : filters[i]) member = member || (w.counts == got.sequence[i].counts);
        CHECK(member);
        if (i > 0) CHECK(marginal_match(got.sequence[i - 1], got.sequence[i]));
      }
    }
  }
}

TEST_CASE("stitching: single edge expands the weight matrix exactly") {
  SnapshotAlphabet a = enumerate_alphabet(1, {4, 5});
  WeightMatrix n{2, 4, {1, 2, 0, 1}};
  Shadow s = stitch_global_shadow({n}, a, 4);
  CHECK(s.n == 2);
  REQUIRE(s.local_records.size() == 4);
  std::multiset<std::pair<int, int>> got;
  for (const auto& rec : s.local_records) {
    got.insert({rec.outcomes[0] == 1 ? 0 : 1, rec.outcomes[1] == 1 ? 0 : 1});
  }
  std::multiset<std::pair<int, int>> expect = {{0, 0}, {0, 1}, {0, 1}, {1, 1}};
  CHECK(got == expect);
}

TEST_CASE("stitching identity holds exactly in rational arithmetic") {
  RngStream r(3, stream_label("stitch"), 0);
  SnapshotAlphabet a = enumerate_alphabet(1, {0, 4, 5});
  const int m = 3;
  const std::int64_t L = 12;
  for (int trial = 0; trial < 20; ++trial) {
    auto random_with_rowsums = [&](const std::vector<std::int64_t>& rows) {
      WeightMatrix w{m, L, std::vector<std::int32_t>(m * m, 0)};
      for (int j = 0; j < m; ++j) {
        std::int64_t rem = rows[j];
        for (int k = 0; k < m - 1; ++k) {
          std::int64_t v = static_cast<std::int64_t>(r.below(rem + 1));
          w.counts[j * m + k] = static_cast<std::int32_t>(v);
          rem -= v;
        }
        w.counts[j * m + m - 1] = static_cast<std::int32_t>(rem);
      }
      return w;
    };
    std::vector<std::int64_t> first(m, 0);
    for (std::int64_t l = 0; l < L; ++l) first[r.below(m)]++;
    std::vector<WeightMatrix> seq;
    seq.push_back(random_with_rowsums(first));
    for (int e = 1; e < 3; ++e) seq.push_back(random_with_rowsums(seq.back().col_sums()));

    Shadow s = stitch_global_shadow(seq, a, L);
    CHECK(s.n == 4);
    for (int e = 0; e < 3; ++e) {
      const std::size_t dd = 4;
      std::vector<mpq_class> emp_re(dd * dd, 0), emp_im(dd * dd, 0);
      for (const auto& rec : s.local_records) {
        auto letter_at = [&](int site) -> std::size_t {
          for (std::size_t idx = 0; idx < a.size(); ++idx)
            if (a.site_records[idx].bases[0] == rec.bases[site] &&
                a.site_records[idx].outcomes[0] == rec.outcomes[site])
              return idx;
          throw Error(ErrorKind::invalid_input, "label not in alphabet");
        };
        ComplexMatrix pairm = kron(a.etas[letter_at(e)], a.etas[letter_at(e + 1)]);
        for (std::size_t q = 0; q < dd * dd; ++q) {
          emp_re[q] += mpq_class(pairm.data()[q].real());
          emp_im[q] += mpq_class(pairm.data()[q].imag());
        }
      }
      std::vector<mpq_class> mix_re(dd * dd, 0), mix_im(dd * dd, 0);
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          std::int32_t c = seq[e].counts[j * m + k];
          if (c == 0) continue;
          ComplexMatrix pairm = kron(a.etas[j], a.etas[k]);
          for (std::size_t q = 0; q < dd * dd; ++q) {
            mix_re[q] += c * mpq_class(pairm.data()[q].real());
            mix_im[q] += c * mpq_class(pairm.data()[q].imag());
          }
        }
      for (std::size_t q = 0; q < dd * dd; ++q) {
        CHECK(emp_re[q] == mix_re[q]);
        CHECK(emp_im[q] == mix_im[q]);
      }
    }
  }
}

TEST_CASE("uniform weight matrix represents the maximally mixed edge exactly") {
  SnapshotAlphabet a = enumerate_alphabet(1);  // full m = 6
  WeightMatrix uniform{6, 36, std::vector<std::int32_t>(36, 1)};
  ComplexMatrix quarter = ComplexMatrix::identity(4);
  quarter *= cplx(0.25, 0.0);
  CHECK(edge_residual(quarter, uniform, a) < 1e-12);
  Shadow s = stitch_global_shadow({uniform}, a, 36);
  std::set<std::vector<int>> seen;
  for (const auto& rec : s.local_records)
    seen.insert({rec.bases[0], rec.outcomes[0], rec.bases[1], rec.outcomes[1]});
  CHECK(seen.size() == 36);  // every pair exactly once
}

TEST_CASE("reduce: consistent product marginals give a YES CSV instance") {
  SnapshotAlphabet a = enumerate_alphabet(1, {0, 4, 5});
  CldmInstance inst;
  inst.d = 2;
  inst.n = 3;
  inst.alpha = 0.002;
  inst.beta = 1.96;
  std::vector<std::vector<double>> w = {{0.1, 0.5, 0.4}, {0.0, 0.5, 0.5}, {0.2, 0.4, 0.4}};
  inst.sigmas = {mixture_sigma(a, w[0], w[1]), mixture_sigma(a, w[1], w[2])};
  ReduceResult r = reduce(inst, 20, 0.05, a);
  REQUIRE_FALSE(r.trivial_no);
  REQUIRE(r.shadow.has_value());
  CHECK(r.shadow->local_records.size() == 20);
  CHECK(r.instance.size() == 2 * 15);  // nonidentity pair Paulis per edge
  Decision d = decide(r.instance);
  CHECK(d.verdict == "YES");
}

TEST_CASE("reduce: infeasible marginals give the trivial NO instance") {
  SnapshotAlphabet a = enumerate_alphabet(1, {4, 5});
  CldmInstance inst;
  inst.d = 2;
  inst.n = 3;
  inst.alpha = 0.002;
  inst.beta = 1.96;
  ComplexMatrix s00(4, 4), s10(4, 4);
  s00(0, 0) = 1.0;
  s10(2, 2) = 1.0;
  inst.sigmas = {s00, s10};
  ReduceResult r = reduce(inst, 20, 0.05, a);
  CHECK(r.trivial_no);
  CHECK(r.report["lp"] == "infeasible");
  Decision d = decide(r.instance);
  CHECK(d.verdict == "NO");
  CHECK(d.chi_star == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("cldm JSON round trip") {
  SnapshotAlphabet a = enumerate_alphabet(1, {4, 5});
  CldmInstance inst;
  inst.d = 2;
  inst.n = 2;
  inst.alpha = 0.1;
  inst.beta = 1.5;
  inst.sigmas = {mixture_sigma(a, {0.4, 0.6}, {0.5, 0.5})};
  auto j = cldm_to_json(inst);
  CldmInstance back = cldm_from_json(j);
  CHECK(cldm_to_json(back).dump() == j.dump());
}
