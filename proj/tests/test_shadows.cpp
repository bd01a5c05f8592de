#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "shadowval/shadows.hpp"
#include "test_util.hpp"

using namespace shadowval;
using testutil::max_abs_diff;

namespace {

DensityMatrix ket0() {
  ComplexMatrix m(2, 2);
  m(0, 0) = 1.0;
  return DensityMatrix(m);
}

DensityMatrix ketplus() {
  ComplexMatrix m(2, 2);
  m(0, 0) = m(0, 1) = m(1, 0) = m(1, 1) = 0.5;
  return DensityMatrix(m);
}

}  // namespace

TEST_CASE("local snapshot single-site values") {
  LocalRecord zplus{{2}, {1}};
  ComplexMatrix eta = local_snapshot_matrix(zplus);
  CHECK(std::abs(eta(0, 0) - cplx(2, 0)) < 1e-14);
  CHECK(std::abs(eta(1, 1) - cplx(-1, 0)) < 1e-14);

  LocalRecord xplus{{0}, {1}};
  ComplexMatrix ex = local_snapshot_matrix(xplus);
  CHECK(std::abs(ex(0, 0) - cplx(0.5, 0)) < 1e-14);
  CHECK(std::abs(ex(0, 1) - cplx(1.5, 0)) < 1e-14);
  CHECK(std::abs(ex(1, 0) - cplx(1.5, 0)) < 1e-14);
  CHECK(std::abs(ex(1, 1) - cplx(0.5, 0)) < 1e-14);
}

TEST_CASE("exact 6-record expectation reproduces a random 1-qubit state") {
  RngStream r(1, stream_label("exp1"), 0);
  DensityMatrix rho = testutil::random_density(2, r);
  ComplexMatrix e = oracles::exact_local_expectation(rho, 1);
  CHECK(max_abs_diff(e, rho.mat) < 1e-10);
}

TEST_CASE("exact local expectation reproduces a random 2-qubit state") {
  RngStream r(2, stream_label("exp2"), 0);
  DensityMatrix rho = testutil::random_density(4, r);
  ComplexMatrix e = oracles::exact_local_expectation(rho, 2);
  CHECK(max_abs_diff(e, rho.mat) < 1e-10);
}

TEST_CASE("sampling |0>: every Z-basis record reports +1") {
  Shadow s = sample_local_shadow(ket0(), 1, 500, 11);
  int zcount = 0;
  for (const auto& rec : s.local_records)
    if (rec.bases[0] == 2) {
      ++zcount;
      CHECK(rec.outcomes[0] == 1);
    }
  CHECK(zcount > 100);
}

TEST_CASE("sampling |+>: X records all +1, Z records fair within 3 sigma") {
  Shadow s = sample_local_shadow(ketplus(), 1, 6000, 12);
  int zplus = 0, ztot = 0;
  for (const auto& rec : s.local_records) {
    if (rec.bases[0] == 0) CHECK(rec.outcomes[0] == 1);
    if (rec.bases[0] == 2) {
      ++ztot;
      if (rec.outcomes[0] == 1) ++zplus;
    }
  }
  double p = static_cast<double>(zplus) / ztot;
  CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / ztot));
}

TEST_CASE("maximally mixed state: per-basis outcome frequencies are fair") {
  const int n = 2;
  Shadow s = sample_local_shadow(DensityMatrix::maximally_mixed(4), n, 10000, 13);
  for (int site = 0; site < n; ++site)
    for (int basis = 0; basis < 3; ++basis) {
      int plus = 0, tot = 0;
      for (const auto& rec : s.local_records)
        if (rec.bases[site] == basis) {
          ++tot;
          if (rec.outcomes[site] == 1) ++plus;
        }
      double p = static_cast<double>(plus) / tot;
      CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / tot));
    }
}

TEST_CASE("sampling is deterministic per seed and thread-count independent") {
  RngStream r(3, stream_label("det"), 0);
  DensityMatrix rho = testutil::random_density(4, r);
  Shadow a = sample_local_shadow(rho, 2, 200, 99, 1, 1);
  Shadow b = sample_local_shadow(rho, 2, 200, 99, 1, 4);
  REQUIRE(a.local_records.size() == b.local_records.size());
  for (std::size_t i = 0; i < a.local_records.size(); ++i) {
    CHECK(a.local_records[i].bases == b.local_records[i].bases);
    CHECK(a.local_records[i].outcomes == b.local_records[i].outcomes);
  }
  Shadow g1 = sample_global_shadow(rho, 2, 50, 7, 1, 1);
  Shadow g2 = sample_global_shadow(rho, 2, 50, 7, 1, 3);
  for (std::size_t i = 0; i < g1.global_records.size(); ++i) {
    CHECK(g1.global_records[i].tableau == g2.global_records[i].tableau);
    CHECK(g1.global_records[i].outcome == g2.global_records[i].outcome);
  }
}

TEST_CASE("single-qubit Cliffords appear uniformly (24 elements)") {
  RngStream r(4, stream_label("cl24"), 0);
  std::map<std::string, int> freq;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    CliffordTableau t = sample_global_clifford(1, r);
    REQUIRE(t.valid());
    freq[t.key()]++;
  }
  CHECK(freq.size() == 24);
  double expect = draws / 24.0;
  double sigma = std::sqrt(draws * (1.0 / 24) * (23.0 / 24));
  for (const auto& [k, c] : freq) CHECK(std::abs(c - expect) < 3.5 * sigma);
}

TEST_CASE("n=2 first stabilizer row is uniform over signed non-identity Paulis") {
  // Group-order counting: the image of Z_1 under a uniform Clifford is
  // uniform over the 2*(4^n-1) = 30 signed non-identity Hermitian Paulis.
  RngStream r(5, stream_label("row"), 0);
  std::map<std::uint64_t, int> freq;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    CliffordTableau t = sample_global_clifford(2, r);
    const SignedPauli& p = t.img_z[0];
    std::uint64_t key = (std::uint64_t(p.x) << 34) | (std::uint64_t(p.z) << 2) |
                        (p.sign() < 0 ? 1 : 0);
    freq[key]++;
  }
  CHECK(freq.size() == 30);
  double expect = draws / 30.0;
  double sigma = std::sqrt(draws * (1.0 / 30) * (29.0 / 30));
  for (const auto& [k, c] : freq) CHECK(std::abs(c - expect) < 4.0 * sigma);
}

TEST_CASE("global snapshot: identity tableau, outcome 0") {
  GlobalRecord rec{CliffordTableau::identity(1), 0};
  ComplexMatrix eta = global_snapshot_matrix(rec);
  CHECK(std::abs(eta(0, 0) - cplx(2, 0)) < 1e-14);
  CHECK(std::abs(eta(1, 1) - cplx(-1, 0)) < 1e-14);
}

TEST_CASE("snapshots have unit trace across protocols") {
  RngStream r(6, stream_label("tr"), 0);
  DensityMatrix rho2 = testutil::random_density(4, r);
  Shadow loc = sample_local_shadow(rho2, 2, 50, 21);
  Shadow glo = sample_global_shadow(rho2, 2, 50, 22);
  DensityMatrix rho3 = testutil::random_density(3, r);
  Shadow myz = sample_myz_shadow(rho3, 1, 3, 50, 23);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(std::abs(snapshot_matrix(loc, i).trace() - cplx(1, 0)) < 1e-10);
    CHECK(std::abs(snapshot_matrix(glo, i).trace() - cplx(1, 0)) < 1e-10);
    CHECK(std::abs(snapshot_matrix(myz, i).trace() - cplx(1, 0)) < 1e-10);
  }
}

TEST_CASE("exact global expectation reproduces random states (n=1,2)") {
  RngStream r(7, stream_label("gexp"), 0);
  DensityMatrix rho1 = testutil::random_density(2, r);
  CHECK(max_abs_diff(oracles::exact_global_expectation(rho1, 1), rho1.mat) < 1e-10);
  DensityMatrix rho2 = testutil::random_density(4, r);
  CHECK(max_abs_diff(oracles::exact_global_expectation(rho2, 2), rho2.mat) < 1e-10);
}

TEST_CASE("MUB vectors: eigen-equation, overlap, and snapshot values") {
  for (int d : {3, 5, 7}) {
    for (int t = 0; t < d; ++t) {
      ComplexMatrix w = pauli_to_matrix(PauliString::qudit(d, {{1, t}}));  // X Z^t
      for (int b = 0; b < d; ++b) {
        auto phi = mub_vector(d, t, b);
        auto wphi = matvec(w, phi);
        cplx omega_b = std::polar(1.0, 2.0 * M_PI * b / d);
        for (int j = 0; j < d; ++j) CHECK(std::abs(wphi[j] - omega_b * phi[j]) < 1e-12);
      }
    }
    // mutual unbiasedness across distinct bases
    for (int mu1 = 0; mu1 <= d; ++mu1)
      for (int mu2 = mu1 + 1; mu2 <= d; ++mu2) {
        auto a = mub_vector(d, mu1, 0);
        auto b = mub_vector(d, mu2, 1 % d);
        cplx ov = 0;
        for (int j = 0; j < d; ++j) ov += std::conj(a[j]) * b[j];
        CHECK(std::abs(std::norm(ov) - 1.0 / d) < 1e-12);
      }
  }
}

TEST_CASE("myz snapshot: d=3 computational record") {
  LocalRecord rec{{3}, {0}};  // mu = d means the Z eigenbasis
  ComplexMatrix eta = myz_snapshot_matrix(rec, 3);
  CHECK(std::abs(eta(0, 0) - cplx(3, 0)) < 1e-14);
  CHECK(std::abs(eta(1, 1) - cplx(-1, 0)) < 1e-14);
  CHECK(std::abs(eta(2, 2) - cplx(-1, 0)) < 1e-14);
  CHECK_THROWS_AS(myz_snapshot_matrix(rec, 4), Error);
}

TEST_CASE("exact MYZ expectation reproduces a random qutrit state (12 records)") {
  RngStream r(8, stream_label("myz"), 0);
  DensityMatrix rho = testutil::random_density(3, r);
  CHECK(max_abs_diff(oracles::exact_myz_expectation(rho, 1, 3), rho.mat) < 1e-10);
}

TEST_CASE("mom_recover: single block mean and odd median") {
  // Hand-built 1-qubit local records; O = Z gives values {3, 3, -3}.
  Shadow s;
  s.protocol = Protocol::local_qubit;
  s.n = 1;
  s.d = 2;
  s.local_records = {{{2}, {1}}, {{2}, {1}}, {{2}, {-1}}};
  ObsHandle z = PauliString::qubit("Z");
  // K=1: mean = 1, clamped to 1 exactly.
  CHECK(mom_recover(s, z, 1, 20) == doctest::Approx(1.0));
  // K=3: block means {3, 3, -3} -> median 3 -> clamped to 1.
  CHECK(mom_recover(s, z, 3, 20) == doctest::Approx(1.0));
  // Mixed-basis blocks give a zero median: values {3, 0, -3}.
  s.local_records = {{{2}, {1}}, {{0}, {1}}, {{2}, {-1}}};
  CHECK(mom_recover(s, z, 3, 20) == doctest::Approx(0.0));
}

TEST_CASE("mom_recover is invariant under permutations within blocks") {
  RngStream r(9, stream_label("perm"), 0);
  DensityMatrix rho = testutil::random_density(4, r);
  Shadow s = sample_local_shadow(rho, 2, 90, 31);
  ObsHandle obs = PauliString::qubit("ZX");
  const int K = 3;
  double before = mom_recover(s, obs, K, 24);
  // permute within each block of 30
  Shadow t = s;
  for (int blk = 0; blk < K; ++blk) {
    auto first = t.local_records.begin() + blk * 30;
    std::reverse(first, first + 30);
    std::swap(*first, *(first + 17));
  }
  CHECK(mom_recover(t, obs, K, 24) == before);
}

TEST_CASE("mom_recover rejects K larger than the record count") {
  Shadow s;
  s.protocol = Protocol::local_qubit;
  s.n = 1;
  s.d = 2;
  s.local_records = {{{2}, {1}}};
  CHECK_THROWS_AS(mom_recover(s, ObsHandle(PauliString::qubit("Z")), 2, 10), Error);
}

TEST_CASE("local Pauli snapshot values live in {0, +-3^w}") {
  RngStream r(10, stream_label("vals"), 0);
  for (int n = 1; n <= 3; ++n) {
    DensityMatrix rho = testutil::random_density(std::size_t{1} << n, r);
    Shadow s = sample_local_shadow(rho, n, 60, 40 + n);
    const char* letters = "IXYZ";
    for (int t = 0; t < 10; ++t) {
      std::string ps;
      for (int i = 0; i < n; ++i) ps += letters[r.below(4)];
      PauliString p = PauliString::qubit(ps);
      double mag = std::pow(3.0, p.weight());
      for (std::size_t i = 0; i < s.size(); ++i) {
        double v = snapshot_value(s, i, p);
        bool ok = std::abs(v) < 1e-12 || std::abs(std::abs(v) - mag) < 1e-9;
        CHECK(ok);
      }
    }
  }
}

TEST_CASE("fast string paths agree with dense snapshot traces") {
  RngStream r(11, stream_label("fast"), 0);
  DensityMatrix rho = testutil::random_density(4, r);
  Shadow loc = sample_local_shadow(rho, 2, 20, 51);
  Shadow glo = sample_global_shadow(rho, 2, 20, 52);
  const char* letters = "IXYZ";
  for (int t = 0; t < 8; ++t) {
    std::string ps;
    for (int i = 0; i < 2; ++i) ps += letters[r.below(4)];
    PauliString p = PauliString::qubit(ps);
    ComplexMatrix pm = pauli_to_matrix(p);
    for (std::size_t i = 0; i < 20; ++i) {
      double fast_l = snapshot_value(loc, i, p);
      ComplexMatrix eta_l = snapshot_matrix(loc, i);
      cplx tr_l = matmul(pm, eta_l).trace();
      CHECK(fast_l == doctest::Approx(tr_l.real()).epsilon(1e-10));

      double fast_g = snapshot_value(glo, i, p);
      ComplexMatrix eta_g = snapshot_matrix(glo, i);
      cplx tr_g = matmul(pm, eta_g).trace();
      CHECK(fast_g == doctest::Approx(tr_g.real()).epsilon(1e-10));
    }
  }
  // qudit Weyl parts vs dense Hermitian parts
  DensityMatrix rho3 = testutil::random_density(9, r);
  Shadow myz = sample_myz_shadow(rho3, 2, 3, 20, 53);
  PauliString w = PauliString::qudit(3, {{1, 2}, {0, 1}});
  ComplexMatrix wm = pauli_to_matrix(w);
  ComplexMatrix wre(9, 9), wim(9, 9);
  for (std::size_t a = 0; a < 9; ++a)
    for (std::size_t b = 0; b < 9; ++b) {
      wre(a, b) = 0.5 * (wm(a, b) + std::conj(wm(b, a)));
      wim(a, b) = cplx(0, -0.5) * (wm(a, b) - std::conj(wm(b, a)));
    }
  for (std::size_t i = 0; i < 20; ++i) {
    ComplexMatrix eta = snapshot_matrix(myz, i);
    double re_fast = snapshot_value(myz, i, WeylPart{w, false});
    double im_fast = snapshot_value(myz, i, WeylPart{w, true});
    CHECK(re_fast == doctest::Approx(matmul(wre, eta).trace().real()).epsilon(1e-9));
    CHECK(im_fast == doctest::Approx(matmul(wim, eta).trace().real()).epsilon(1e-9));
  }
}

TEST_CASE("statistical recovery pulls toward the truth") {
  Shadow s = sample_local_shadow(ket0(), 1, 4000, 77, 10);
  double est = mom_recover(s, ObsHandle(PauliString::qubit("Z")), 10, 16);
  CHECK(std::abs(est - 1.0) < 0.2);
}

TEST_CASE("observable_value examples") {
  ComplexMatrix zm = pauli_to_matrix(PauliString::qubit("Z"));
  Observable z{zm};
  ComplexMatrix eta(2, 2);
  eta(0, 0) = 2;
  eta(1, 1) = -1;
  CHECK(observable_value(z, eta) == doctest::Approx(3.0));
  CHECK(observable_value(z, ComplexMatrix::identity(2)) == doctest::Approx(0.0));
  RngStream r(12, stream_label("ov"), 0);
  Observable o = testutil::random_observable(4, r);
  ComplexMatrix h = testutil::random_hermitian(4, r);
  cplx naive = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) naive += o.mat(a, b) * h(b, a);
  CHECK(observable_value(o, h) == doctest::Approx(naive.real()).epsilon(1e-12));
}

TEST_CASE("shadow JSON round trips byte-identically") {
  RngStream r(13, stream_label("sj"), 0);
  DensityMatrix rho = testutil::random_density(4, r);
  for (Shadow s : {sample_local_shadow(rho, 2, 10, 61), sample_global_shadow(rho, 2, 10, 62)}) {
    auto j = shadow_to_json(s);
    Shadow back = shadow_from_json(j);
    CHECK(shadow_to_json(back).dump() == j.dump());
  }
  DensityMatrix rho3 = testutil::random_density(3, r);
  Shadow q = sample_myz_shadow(rho3, 1, 3, 10, 63);
  auto j = shadow_to_json(q);
  CHECK(shadow_to_json(shadow_from_json(j)).dump() == j.dump());
}
