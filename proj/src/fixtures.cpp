#include "shadowval/fixtures.hpp"

#include <cmath>

#include "shadowval/rng.hpp"

namespace shadowval {

namespace {

// Site mixtures over the restricted alphabet {X+, Z+, Z-}. A weight triple w
// represents the single-qubit state w . eta; only PSD combinations qualify.
ComplexMatrix site_state(const SnapshotAlphabet& a, const std::vector<double>& w) {
  ComplexMatrix s(2, 2);
  for (std::size_t j = 0; j < a.size(); ++j) {
    ComplexMatrix t = a.etas[j];
    t *= cplx(w[j], 0.0);
    s += t;
  }
  return s;
}

bool psd_with_margin(const ComplexMatrix& s, double margin) {
  HermEig e = herm_eig(s);
  return e.values.back() >= margin;
}

// All weight triples on the given denominator whose mixture is a state with
// margin; deterministic order.
std::vector<std::vector<double>> valid_grid(const SnapshotAlphabet& a, int denom, double margin) {
  std::vector<std::vector<double>> out;
  for (int x = 0; x <= denom; ++x)
    for (int p = 0; p + x <= denom; ++p) {
      int q = denom - x - p;
      std::vector<double> w = {x / double(denom), p / double(denom), q / double(denom)};
      if (psd_with_margin(site_state(a, w), margin)) out.push_back(std::move(w));
    }
  return out;
}

}  // namespace

std::vector<int> cldm_yes_restriction() { return {0, 4, 5}; }  // X+, Z+, Z-

CldmInstance make_cldm_yes(std::uint64_t seed) {
  SnapshotAlphabet a = enumerate_alphabet(1, cldm_yes_restriction());
  // Per-site mixture denominators alternate 10, 2, 10, 2 so the outer-product
  // weights L w_i (x) w_{i+1} are integers at L = 20; sites on denominator 2
  // admit only the maximally mixed letter combination.
  auto rich = valid_grid(a, 10, 0.02);
  auto poor = valid_grid(a, 2, 0.02);
  require(!rich.empty() && !poor.empty(), ErrorKind::solver_failure, "fixture grids are empty");
  RngStream rng(seed, stream_label("cldm-yes"), 0);
  const int n = 4;
  std::vector<std::vector<double>> w(n);
  for (int site = 0; site < n; ++site) {
    const auto& grid = (site % 2 == 0) ? rich : poor;
    w[site] = grid[rng.below(grid.size())];
  }
  CldmInstance inst;
  inst.d = 2;
  inst.n = n;
  inst.alpha = 0.002;
  inst.beta = 1.96;
  for (int i = 0; i + 1 < n; ++i)
    inst.sigmas.push_back(kron(site_state(a, w[i]), site_state(a, w[i + 1])));
  inst.validate();
  return inst;
}

CldmInstance make_cldm_infeasible() {
  CldmInstance inst;
  inst.d = 2;
  inst.n = 3;
  inst.alpha = 0.002;
  inst.beta = 1.96;
  ComplexMatrix s00(4, 4), s10(4, 4);
  s00(0, 0) = 1.0;  // |00><00|
  s10(2, 2) = 1.0;  // site 2 = |1>, site 3 = |0>
  inst.sigmas = {s00, s10};
  inst.validate();
  return inst;
}

LowRankFixture make_lowrank_obs(std::uint64_t seed, std::size_t n, int m_obs, int rank) {
  RngStream rng(seed, stream_label("lowrank-obs"), 0);
  auto gauss = [&rng]() {
    double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  LowRankFixture f;
  f.planted_yes = (seed % 2 == 0);
  for (int j = 0; j < m_obs; ++j) {
    ComplexMatrix v(n, rank);
    for (int t = 0; t < rank; ++t) {
      std::vector<cplx> col(n);
      for (auto& c : col) c = cplx(gauss(), gauss());
      for (int s = 0; s < t; ++s) {
        cplx ov = 0.0;
        for (std::size_t i = 0; i < n; ++i) ov += std::conj(v(i, s)) * col[i];
        for (std::size_t i = 0; i < n; ++i) col[i] -= ov * v(i, s);
      }
      double n2 = 0.0;
      for (auto& c : col) n2 += std::norm(c);
      double inv = 1.0 / std::sqrt(n2);
      for (std::size_t i = 0; i < n; ++i) v(i, t) = col[i] * inv;
    }
    std::vector<double> lam(rank);
    double top = 0.0;
    for (auto& l : lam) {
      l = (0.4 + 0.6 * rng.uniform()) * (rng.below(2) ? 1.0 : -1.0);
      top = std::max(top, std::abs(l));
    }
    for (auto& l : lam) l *= 0.95 / top;  // operator norm 0.95
    if (!f.planted_yes && j == 2) {
      // NO instances: the third observable is the negation of the first
      f.lambdas.push_back(f.lambdas[0]);
      for (auto& l : f.lambdas.back()) l = -l;
      f.vectors.push_back(f.vectors[0]);
    } else {
      f.lambdas.push_back(lam);
      f.vectors.push_back(std::move(v));
    }
    ComplexMatrix dense(n, n);
    const auto& lv = f.vectors.back();
    const auto& ll = f.lambdas.back();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        cplx s = 0.0;
        for (int t = 0; t < rank; ++t) s += ll[t] * lv(a, t) * std::conj(lv(b, t));
        dense(a, b) = s;
      }
    double f2 = 0.0;
    for (const auto& c : dense.data()) f2 += std::norm(c);
    f.frob2.push_back(f2);
    f.observables.push_back(std::move(dense));
  }
  if (f.planted_yes) {
    // targets from a planted pure state
    std::vector<cplx> psi(n);
    double n2 = 0.0;
    for (auto& c : psi) {
      c = cplx(gauss(), gauss());
      n2 += std::norm(c);
    }
    double inv = 1.0 / std::sqrt(n2);
    for (auto& c : psi) c *= inv;
    for (int j = 0; j < m_obs; ++j) {
      auto ov = matvec(f.observables[j], psi);
      cplx y = 0.0;
      for (std::size_t i = 0; i < n; ++i) y += std::conj(psi[i]) * ov[i];
      f.targets.push_back(std::clamp(y.real(), -1.0, 1.0));
    }
  } else {
    // contradictory pair: O_2 = -O_0 with matching positive targets
    for (int j = 0; j < m_obs; ++j) f.targets.push_back((j == 0 || j == 2) ? 0.9 : 0.0);
  }
  return f;
}

ObsConInstance make_obscon_xyz() {
  ObsConInstance inst;
  inst.n = 1;
  inst.d = 2;
  inst.dim = 2;
  inst.observables = {PauliString::qubit("X"), PauliString::qubit("Y"), PauliString::qubit("Z")};
  inst.targets = {1.0, 1.0, 1.0};
  inst.alpha = 0.1;
  inst.beta = 0.3;
  return inst;
}

ObsConInstance make_obscon_no() {
  ObsConInstance inst;
  inst.n = 1;
  inst.d = 2;
  inst.dim = 2;
  ComplexMatrix negz = pauli_to_matrix(PauliString::qubit("Z"));
  negz *= cplx(-1.0, 0.0);
  inst.observables = {PauliString::qubit("Z"), negz};
  inst.targets = {1.0, 1.0};
  inst.alpha = 0.1;
  inst.beta = 0.3;
  return inst;
}

nlohmann::json dequant_input_to_json(const LowRankFixture& f) {
  nlohmann::json j;
  nlohmann::json obs = nlohmann::json::array();
  for (std::size_t i = 0; i < f.observables.size(); ++i) {
    nlohmann::json o;
    o["lambdas"] = f.lambdas[i];
    o["vectors"] = matrix_to_json(f.vectors[i]);
    obs.push_back(std::move(o));
  }
  j["observables"] = std::move(obs);
  j["frob2_bounds"] = f.frob2;
  j["targets"] = f.targets;
  j["alpha"] = f.alpha;
  j["beta"] = f.beta;
  return j;
}

std::map<std::string, nlohmann::json> gen_fixture(const std::string& kind, std::uint64_t seed) {
  std::map<std::string, nlohmann::json> out;
  if (kind == "cldm-yes") {
    out["cldm-yes"] = cldm_to_json(make_cldm_yes(seed));
  } else if (kind == "cldm-infeasible") {
    out["cldm-infeasible"] = cldm_to_json(make_cldm_infeasible());
  } else if (kind == "lowrank-obs") {
    out["lowrank-obs"] = dequant_input_to_json(make_lowrank_obs(seed));
  } else if (kind == "obscon-xyz") {
    out["obscon-xyz"] = instance_to_json(make_obscon_xyz());
  } else if (kind == "obscon-no") {
    out["obscon-no"] = instance_to_json(make_obscon_no());
  } else {
    throw Error(ErrorKind::invalid_input, "unknown fixture kind: " + kind);
  }
  return out;
}

}  // namespace shadowval
