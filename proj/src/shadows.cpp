#include "shadowval/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shadowval {

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::local_qubit: return "local-qubit";
    case Protocol::global_qubit: return "global-qubit";
    case Protocol::local_qudit: return "local-qudit";
  }
  return "?";
}

Protocol protocol_from_name(const std::string& s) {
  if (s == "local-qubit" || s == "local") return Protocol::local_qubit;
  if (s == "global-qubit" || s == "global") return Protocol::global_qubit;
  if (s == "local-qudit" || s == "qudit") return Protocol::local_qudit;
  throw Error(ErrorKind::invalid_input, "unknown protocol: " + s);
}

bool is_odd_prime(int d) {
  if (d < 3 || d % 2 == 0) return false;
  for (int f = 3; f * f <= d; f += 2)
    if (d % f == 0) return false;
  return true;
}

std::vector<cplx> mub_vector(int d, int mu, int b) {
  require(is_odd_prime(d), ErrorKind::invalid_input, "qudit dimension must be an odd prime");
  require(mu >= 0 && mu <= d && b >= 0 && b < d, ErrorKind::invalid_input,
          "basis/outcome label out of range");
  std::vector<cplx> v(d, cplx(0.0, 0.0));
  if (mu == d) {  // infinity label: computational (Z) eigenbasis
    v[b] = 1.0;
    return v;
  }
  // Eigenvector of X Z^mu with eigenvalue w^b: c_j = w^{mu j(j-1)/2 - b j}/sqrt(d).
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int j = 0; j < d; ++j) {
    long long expo =
        (static_cast<long long>(mu) * j * (j - 1) / 2 - static_cast<long long>(b) * j) % d;
    if (expo < 0) expo += d;
    double ang = 2.0 * M_PI * static_cast<double>(expo) / d;
    v[j] = cplx(amp * std::cos(ang), amp * std::sin(ang));
  }
  return v;
}

namespace {

// Qubit Pauli eigenvectors: basis 0,1,2 = X,Y,Z; outcome +1 picks the first.
std::vector<cplx> qubit_eigvec(int basis, int outcome) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (basis) {
    case 0: return outcome > 0 ? std::vector<cplx>{s, s} : std::vector<cplx>{s, -s};
    case 1:
      return outcome > 0 ? std::vector<cplx>{s, cplx(0, s)} : std::vector<cplx>{s, cplx(0, -s)};
    case 2: return outcome > 0 ? std::vector<cplx>{1, 0} : std::vector<cplx>{0, 1};
    default: throw Error(ErrorKind::invalid_input, "unknown basis label");
  }
}

// Project site `site` (0 = leftmost tensor factor) of a state on n sites of
// local dimension d onto basis vector phi; returns the outcome probability
// and overwrites v with the normalized projected state.
double project_site(std::vector<cplx>& v, int n, int d, int site, const std::vector<cplx>& phi) {
  const std::size_t dim = v.size();
  std::size_t inner = 1;
  for (int s = site + 1; s < n; ++s) inner *= d;
  const std::size_t outer = dim / (inner * d);
  double p = 0.0;
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      cplx ampl = 0.0;
      const std::size_t base = o * d * inner + i;
      for (int k = 0; k < d; ++k) ampl += std::conj(phi[k]) * v[base + k * inner];
      for (int k = 0; k < d; ++k) v[base + k * inner] = ampl * phi[k];
      p += std::norm(ampl);
    }
  if (p > 0) {
    double s = 1.0 / std::sqrt(p);
    for (auto& c : v) c *= s;
  }
  return p;
}

// Spectral mixture of rho for exact Born sampling; negative eigenvalues
// within tolerance are clipped.
struct StateMixture {
  std::vector<double> cum;
  ComplexMatrix vecs;
  std::size_t dim;

  explicit StateMixture(const DensityMatrix& rho) {
    HermEig e = herm_eig(rho.mat);
    dim = rho.dim;
    vecs = std::move(e.vectors);
    double total = 0.0;
    std::vector<double> w(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      w[i] = std::max(0.0, e.values[i]);
      total += w[i];
    }
    cum.resize(dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      acc += w[i] / total;
      cum[i] = acc;
    }
    cum.back() = 1.0;
  }

  std::vector<cplx> draw(RngStream& rng) const {
    std::size_t k = rng.pick_cumulative(cum);
    std::vector<cplx> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = vecs(i, k);
    return v;
  }
};

constexpr int kOutcomePlus = +1, kOutcomeMinus = -1;

}  // namespace

Shadow sample_local_shadow(const DensityMatrix& rho, int n, std::size_t L, std::uint64_t seed,
                           int K, int threads) {
  require(n >= 1 && n <= 12, ErrorKind::invalid_input, "sample_local_shadow: n must be in [1,12]");
  require(rho.dim == (std::size_t{1} << n), ErrorKind::invalid_input,
          "sample_local_shadow: state dimension != 2^n");
  StateMixture mix(rho);
  Shadow s;
  s.protocol = Protocol::local_qubit;
  s.n = n;
  s.d = 2;
  s.K = K;
  s.local_records.resize(L);
  const std::uint64_t label = stream_label("local-shadow");
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(L); ++idx) {
    RngStream rng(seed, label, static_cast<std::uint64_t>(idx));
    auto v = mix.draw(rng);
    LocalRecord rec;
    rec.bases.resize(n);
    rec.outcomes.resize(n);
    for (int site = 0; site < n; ++site) {
      int basis = static_cast<int>(rng.below(3));
      auto probe = v;
      double pplus = project_site(probe, n, 2, site, qubit_eigvec(basis, kOutcomePlus));
      int outcome = (rng.uniform() < pplus) ? kOutcomePlus : kOutcomeMinus;
      if (outcome == kOutcomePlus) {
        v = std::move(probe);
      } else {
        project_site(v, n, 2, site, qubit_eigvec(basis, kOutcomeMinus));
      }
      rec.bases[site] = static_cast<std::uint8_t>(basis);
      rec.outcomes[site] = static_cast<std::int16_t>(outcome);
    }
    s.local_records[idx] = std::move(rec);
  }
  return s;
}

Shadow sample_global_shadow(const DensityMatrix& rho, int n, std::size_t L, std::uint64_t seed,
                            int K, int threads) {
  require(n >= 1 && n <= 12, ErrorKind::invalid_input, "sample_global_shadow: n must be in [1,12]");
  require(rho.dim == (std::size_t{1} << n), ErrorKind::invalid_input,
          "sample_global_shadow: state dimension != 2^n");
  StateMixture mix(rho);
  Shadow s;
  s.protocol = Protocol::global_qubit;
  s.n = n;
  s.d = 2;
  s.K = K;
  s.global_records.resize(L);
  const std::uint64_t label = stream_label("global-shadow");
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(L); ++idx) {
    RngStream rng(seed, label, static_cast<std::uint64_t>(idx));
    CliffordTableau t = sample_global_clifford_tableau(n, rng);
    CliffordTableau inv = t.inverse();
    auto v = mix.draw(rng);
    std::vector<cplx> pv;
    std::uint32_t outcome = 0;
    for (int j = 0; j < n; ++j) {
      apply_signed_pauli(inv.img_z[j], v, pv);
      double pplus = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) pplus += std::norm(0.5 * (v[i] + pv[i]));
      int bj = (rng.uniform() < pplus) ? 0 : 1;
      double sgn = bj ? -1.0 : 1.0;
      double norm = std::sqrt(std::max(1e-300, bj ? 1.0 - pplus : pplus));
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (v[i] + sgn * pv[i]) / norm;
      outcome |= static_cast<std::uint32_t>(bj) << j;
    }
    s.global_records[idx] = GlobalRecord{std::move(t), outcome};
  }
  return s;
}

Shadow sample_myz_shadow(const DensityMatrix& rho, int n, int d, std::size_t L, std::uint64_t seed,
                         int K, int threads) {
  require(is_odd_prime(d) && d <= 13, ErrorKind::invalid_input,
          "sample_myz_shadow: d must be an odd prime <= 13");
  double bits = n * std::log2(static_cast<double>(d));
  require(n >= 1 && bits <= 12.0 + 1e-9, ErrorKind::invalid_input,
          "sample_myz_shadow: dimension overflow");
  std::size_t dim = 1;
  for (int i = 0; i < n; ++i) dim *= d;
  require(rho.dim == dim, ErrorKind::invalid_input, "sample_myz_shadow: state dimension != d^n");

  std::vector<std::vector<std::vector<cplx>>> basis(d + 1);
  for (int mu = 0; mu <= d; ++mu) {
    basis[mu].resize(d);
    for (int b = 0; b < d; ++b) basis[mu][b] = mub_vector(d, mu, b);
  }

  StateMixture mix(rho);
  Shadow s;
  s.protocol = Protocol::local_qudit;
  s.n = n;
  s.d = d;
  s.K = K;
  s.local_records.resize(L);
  const std::uint64_t label = stream_label("myz-shadow");
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(L); ++idx) {
    RngStream rng(seed, label, static_cast<std::uint64_t>(idx));
    auto v = mix.draw(rng);
    LocalRecord rec;
    rec.bases.resize(n);
    rec.outcomes.resize(n);
    for (int site = 0; site < n; ++site) {
      int mu = static_cast<int>(rng.below(static_cast<std::uint64_t>(d) + 1));
      double u = rng.uniform();
      double acc = 0.0;
      for (int b = 0; b < d; ++b) {
        auto probe = v;
        double p = project_site(probe, n, d, site, basis[mu][b]);
        acc += p;
        if (u < acc || b == d - 1) {
          rec.bases[site] = static_cast<std::uint8_t>(mu);
          rec.outcomes[site] = static_cast<std::int16_t>(b);
          v = std::move(probe);
          break;
        }
      }
    }
    s.local_records[idx] = std::move(rec);
  }
  return s;
}

CliffordTableau sample_global_clifford(int n, RngStream& rng) {
  return sample_global_clifford_tableau(n, rng);
}

ComplexMatrix local_snapshot_matrix(const LocalRecord& r) {
  const int n = static_cast<int>(r.bases.size());
  require(n >= 1 && n <= 12, ErrorKind::invalid_input, "local_snapshot_matrix: bad record size");
  ComplexMatrix acc(1, 1);
  acc(0, 0) = 1.0;
  for (int site = 0; site < n; ++site) {
    auto psi = qubit_eigvec(r.bases[site], r.outcomes[site]);
    ComplexMatrix eta(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        eta(a, b) = 3.0 * psi[a] * std::conj(psi[b]) - (a == b ? 1.0 : 0.0);
    acc = kron(acc, eta);
  }
  return acc;
}

ComplexMatrix global_snapshot_matrix(const GlobalRecord& r) {
  const int n = r.tableau.n;
  require(n >= 1 && n <= 12, ErrorKind::invalid_input, "global_snapshot_matrix: bad tableau");
  require(r.outcome < (std::uint64_t{1} << n), ErrorKind::invalid_input,
          "global_snapshot_matrix: outcome/tableau mismatch");
  auto psi = state_from_record(r.tableau, r.outcome);
  const std::size_t dim = psi.size();
  const double c = static_cast<double>(dim) + 1.0;
  ComplexMatrix eta(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b)
      eta(a, b) = c * psi[a] * std::conj(psi[b]) - (a == b ? 1.0 : 0.0);
  return eta;
}

ComplexMatrix myz_snapshot_matrix(const LocalRecord& r, int d) {
  require(is_odd_prime(d) && d <= 13, ErrorKind::invalid_input, "d must be an odd prime <= 13");
  const int n = static_cast<int>(r.bases.size());
  ComplexMatrix acc(1, 1);
  acc(0, 0) = 1.0;
  for (int site = 0; site < n; ++site) {
    auto phi = mub_vector(d, r.bases[site], r.outcomes[site]);
    ComplexMatrix eta(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        eta(a, b) = (d + 1.0) * phi[a] * std::conj(phi[b]) - (a == b ? 1.0 : 0.0);
    acc = kron(acc, eta);
  }
  return acc;
}

ComplexMatrix snapshot_matrix(const Shadow& s, std::size_t idx) {
  switch (s.protocol) {
    case Protocol::local_qubit: return local_snapshot_matrix(s.local_records.at(idx));
    case Protocol::global_qubit: return global_snapshot_matrix(s.global_records.at(idx));
    case Protocol::local_qudit: return myz_snapshot_matrix(s.local_records.at(idx), s.d);
  }
  throw Error(ErrorKind::invalid_input, "bad protocol");
}

namespace {

const char kLetterOfBasis[3] = {'X', 'Y', 'Z'};

cplx snapshot_value_weyl(const Shadow& s, const LocalRecord& r, const PauliString& p) {
  const int d = s.d;
  cplx prod = 1.0;
  for (int site = 0; site < s.n; ++site) {
    auto [a, b] = p.weyl[site];
    if (a == 0 && b == 0) continue;  // Tr(eta_site) = 1
    auto phi = mub_vector(d, r.bases[site], r.outcomes[site]);
    // <phi| X^a Z^b |phi>; the trace term vanishes for non-identity labels.
    cplx ampl = 0.0;
    for (int j = 0; j < d; ++j) {
      long long e = (static_cast<long long>(b) * j) % d;
      double ang = 2.0 * M_PI * static_cast<double>(e) / d;
      ampl += std::conj(phi[(j + a) % d]) * cplx(std::cos(ang), std::sin(ang)) * phi[j];
    }
    prod *= (d + 1.0) * ampl;
    if (prod == cplx(0.0, 0.0)) return prod;
  }
  return prod;
}

double snapshot_value_one(const Shadow& s, std::size_t idx, const ObsHandle& obs) {
  if (std::holds_alternative<ComplexMatrix>(obs)) {
    const ComplexMatrix& o = std::get<ComplexMatrix>(obs);
    if (s.protocol == Protocol::global_qubit) {
      const GlobalRecord& r = s.global_records[idx];
      auto psi = state_from_record(r.tableau, r.outcome);
      require(o.rows() == psi.size(), ErrorKind::invalid_input, "observable dimension mismatch");
      auto ov = matvec(o, psi);
      cplx expv = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) expv += std::conj(psi[i]) * ov[i];
      double dim = static_cast<double>(psi.size());
      return ((dim + 1.0) * expv - o.trace()).real();
    }
    ComplexMatrix eta = snapshot_matrix(s, idx);
    require(o.rows() == eta.rows(), ErrorKind::invalid_input, "observable dimension mismatch");
    cplx tr = 0.0;
    for (std::size_t r0 = 0; r0 < o.rows(); ++r0)
      for (std::size_t c0 = 0; c0 < o.cols(); ++c0) tr += o(r0, c0) * eta(c0, r0);
    return tr.real();
  }

  const bool is_weyl_part = std::holds_alternative<WeylPart>(obs);
  const PauliString& p = is_weyl_part ? std::get<WeylPart>(obs).string : std::get<PauliString>(obs);
  require(p.n == s.n, ErrorKind::invalid_input, "observable length mismatch");

  if (s.protocol == Protocol::local_qubit) {
    require(p.is_qubit(), ErrorKind::invalid_input, "qubit shadow needs qubit Pauli string");
    const LocalRecord& r = s.local_records[idx];
    double prod = 1.0;
    for (int site = 0; site < s.n; ++site) {
      char letter = p.letters[site];
      if (letter == 'I') continue;
      if (letter != kLetterOfBasis[r.bases[site]]) return 0.0;
      prod *= 3.0 * static_cast<double>(r.outcomes[site]);
    }
    return prod;
  }
  if (s.protocol == Protocol::local_qudit) {
    require(!p.is_qubit() && p.localdim == s.d, ErrorKind::invalid_input,
            "qudit shadow needs matching Weyl string");
    cplx v = snapshot_value_weyl(s, s.local_records[idx], p);
    if (is_weyl_part && std::get<WeylPart>(obs).imag) return v.imag();
    return v.real();
  }
  // Global protocol with a qubit Pauli string.
  require(p.is_qubit(), ErrorKind::invalid_input, "global shadow needs qubit Pauli string");
  const GlobalRecord& r = s.global_records[idx];
  auto psi = state_from_record(r.tableau, r.outcome);
  std::uint32_t x = 0, z = 0;
  for (int site = 0; site < s.n; ++site) {
    int bit = s.n - 1 - site;  // leftmost letter acts on the high index bit
    char c = p.letters[site];
    if (c == 'X' || c == 'Y') x |= 1u << bit;
    if (c == 'Z' || c == 'Y') z |= 1u << bit;
  }
  SignedPauli sp = hermitian_pauli(s.n, x, z, +1);
  std::vector<cplx> pv;
  apply_signed_pauli(sp, psi, pv);
  cplx expv = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) expv += std::conj(psi[i]) * pv[i];
  double dim = static_cast<double>(psi.size());
  bool is_id = (x | z) == 0;
  return (dim + 1.0) * expv.real() - (is_id ? dim : 0.0);
}

double round_to_bits(double v, int chi_bits) {
  if (chi_bits < 0 || chi_bits > 52) return v;
  double scale = std::ldexp(1.0, chi_bits);
  return std::nearbyint(v * scale) / scale;  // default FP mode: ties to even
}

}  // namespace

double snapshot_value(const Shadow& s, std::size_t idx, const ObsHandle& obs) {
  return snapshot_value_one(s, idx, obs);
}

int default_block_count(std::size_t m_obs) {
  double k = std::ceil(2.0 * std::log(2.0 * static_cast<double>(std::max<std::size_t>(m_obs, 1))));
  return std::max(1, static_cast<int>(k));
}

double mom_recover(const Shadow& s, const ObsHandle& obs, int K, int chi_bits, int threads) {
  const std::size_t L = s.size();
  require(L > 0, ErrorKind::invalid_input, "mom_recover: empty shadow");
  require(K >= 1 && static_cast<std::size_t>(K) <= L, ErrorKind::invalid_input,
          "mom_recover: K must be in [1, record count]");

  std::vector<double> values(L);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(L); ++i)
    values[i] = snapshot_value_one(s, static_cast<std::size_t>(i), obs);

  // Nearly equal blocks in record order; the first L mod K blocks get one
  // extra record. Summation order inside a block is by sorted value, so the
  // estimate is exactly invariant under permutations within a block.
  std::vector<double> means;
  means.reserve(K);
  std::size_t base = L / K, extra = L % K, pos = 0;
  for (int k = 0; k < K; ++k) {
    std::size_t len = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
    std::vector<double> block(values.begin() + pos, values.begin() + pos + len);
    std::sort(block.begin(), block.end());
    double sum = 0.0;
    for (double v : block) sum += v;
    means.push_back(sum / static_cast<double>(len));
    pos += len;
  }
  std::sort(means.begin(), means.end());
  double med = (K % 2 == 1) ? means[K / 2] : 0.5 * (means[K / 2 - 1] + means[K / 2]);
  return std::clamp(round_to_bits(med, chi_bits), -1.0, 1.0);
}

double observable_value(const Observable& o, const ComplexMatrix& eta) {
  require(o.dim == eta.rows() && eta.is_square(), ErrorKind::invalid_input,
          "observable_value: dimension mismatch");
  cplx tr = 0.0;
  for (std::size_t r = 0; r < o.dim; ++r)
    for (std::size_t c = 0; c < o.dim; ++c) tr += o.mat(r, c) * eta(c, r);
  require(std::abs(tr.imag()) <=
              tolerances().imag_part * std::max(1.0, std::abs(tr.real())) + tolerances().imag_part,
          ErrorKind::invalid_input, "observable_value: non-negligible imaginary part");
  return tr.real();
}

nlohmann::json shadow_to_json(const Shadow& s) {
  nlohmann::json j;
  j["protocol"] = protocol_name(s.protocol);
  j["n"] = s.n;
  j["d"] = s.d;
  j["K"] = s.K;
  nlohmann::json records = nlohmann::json::array();
  if (s.protocol == Protocol::local_qubit) {
    for (const auto& r : s.local_records) {
      std::string bases;
      for (auto b : r.bases) bases.push_back(kLetterOfBasis[b]);
      nlohmann::json rec;
      rec["bases"] = bases;
      rec["outcomes"] = r.outcomes;
      records.push_back(std::move(rec));
    }
  } else if (s.protocol == Protocol::local_qudit) {
    for (const auto& r : s.local_records) {
      nlohmann::json rec;
      rec["mus"] = r.bases;
      rec["bs"] = r.outcomes;
      records.push_back(std::move(rec));
    }
  } else {
    for (const auto& r : s.global_records) {
      nlohmann::json rec;
      rec["tableau"] = tableau_to_json(r.tableau);
      std::string bits;
      for (int q = 0; q < s.n; ++q) bits.push_back(((r.outcome >> q) & 1) ? '1' : '0');
      rec["outcome"] = bits;
      records.push_back(std::move(rec));
    }
  }
  j["records"] = std::move(records);
  return j;
}

Shadow shadow_from_json(const nlohmann::json& j) {
  Shadow s;
  s.protocol = protocol_from_name(j.at("protocol"));
  s.n = j.at("n");
  s.d = j.at("d");
  s.K = j.at("K");
  for (const auto& rec : j.at("records")) {
    if (s.protocol == Protocol::local_qubit) {
      LocalRecord r;
      std::string bases = rec.at("bases");
      for (char c : bases) {
        int b = (c == 'X') ? 0 : (c == 'Y') ? 1 : (c == 'Z') ? 2 : -1;
        require(b >= 0, ErrorKind::invalid_input, "bad basis letter in shadow JSON");
        r.bases.push_back(static_cast<std::uint8_t>(b));
      }
      r.outcomes = rec.at("outcomes").get<std::vector<std::int16_t>>();
      require(r.bases.size() == static_cast<std::size_t>(s.n) &&
                  r.outcomes.size() == r.bases.size(),
              ErrorKind::invalid_input, "record length mismatch");
      for (auto o : r.outcomes)
        require(o == 1 || o == -1, ErrorKind::invalid_input, "qubit outcomes must be +-1");
      s.local_records.push_back(std::move(r));
    } else if (s.protocol == Protocol::local_qudit) {
      LocalRecord r;
      r.bases = rec.at("mus").get<std::vector<std::uint8_t>>();
      r.outcomes = rec.at("bs").get<std::vector<std::int16_t>>();
      require(r.bases.size() == static_cast<std::size_t>(s.n) &&
                  r.outcomes.size() == r.bases.size(),
              ErrorKind::invalid_input, "record length mismatch");
      for (std::size_t i = 0; i < r.bases.size(); ++i)
        require(r.bases[i] <= s.d && r.outcomes[i] >= 0 && r.outcomes[i] < s.d,
                ErrorKind::invalid_input, "qudit labels out of range");
      s.local_records.push_back(std::move(r));
    } else {
      GlobalRecord r;
      r.tableau = tableau_from_json(rec.at("tableau"));
      std::string bits = rec.at("outcome");
      require(bits.size() == static_cast<std::size_t>(s.n), ErrorKind::invalid_input,
              "outcome length mismatch");
      for (int q = 0; q < s.n; ++q)
        if (bits[q] == '1') r.outcome |= 1u << q;
      s.global_records.push_back(std::move(r));
    }
  }
  return s;
}

}  // namespace shadowval
