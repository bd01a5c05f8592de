#include "shadowval/clifford.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <sstream>

namespace shadowval {

namespace {
constexpr SympVec kEvenBits = 0x5555555555555555ull;  // x components

inline SympVec transvect(SympVec h, SympVec v, int n) {
  return symplectic_form(v, h, n) ? (v ^ h) : v;
}

// Pair (h1, h2) of transvections with Z_h2(Z_h1(x)) = y, for x, y != 0.
std::pair<SympVec, SympVec> find_transvections(SympVec x, SympVec y, int n) {
  if (x == y) return {0, 0};
  if (symplectic_form(x, y, n)) return {x ^ y, 0};
  // Need z with <x,z> = <y,z> = 1; then x -> z -> y.
  auto pair_bits = [](SympVec v, int k) { return static_cast<int>((v >> (2 * k)) & 3); };
  SympVec z = 0;
  // Case 1: some pair where both x and y have support.
  for (int k = 0; k < n && z == 0; ++k) {
    if (pair_bits(x, k) == 0 || pair_bits(y, k) == 0) continue;
    for (int c = 1; c < 4 && z == 0; ++c) {
      SympVec cand = static_cast<SympVec>(c) << (2 * k);
      if (symplectic_form(x, cand, n) && symplectic_form(y, cand, n)) z = cand;
    }
  }
  // Case 2: disjoint supports; fix one pair for x and one for y.
  if (z == 0) {
    SympVec zx = 0, zy = 0;
    for (int k = 0; k < n && zx == 0; ++k) {
      if (pair_bits(x, k) == 0) continue;
      for (int c = 1; c < 4 && zx == 0; ++c) {
        SympVec cand = static_cast<SympVec>(c) << (2 * k);
        if (symplectic_form(x, cand, n)) zx = cand;
      }
    }
    for (int k = 0; k < n && zy == 0; ++k) {
      if (pair_bits(y, k) == 0) continue;
      for (int c = 1; c < 4 && zy == 0; ++c) {
        SympVec cand = static_cast<SympVec>(c) << (2 * k);
        if (symplectic_form(y, cand, n)) zy = cand;
      }
    }
    z = zx ^ zy;
  }
  return {x ^ z, z ^ y};
}

// Shared row-by-row construction. `choose` supplies, for the m-pair level,
// the nonzero vector index k in [1, 4^m - 1] and the 2m-1 mixing bits.
std::vector<SympVec> build_symplectic(int n, const std::function<void(int, std::uint64_t&, std::uint64_t&)>& choose) {
  std::vector<SympVec> cols(2 * n);
  if (n == 0) return cols;

  std::uint64_t k, b;
  choose(n, k, b);
  SympVec e1 = 1, e2 = 2;
  SympVec f1 = static_cast<SympVec>(k);  // any nonzero vector of F_2^{2n}
  auto [h1, h2] = find_transvections(e1, f1, n);
  auto tmap = [&](SympVec v) { return transvect(h2, transvect(h1, v, n), n); };

  // Preimage of the second column: e2 + c1 e1 + sum c_j e_j, j >= 3.
  SympVec u = e2;
  if (b & 1) u ^= e1;
  std::uint64_t rest = b >> 1;
  for (int j = 0; j < 2 * n - 2; ++j)
    if ((rest >> j) & 1) u ^= (SympVec{1} << (j + 2));

  // Recurse on the symplectic complement (pairs 2..n), embedded at bit 2.
  std::vector<SympVec> sub = build_symplectic(n - 1, choose);

  cols[0] = tmap(e1);
  cols[1] = tmap(u);
  for (int j = 0; j < 2 * (n - 1); ++j) {
    SympVec v = sub[j] << 2;
    if (symplectic_form(u, v, n)) v ^= e1;  // restore <u, v> = 0
    cols[j + 2] = tmap(v);
  }
  return cols;
}

}  // namespace

int symplectic_form(SympVec u, SympVec v, int n) {
  SympVec mask = (n >= 32) ? ~SympVec{0} : ((SympVec{1} << (2 * n)) - 1);
  SympVec ux = u & kEvenBits & mask, uz = (u >> 1) & kEvenBits & mask;
  SympVec vx = v & kEvenBits & mask, vz = (v >> 1) & kEvenBits & mask;
  return std::popcount((ux & vz) ^ (uz & vx)) & 1;
}

std::uint64_t symplectic_order(int n) {
  require(n >= 0 && n <= 5, ErrorKind::invalid_input, "symplectic_order: n must be <= 5");
  std::uint64_t prod = 1;
  for (int j = 1; j <= n; ++j)
    prod *= ((std::uint64_t{1} << (2 * j)) - 1) * (std::uint64_t{1} << (2 * j - 1));
  return prod;
}

std::uint64_t clifford_order(int n) {
  require(n >= 0 && n <= 4, ErrorKind::invalid_input, "clifford_order: n must be <= 4");
  return symplectic_order(n) << (2 * n);
}

std::vector<SympVec> symplectic_from_index(std::uint64_t idx, int n) {
  require(idx < symplectic_order(n), ErrorKind::invalid_input, "symplectic index out of range");
  return build_symplectic(n, [&idx](int m, std::uint64_t& k, std::uint64_t& b) {
    std::uint64_t s = (std::uint64_t{1} << (2 * m)) - 1;
    k = idx % s + 1;
    idx /= s;
    std::uint64_t t = std::uint64_t{1} << (2 * m - 1);
    b = idx % t;
    idx /= t;
  });
}

std::vector<SympVec> random_symplectic(int n, RngStream& rng) {
  require(n >= 1 && n <= 12, ErrorKind::invalid_input, "random_symplectic: n must be in [1,12]");
  return build_symplectic(n, [&rng](int m, std::uint64_t& k, std::uint64_t& b) {
    k = rng.below((std::uint64_t{1} << (2 * m)) - 1) + 1;
    b = rng.below(std::uint64_t{1} << (2 * m - 1));
  });
}

CliffordTableau tableau_from_symplectic(const std::vector<SympVec>& cols, std::uint32_t phase_bits,
                                        int n) {
  CliffordTableau t;
  t.n = n;
  t.img_x.resize(n);
  t.img_z.resize(n);
  auto to_pauli = [&](SympVec v, int sign) {
    std::uint32_t x = 0, z = 0;
    for (int q = 0; q < n; ++q) {
      if ((v >> (2 * q)) & 1) x |= (1u << q);
      if ((v >> (2 * q + 1)) & 1) z |= (1u << q);
    }
    return hermitian_pauli(n, x, z, sign);
  };
  for (int q = 0; q < n; ++q) {
    t.img_x[q] = to_pauli(cols[2 * q], ((phase_bits >> (2 * q)) & 1) ? -1 : +1);
    t.img_z[q] = to_pauli(cols[2 * q + 1], ((phase_bits >> (2 * q + 1)) & 1) ? -1 : +1);
  }
  return t;
}

CliffordTableau CliffordTableau::identity(int n) {
  CliffordTableau t;
  t.n = n;
  for (int q = 0; q < n; ++q) {
    t.img_x.push_back(hermitian_pauli(n, 1u << q, 0, +1));
    t.img_z.push_back(hermitian_pauli(n, 0, 1u << q, +1));
  }
  return t;
}

bool CliffordTableau::valid() const {
  if (static_cast<int>(img_x.size()) != n || static_cast<int>(img_z.size()) != n) return false;
  for (int j = 0; j < n; ++j) {
    if (!img_x[j].is_hermitian() || !img_z[j].is_hermitian()) return false;
    if ((img_x[j].x | img_x[j].z) == 0 || (img_z[j].x | img_z[j].z) == 0) return false;
  }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (!img_x[j].commutes_with(img_x[k]) || !img_z[j].commutes_with(img_z[k])) return false;
      bool anti = !img_x[j].commutes_with(img_z[k]);
      if (anti != (j == k)) return false;
    }
  return true;
}

SignedPauli CliffordTableau::conjugate(const SignedPauli& p) const {
  SignedPauli out = SignedPauli::identity(n);
  for (int q = 0; q < n; ++q) {
    if ((p.x >> q) & 1) out = out * img_x[q];
    if ((p.z >> q) & 1) out = out * img_z[q];
  }
  out.phase = static_cast<std::uint8_t>((out.phase + p.phase) & 3);
  return out;
}

CliffordTableau CliffordTableau::inverse() const {
  // Symplectic inverse is L M^T L; phases then follow from Pauli algebra.
  std::vector<SympVec> cols(2 * n, 0);
  auto col_of = [&](int c) -> SympVec {
    const SignedPauli& p = (c & 1) ? img_z[c >> 1] : img_x[c >> 1];
    SympVec v = 0;
    for (int q = 0; q < n; ++q) {
      if ((p.x >> q) & 1) v |= SympVec{1} << (2 * q);
      if ((p.z >> q) & 1) v |= SympVec{1} << (2 * q + 1);
    }
    return v;
  };
  std::vector<SympVec> m(2 * n);
  for (int c = 0; c < 2 * n; ++c) m[c] = col_of(c);
  for (int c = 0; c < 2 * n; ++c) {
    SympVec v = 0;
    for (int r = 0; r < 2 * n; ++r)
      if ((m[r ^ 1] >> (c ^ 1)) & 1) v |= SympVec{1} << r;
    cols[c] = v;
  }
  CliffordTableau inv = tableau_from_symplectic(cols, 0, n);
  // Fix signs: conjugating the claimed preimage by *this must reproduce the
  // basis Pauli exactly.
  for (int q = 0; q < n; ++q) {
    SignedPauli back = conjugate(inv.img_x[q]);
    if (back.sign() < 0) inv.img_x[q] = hermitian_pauli(n, inv.img_x[q].x, inv.img_x[q].z, -1);
    back = conjugate(inv.img_z[q]);
    if (back.sign() < 0) inv.img_z[q] = hermitian_pauli(n, inv.img_z[q].x, inv.img_z[q].z, -1);
  }
  return inv;
}

std::string CliffordTableau::key() const {
  std::string s;
  s.reserve(2 * n * 9 + 1);
  auto put = [&](const SignedPauli& p) {
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((p.x >> (8 * b)) & 0xff));
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((p.z >> (8 * b)) & 0xff));
    s.push_back(static_cast<char>(p.sign() < 0));
  };
  for (int q = 0; q < n; ++q) {
    put(img_x[q]);
    put(img_z[q]);
  }
  return s;
}

CliffordTableau clifford_from_index(std::uint64_t idx, int n) {
  std::uint64_t so = symplectic_order(n);
  require(idx < clifford_order(n), ErrorKind::invalid_input, "clifford index out of range");
  std::uint64_t sidx = idx % so;
  std::uint32_t phases = static_cast<std::uint32_t>(idx / so);
  return tableau_from_symplectic(symplectic_from_index(sidx, n), phases, n);
}

CliffordTableau sample_global_clifford_tableau(int n, RngStream& rng) {
  auto cols = random_symplectic(n, rng);
  std::uint32_t phases = static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << (2 * n)));
  return tableau_from_symplectic(cols, phases, n);
}

std::vector<cplx> state_from_record(const CliffordTableau& u, std::uint32_t outcome) {
  const int n = u.n;
  const std::size_t dim = std::size_t{1} << n;
  CliffordTableau inv = u.inverse();
  std::vector<cplx> v(dim), tmp(dim);
  for (std::size_t start = 0; start < dim; ++start) {
    std::fill(v.begin(), v.end(), cplx(0.0, 0.0));
    v[start] = 1.0;
    for (int j = 0; j < n; ++j) {
      double s = ((outcome >> j) & 1) ? -1.0 : 1.0;
      apply_signed_pauli(inv.img_z[j], v, tmp);
      for (std::size_t i = 0; i < dim; ++i) v[i] = 0.5 * (v[i] + s * tmp[i]);
    }
    double norm2 = 0.0;
    for (const auto& c : v) norm2 += std::norm(c);
    if (norm2 > 1e-9) {
      double inv_nrm = 1.0 / std::sqrt(norm2);
      for (auto& c : v) c *= inv_nrm;
      return v;
    }
  }
  throw Error(ErrorKind::solver_failure, "stabilizer projector annihilated every basis vector");
}

namespace {

std::string to_hex(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::uint32_t from_hex(const std::string& s) {
  return static_cast<std::uint32_t>(std::stoul(s, nullptr, 16));
}

}  // namespace

nlohmann::json tableau_to_json(const CliffordTableau& t) {
  nlohmann::json j;
  std::vector<std::string> xs, zs;
  std::vector<int> phase;
  auto push = [&](const SignedPauli& p) {
    xs.push_back(to_hex(p.x));
    zs.push_back(to_hex(p.z));
    phase.push_back(p.sign() < 0 ? 1 : 0);
  };
  for (int q = 0; q < t.n; ++q) push(t.img_x[q]);
  for (int q = 0; q < t.n; ++q) push(t.img_z[q]);
  j["x"] = xs;
  j["z"] = zs;
  j["phase"] = phase;
  return j;
}

CliffordTableau tableau_from_json(const nlohmann::json& j) {
  auto xs = j.at("x").get<std::vector<std::string>>();
  auto zs = j.at("z").get<std::vector<std::string>>();
  auto phase = j.at("phase").get<std::vector<int>>();
  require(xs.size() == zs.size() && xs.size() == phase.size() && xs.size() % 2 == 0,
          ErrorKind::invalid_input, "tableau JSON rows malformed");
  int n = static_cast<int>(xs.size() / 2);
  CliffordTableau t;
  t.n = n;
  for (int q = 0; q < n; ++q)
    t.img_x.push_back(hermitian_pauli(n, from_hex(xs[q]), from_hex(zs[q]), phase[q] ? -1 : +1));
  for (int q = 0; q < n; ++q)
    t.img_z.push_back(
        hermitian_pauli(n, from_hex(xs[n + q]), from_hex(zs[n + q]), phase[n + q] ? -1 : +1));
  require(t.valid(), ErrorKind::invalid_input, "tableau JSON violates symplectic relations");
  return t;
}

}  // namespace shadowval
