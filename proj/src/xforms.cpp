#include "shadowval/xforms.hpp"

#include <algorithm>
#include <cmath>

namespace shadowval {

mpq_class rational_from_decimal(const std::string& s) {
  require(!s.empty(), ErrorKind::invalid_input, "empty decimal string");
  std::string t = s;
  bool negative = false;
  if (t[0] == '+' || t[0] == '-') {
    negative = (t[0] == '-');
    t = t.substr(1);
  }
  auto dot = t.find('.');
  std::string digits = (dot == std::string::npos) ? t : t.substr(0, dot) + t.substr(dot + 1);
  std::size_t frac = (dot == std::string::npos) ? 0 : t.size() - dot - 1;
  require(!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos,
          ErrorKind::invalid_input, "malformed decimal string: " + s);
  mpz_class num(digits, 10);
  mpz_class den = 1;
  for (std::size_t i = 0; i < frac; ++i) den *= 10;
  mpq_class q(num, den);
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

CldmToObsConResult cldm_to_obscon(const std::vector<CldmSet>& sets, int n,
                                  const mpq_class& alpha_prime, const mpq_class& beta_prime,
                                  int k) {
  require(n >= 1 && n <= 12, ErrorKind::invalid_input, "cldm_to_obscon: n out of range");
  require(k >= 1, ErrorKind::invalid_input, "cldm_to_obscon: k must be >= 1");
  CldmToObsConResult out;
  out.exact.alpha = alpha_prime;
  mpz_class four_k = 1;
  for (int i = 0; i < k; ++i) four_k *= 4;
  out.exact.beta = beta_prime / mpq_class(four_k);

  ObsConInstance inst;
  inst.n = n;
  inst.d = 2;
  inst.dim = std::size_t{1} << n;
  const char* letters = "IXYZ";
  for (const auto& set : sets) {
    require(static_cast<int>(set.sites.size()) <= k, ErrorKind::invalid_input,
            "cldm_to_obscon: set larger than the declared locality k");
    for (int site : set.sites)
      require(site >= 0 && site < n, ErrorKind::invalid_input, "cldm_to_obscon: site out of range");
    DensityMatrix rho{set.state};  // validates
    require(rho.dim == (std::size_t{1} << set.sites.size()), ErrorKind::invalid_input,
            "cldm_to_obscon: state dimension does not match the set");
    std::size_t combos = std::size_t{1} << (2 * set.sites.size());
    for (std::size_t c = 0; c < combos; ++c) {
      std::string full(n, 'I');
      std::string local(set.sites.size(), 'I');
      std::size_t rem = c;
      for (std::size_t q = 0; q < set.sites.size(); ++q) {
        local[q] = letters[rem % 4];
        full[set.sites[q]] = local[q];
        rem /= 4;
      }
      ComplexMatrix pm = pauli_to_matrix(PauliString::qubit(local));
      cplx y = matmul(pm, rho.mat).trace();
      require(std::abs(y.imag()) < 1e-10, ErrorKind::invalid_input,
              "cldm_to_obscon: non-real Pauli expectation");
      inst.observables.push_back(PauliString::qubit(full));
      inst.targets.push_back(y.real());
    }
  }
  inst.alpha = out.exact.alpha.get_d();
  inst.beta = out.exact.beta.get_d();
  out.instance = std::move(inst);
  return out;
}

CheckPair check_to_pair(const CheckTriple& check, const mpq_class& eps) {
  const ComplexMatrix& v = check.v;
  require(v.is_square() && v.rows() >= 2 && v.rows() <= 4096, ErrorKind::invalid_input,
          "check_to_pair: dimension out of range");
  require(eps > 0 && eps <= 1, ErrorKind::invalid_input, "check_to_pair: eps must be in (0,1]");
  require(check.r >= 0 && check.r <= 1 && check.s >= 0 && check.s <= 1, ErrorKind::invalid_input,
          "check_to_pair: r, s must lie in [0,1]");
  ComplexMatrix vv = matmul(v.adjoint(), v);
  for (std::size_t i = 0; i < vv.rows(); ++i) vv(i, i) -= 1.0;
  require(vv.max_abs() < tolerances().unitary, ErrorKind::invalid_input,
          "check_to_pair: V is not unitary");

  mpq_class eps_prime = eps / 2;
  mpq_class tau = eps / 4;
  mpq_class s_prime = std::max(check.s, tau);
  mpq_class t = tau / s_prime;

  CheckPair out;
  out.scale = t;
  out.exact.alpha = tau;
  out.exact.beta = tau + tau * eps_prime;
  out.target = mpq_class(t * check.r).get_d();

  // O = t V^dag Pi1 V with Pi1 = |1><1| on the leftmost (output) qubit.
  const std::size_t dim = v.rows();
  const std::size_t half = dim / 2;
  ComplexMatrix o(dim, dim);
  const double td = t.get_d();
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      cplx s = 0.0;
      for (std::size_t x = half; x < dim; ++x) s += std::conj(v(x, a)) * v(x, b);
      o(a, b) = td * s;
    }
  out.observable = std::move(o);
  return out;
}

FlattenResult bloc_flatten(const BlockInstance& b) {
  require(!b.blocks.empty(), ErrorKind::invalid_input, "bloc_flatten: no blocks");
  for (const auto& blk : b.blocks) {
    require(!blk.observables.empty() && blk.observables.size() == blk.targets.size(),
            ErrorKind::invalid_input, "bloc_flatten: empty or inconsistent block");
    require(blk.alpha >= 0 && blk.alpha < blk.beta && blk.beta <= 2, ErrorKind::invalid_input,
            "bloc_flatten: block thresholds must satisfy 0 <= alpha < beta <= 2");
  }
  mpq_class g = b.blocks[0].beta - b.blocks[0].alpha;
  for (const auto& blk : b.blocks) g = std::min(g, mpq_class(blk.beta - blk.alpha));
  mpq_class tau = g / 4;

  FlattenResult out;
  out.exact.alpha = tau;
  out.exact.beta = tau + tau * g / 4;  // beta - alpha = g^2 / 16 exactly

  ObsConInstance inst;
  inst.n = b.n;
  inst.d = b.d;
  inst.dim = b.dim;
  for (const auto& blk : b.blocks) {
    mpq_class alpha_prime = std::max(blk.alpha, tau);
    mpq_class t = tau / alpha_prime;
    out.scales.push_back(t);
    const double td = t.get_d();
    for (std::size_t i = 0; i < blk.observables.size(); ++i) {
      ComplexMatrix m;
      if (std::holds_alternative<ComplexMatrix>(blk.observables[i])) {
        m = std::get<ComplexMatrix>(blk.observables[i]);
      } else if (std::holds_alternative<PauliString>(blk.observables[i])) {
        m = pauli_to_matrix(std::get<PauliString>(blk.observables[i]));
      } else {
        const WeylPart& w = std::get<WeylPart>(blk.observables[i]);
        ComplexMatrix raw = pauli_to_matrix(w.string);
        m = ComplexMatrix(raw.rows(), raw.cols());
        for (std::size_t a = 0; a < raw.rows(); ++a)
          for (std::size_t c = 0; c < raw.cols(); ++c)
            m(a, c) = w.imag ? cplx(0, -0.5) * (raw(a, c) - std::conj(raw(c, a)))
                             : 0.5 * (raw(a, c) + std::conj(raw(c, a)));
      }
      m *= cplx(td, 0.0);
      inst.observables.push_back(std::move(m));
      inst.targets.push_back(td * blk.targets[i]);
    }
  }
  inst.alpha = out.exact.alpha.get_d();
  inst.beta = out.exact.beta.get_d();
  out.instance = std::move(inst);
  return out;
}

ReconstructionResult sampled_to_explicit(const SampledSource& source, double delta,
                                         std::uint64_t seed) {
  require(source.label_space >= 1, ErrorKind::invalid_input, "label space must be nonempty");
  require(delta > 0 && delta < 1, ErrorKind::invalid_input, "delta must be in (0,1)");
  require(static_cast<bool>(source.draw), ErrorKind::invalid_input, "sampler is empty");
  const double l = static_cast<double>(source.label_space);
  const std::size_t n_draws = static_cast<std::size_t>(
      std::ceil(l * (std::log(l) + std::log(1.0 / delta))));
  const std::size_t total = std::max<std::size_t>(n_draws, 1);

  ReconstructionResult out;
  out.draws = total;
  std::vector<bool> seen(source.label_space, false);
  std::vector<LocalRecord> records(source.label_space);
  RngStream rng(seed, stream_label("sampled-shadow"), 0);
  std::size_t found = 0;
  for (std::size_t i = 0; i < total; ++i) {
    auto [label, rec] = source.draw(rng);
    require(label < source.label_space, ErrorKind::invalid_input,
            "sampler produced an out-of-range label");
    if (!seen[label]) {
      seen[label] = true;
      records[label] = std::move(rec);
      ++found;
    }
  }
  if (found < source.label_space) {
    out.complete = false;
    out.missing = source.label_space - found;
    return out;
  }
  out.complete = true;
  out.shadow.protocol = source.protocol;
  out.shadow.n = source.n;
  out.shadow.d = source.d;
  out.shadow.K = source.K;
  out.shadow.local_records = std::move(records);
  return out;
}

}  // namespace shadowval
