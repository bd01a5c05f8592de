#include "shadowval/decider.hpp"

#include <algorithm>
#include <cmath>

namespace shadowval {

void ObsConInstance::validate(double min_gap) const {
  require(observables.size() == targets.size(), ErrorKind::invalid_input,
          "observable/target count mismatch");
  require(0.0 <= alpha && alpha < beta && beta <= 2.0, ErrorKind::invalid_input,
          "thresholds must satisfy 0 <= alpha < beta <= 2");
  require(beta - alpha >= min_gap, ErrorKind::invalid_input, "threshold gap below declared minimum");
  for (double y : targets)
    require(y >= -1.0 - 1e-12 && y <= 1.0 + 1e-12, ErrorKind::invalid_input,
            "targets must lie in [-1,1]");
  require(dim >= 1 && dim <= 4096, ErrorKind::invalid_input, "instance dimension out of range");
}

const std::vector<ComplexMatrix>& ObsConInstance::expanded() const {
  if (cache_.size() == observables.size()) return cache_;
  cache_.clear();
  cache_.reserve(observables.size());
  for (const auto& h : observables) {
    if (std::holds_alternative<ComplexMatrix>(h)) {
      cache_.push_back(std::get<ComplexMatrix>(h));
    } else if (std::holds_alternative<PauliString>(h)) {
      cache_.push_back(pauli_to_matrix(std::get<PauliString>(h)));
    } else {
      const WeylPart& w = std::get<WeylPart>(h);
      ComplexMatrix m = pauli_to_matrix(w.string);
      ComplexMatrix out(m.rows(), m.cols());
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
          out(r, c) = w.imag ? cplx(0, -0.5) * (m(r, c) - std::conj(m(c, r)))
                             : 0.5 * (m(r, c) + std::conj(m(c, r)));
      cache_.push_back(std::move(out));
    }
    require(cache_.back().rows() == dim, ErrorKind::invalid_input,
            "observable dimension mismatch with instance");
  }
  return cache_;
}

namespace {

// Deterministic evaluation of all observable expectations (chunk order fixed).
void eval_expectations(const std::vector<ComplexMatrix>& obs, const ComplexMatrix& rho,
                       std::vector<double>& out, int threads) {
  const std::int64_t m = static_cast<std::int64_t>(obs.size());
  out.resize(m);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < m; ++i) {
    const ComplexMatrix& o = obs[i];
    cplx tr = 0.0;
    for (std::size_t r = 0; r < o.rows(); ++r)
      for (std::size_t c = 0; c < o.cols(); ++c) tr += o(r, c) * rho(c, r);
    out[i] = tr.real();
  }
}

ComplexMatrix gibbs_state(const ComplexMatrix& a) {
  // exp(-A) / Tr exp(-A), stabilized by shifting the spectrum.
  HermEig e = herm_eig(a);
  double lmin = e.values.back();
  const std::size_t n = a.rows();
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-(e.values[i] - lmin));
    z += w[i];
  }
  ComplexMatrix rho(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += e.vectors(r, k) * (w[k] / z) * std::conj(e.vectors(c, k));
      rho(r, c) = s;
    }
  return rho;
}

struct CompressedProblem {
  std::vector<ComplexMatrix> obs;  // on the working space
  std::size_t work_dim = 0;
  ComplexMatrix basis;             // dim x r isometry (empty when identity)
  bool compressed = false;
  bool slack = false;              // last working index is the orthocomplement
};

// When every observable is supported on a small joint subspace V, the
// feasible expectation vectors over full states equal those over
// {sigma >= 0, Tr sigma <= 1} on V; the slack dimension carries the leftover
// weight. This keeps the exact decider cheap for low-rank observable sets.
CompressedProblem compress_support(const std::vector<ComplexMatrix>& obs, std::size_t dim,
                                   bool force_plain) {
  CompressedProblem out;
  out.obs = obs;
  out.work_dim = dim;
  if (force_plain || dim <= 24 || obs.empty()) return out;

  std::vector<std::vector<cplx>> basis;
  auto add_vec = [&](std::vector<cplx> v) {
    for (const auto& b : basis) {
      cplx ov = 0.0;
      for (std::size_t i = 0; i < dim; ++i) ov += std::conj(b[i]) * v[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= ov * b[i];
    }
    double n2 = 0.0;
    for (const auto& c : v) n2 += std::norm(c);
    if (n2 < 1e-14) return;
    double s = 1.0 / std::sqrt(n2);
    for (auto& c : v) c *= s;
    basis.push_back(std::move(v));
  };
  for (const auto& o : obs) {
    HermEig e = herm_eig(o);
    for (std::size_t k = 0; k < dim; ++k) {
      if (std::abs(e.values[k]) < 1e-11) continue;
      std::vector<cplx> v(dim);
      for (std::size_t i = 0; i < dim; ++i) v[i] = e.vectors(i, k);
      add_vec(std::move(v));
      if (basis.size() >= dim) break;
    }
    if (basis.size() >= dim) break;
  }
  const std::size_t r = basis.size();
  if (r >= dim) return out;  // no room for a slack direction

  out.compressed = true;
  out.slack = true;
  out.work_dim = r + 1;
  out.basis = ComplexMatrix(dim, r);
  for (std::size_t c = 0; c < r; ++c)
    for (std::size_t i = 0; i < dim; ++i) out.basis(i, c) = basis[c][i];
  out.obs.clear();
  for (const auto& o : obs) {
    ComplexMatrix small(r + 1, r + 1);
    // small = V' O V, bordered by a zero slack row/column.
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j)
            s += std::conj(out.basis(i, a)) * o(i, j) * out.basis(j, b);
        small(a, b) = s;
      }
    out.obs.push_back(std::move(small));
  }
  return out;
}

}  // namespace

SolveResult min_max_violation(const ObsConInstance& inst, double tol, const SolveOptions& opts) {
  inst.validate();
  require(tol > 0, ErrorKind::invalid_input, "tolerance must be positive");
  const std::size_t dim = inst.dim;
  SolveResult res;

  if (inst.observables.empty()) {  // vacuously satisfiable
    res.chi_star = 0.0;
    res.lower_bound = 0.0;
    res.witness = DensityMatrix::maximally_mixed(dim).mat;
    res.converged = true;
    return res;
  }

  CompressedProblem prob = compress_support(inst.expanded(), dim, opts.trace_le_one);
  std::size_t wdim = prob.work_dim;
  std::vector<ComplexMatrix> obs = prob.obs;
  // Tr <= 1 mode without support compression: border with a slack dimension.
  if (opts.trace_le_one && !prob.compressed) {
    wdim = dim + 1;
    for (auto& o : obs) {
      ComplexMatrix big(wdim, wdim);
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) big(r, c) = o(r, c);
      o = std::move(big);
    }
  }
  const std::size_t m = obs.size();
  const std::vector<double>& y = inst.targets;

  // Saddle point min_rho max_lambda sum_j l_j s_j (<O_j, rho> - y_j) over the
  // spectraplex x the 2m-simplex (signed one-sided constraints), solved by
  // entropic mirror-prox: exponentiated-gradient updates on both blocks with
  // an extragradient correction. Averaged iterates certify value brackets:
  // any rho gives the upper value f(rho), any lambda the lower bound
  // lambda_min(M(lambda)) - <lambda, s y>.
  ComplexMatrix expo(wdim, wdim);            // log-weights of the primal iterate
  std::vector<double> loglam(2 * m, 0.0);    // log-weights of the dual iterate
  std::vector<double> vals;

  double f_best = std::numeric_limits<double>::infinity();
  ComplexMatrix rho_best;
  double lb_best = 0.0;  // chi >= 0 always holds

  auto eval_f = [&](const ComplexMatrix& state) {
    eval_expectations(obs, state, vals, opts.threads);
    double f = 0.0;
    for (std::size_t i = 0; i < m; ++i) f = std::max(f, std::abs(vals[i] - y[i]));
    return f;
  };
  auto softmax = [&](const std::vector<double>& lg, std::vector<double>& out) {
    double mx = *std::max_element(lg.begin(), lg.end());
    double z = 0.0;
    out.resize(lg.size());
    for (std::size_t i = 0; i < lg.size(); ++i) {
      out[i] = std::exp(lg[i] - mx);
      z += out[i];
    }
    for (auto& v : out) v /= z;
  };
  auto build_m = [&](const std::vector<double>& lam, ComplexMatrix& mlam, double& ysum) {
    for (auto& e : mlam.data()) e = 0.0;
    ysum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double w = lam[2 * i] - lam[2 * i + 1];
      if (w != 0.0) {
        const auto& od = obs[i].data();
        for (std::size_t k = 0; k < mlam.data().size(); ++k) mlam.data()[k] += w * od[k];
        ysum += w * y[i];
      }
    }
  };
  auto dual_value = [&](const std::vector<double>& lam) {
    ComplexMatrix mlam(wdim, wdim);
    double ysum;
    build_m(lam, mlam, ysum);
    HermEig e = herm_eig(mlam);
    return e.values.back() - ysum;
  };
  // gradient of the dual block at a primal point: s_j (<O_j, rho> - y_j)
  auto dual_grad = [&](const ComplexMatrix& state, std::vector<double>& g) {
    eval_expectations(obs, state, vals, opts.threads);
    g.resize(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      double dev = vals[i] - y[i];
      g[2 * i] = dev;
      g[2 * i + 1] = -dev;
    }
  };

  double eta = 0.25;
  ComplexMatrix rho_bar(wdim, wdim);
  std::vector<double> lam_bar(2 * m, 0.0);
  long navg = 0;
  ComplexMatrix rho_t = gibbs_state(expo);
  rho_best = rho_t;
  f_best = eval_f(rho_t);
  long stall_check = 0;
  double stall_gap = std::numeric_limits<double>::infinity();

  std::vector<double> lam_t, lam_w, gtmp;
  ComplexMatrix mlam(wdim, wdim), expo_w(wdim, wdim);
  double ysum;

  long t = 0;
  for (; t < opts.max_iters; ++t) {
    softmax(loglam, lam_t);
    // leading half-step from (rho_t, lam_t)
    build_m(lam_t, mlam, ysum);
    expo_w = expo;
    expo_w += cplx(eta, 0.0) * mlam;
    ComplexMatrix rho_w = gibbs_state(expo_w);
    dual_grad(rho_t, gtmp);
    lam_w.assign(2 * m, 0.0);
    for (std::size_t i = 0; i < 2 * m; ++i) lam_w[i] = loglam[i] + eta * gtmp[i];
    std::vector<double> lam_w_dist;
    softmax(lam_w, lam_w_dist);
    // extragradient step using the midpoint fields
    build_m(lam_w_dist, mlam, ysum);
    expo += cplx(eta, 0.0) * mlam;
    dual_grad(rho_w, gtmp);
    for (std::size_t i = 0; i < 2 * m; ++i) loglam[i] += eta * gtmp[i];
    rho_t = gibbs_state(expo);

    rho_bar += rho_w;
    for (std::size_t i = 0; i < 2 * m; ++i) lam_bar[i] += lam_w_dist[i];
    ++navg;

    if (t % 20 == 19 || t == opts.max_iters - 1) {
      double fw = eval_f(rho_w);
      if (fw < f_best) {
        f_best = fw;
        rho_best = rho_w;
      }
      ComplexMatrix avg = rho_bar;
      avg *= cplx(1.0 / static_cast<double>(navg), 0.0);
      double fa = eval_f(avg);
      if (fa < f_best) {
        f_best = fa;
        rho_best = avg;
      }
      std::vector<double> lavg(2 * m);
      for (std::size_t i = 0; i < 2 * m; ++i) lavg[i] = lam_bar[i] / static_cast<double>(navg);
      lb_best = std::max({lb_best, dual_value(lavg), dual_value(lam_w_dist)});
      if (f_best - lb_best <= tol) {
        ++t;
        break;
      }
      // anchor restart: refresh the averages periodically; if two restarts
      // in a row barely move the gap, temper the step size
      if (++stall_check % 100 == 0) {
        rho_bar = ComplexMatrix(wdim, wdim);
        std::fill(lam_bar.begin(), lam_bar.end(), 0.0);
        navg = 0;
        ++res.restarts;
        if (stall_gap - (f_best - lb_best) < tol * 0.05) eta = std::max(eta * 0.7, 0.02);
        stall_gap = f_best - lb_best;
      }
    }
  }

  res.iterations = t;
  res.chi_star = f_best;
  res.lower_bound = lb_best;
  res.converged = (f_best - lb_best) <= tol;

  // Lift the witness back to the full space.
  if (prob.compressed) {
    const std::size_t r = prob.basis.cols();
    ComplexMatrix full(dim, dim);
    // V sigma V' over the support block
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        cplx s = 0.0;
        for (std::size_t a = 0; a < r; ++a)
          for (std::size_t b = 0; b < r; ++b)
            s += prob.basis(i, a) * rho_best(a, b) * std::conj(prob.basis(j, b));
        full(i, j) = s;
      }
    // leftover weight spread over the orthocomplement
    double lift = rho_best(r, r).real();
    if (lift > 0) {
      ComplexMatrix proj(dim, dim);  // I - V V'
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
          cplx s = (i == j) ? 1.0 : 0.0;
          for (std::size_t a = 0; a < r; ++a) s -= prob.basis(i, a) * std::conj(prob.basis(j, a));
          proj(i, j) = s;
        }
      proj *= cplx(lift / static_cast<double>(dim - r), 0.0);
      full += proj;
    }
    res.witness = std::move(full);
  } else if (opts.trace_le_one) {
    ComplexMatrix full(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) full(i, j) = rho_best(i, j);
    double lift = rho_best(dim, dim).real();
    for (std::size_t i = 0; i < dim; ++i) full(i, i) += lift / static_cast<double>(dim);
    res.witness = std::move(full);
  } else {
    res.witness = std::move(rho_best);
  }

  if (!res.converged && opts.throw_on_nonconvergence)
    throw Error(ErrorKind::solver_failure,
                "min_max_violation: certified gap " + std::to_string(res.residual()) +
                    " above tolerance after iteration cap");
  return res;
}

Decision decide(const ObsConInstance& inst, const SolveOptions& opts) {
  inst.validate();
  const double mid = inst.alpha + (inst.beta - inst.alpha) / 2.0;
  const double tol = (inst.beta - inst.alpha) / 8.0;
  SolveOptions local = opts;
  local.throw_on_nonconvergence = false;
  SolveResult r = min_max_violation(inst, tol, local);
  Decision d;
  d.chi_star = r.chi_star;
  d.iterations = r.iterations;
  d.residual = r.residual();
  // chi* is bracketed by [lower_bound, chi_star]; classify whenever the
  // bracket clears the midpoint even if the gap target was missed.
  if (r.chi_star <= mid) {
    d.verdict = "YES";
  } else if (r.lower_bound > mid || r.converged) {
    d.verdict = "NO";
  } else {
    throw Error(ErrorKind::solver_failure, "decide: solver could not resolve the midpoint rule");
  }
  // Re-symmetrize roundoff before validating the witness.
  ComplexMatrix w = r.witness;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = i; j < w.cols(); ++j) {
      cplx v = 0.5 * (w(i, j) + std::conj(w(j, i)));
      w(i, j) = v;
      w(j, i) = std::conj(v);
    }
  cplx tr = w.trace();
  w *= cplx(1.0, 0.0) / tr;
  try {
    d.witness = DensityMatrix(w);
  } catch (const Error&) {
    // tiny negative eigenvalues from the lift; witness is optional
  }
  return d;
}

double brute_force_1q(const ObsConInstance& inst, std::size_t grid, int refine_rounds,
                      int threads) {
  inst.validate();
  require(inst.dim == 2, ErrorKind::invalid_input, "brute_force_1q: instance must be 1-qubit");
  const auto& obs = inst.expanded();
  const std::size_t m = obs.size();
  if (m == 0) return 0.0;

  // Bloch parametrization: Tr(O rho) = t_i + c * <a_i, u>.
  std::vector<double> base(m);
  std::vector<std::array<double, 3>> bloch(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ComplexMatrix& o = obs[i];
    base[i] = 0.5 * o.trace().real() - inst.targets[i];
    bloch[i][0] = o(0, 1).real();               // Tr(O X)/2
    bloch[i][1] = -o(0, 1).imag();              // Tr(O Y)/2
    bloch[i][2] = 0.5 * (o(0, 0) - o(1, 1)).real();
  }

  // Exact minimum of max_i |base_i + c h_i| over c in [0,1].
  auto radial_min = [&](const std::array<double, 3>& u) {
    auto feval = [&](double c) {
      double f = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double h = bloch[i][0] * u[0] + bloch[i][1] * u[1] + bloch[i][2] * u[2];
        f = std::max(f, std::abs(base[i] + c * h));
      }
      return f;
    };
    double best = std::min(feval(0.0), feval(1.0));
    auto try_c = [&](double c) {
      if (c > 0.0 && c < 1.0) best = std::min(best, feval(c));
    };
    std::vector<double> h(m);
    for (std::size_t i = 0; i < m; ++i)
      h[i] = bloch[i][0] * u[0] + bloch[i][1] * u[1] + bloch[i][2] * u[2];
    for (std::size_t i = 0; i < m; ++i) {
      if (h[i] != 0.0) try_c(-base[i] / h[i]);
      for (std::size_t j = i + 1; j < m; ++j) {
        double dh = h[j] - h[i];
        if (dh != 0.0) try_c((base[i] - base[j]) / dh);
        double sh = h[i] + h[j];
        if (sh != 0.0) try_c(-(base[i] + base[j]) / sh);
      }
    }
    return best;
  };

  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  double global_best = std::numeric_limits<double>::infinity();
  std::array<double, 3> ubest{0, 0, 1};
#pragma omp parallel num_threads(threads)
  {
    double local_best = std::numeric_limits<double>::infinity();
    std::array<double, 3> ulocal{0, 0, 1};
#pragma omp for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(grid); ++k) {
      double zc = 1.0 - (2.0 * k + 1.0) / static_cast<double>(grid);
      double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      double th = golden * static_cast<double>(k);
      std::array<double, 3> u{rr * std::cos(th), rr * std::sin(th), zc};
      double f = radial_min(u);
      if (f < local_best) {
        local_best = f;
        ulocal = u;
      }
    }
#pragma omp critical
    {
      if (local_best < global_best ||
          (local_best == global_best && ulocal < ubest)) {
        global_best = local_best;
        ubest = ulocal;
      }
    }
  }

  // Local refinement on the sphere around the best direction.
  double radius = 6.0 / std::sqrt(static_cast<double>(grid));
  for (int round = 0; round < refine_rounds; ++round) {
    // tangent frame at ubest
    std::array<double, 3> t1, t2;
    if (std::abs(ubest[2]) < 0.9) {
      t1 = {-ubest[1], ubest[0], 0.0};
    } else {
      t1 = {0.0, -ubest[2], ubest[1]};
    }
    double n1 = std::sqrt(t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]);
    for (auto& c : t1) c /= n1;
    t2 = {ubest[1] * t1[2] - ubest[2] * t1[1], ubest[2] * t1[0] - ubest[0] * t1[2],
          ubest[0] * t1[1] - ubest[1] * t1[0]};
    std::array<double, 3> center = ubest;
    for (int a = -7; a <= 7; ++a)
      for (int b = -7; b <= 7; ++b) {
        std::array<double, 3> u;
        double norm2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          u[c] = center[c] + radius * (a * t1[c] + b * t2[c]) / 7.0;
          norm2 += u[c] * u[c];
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& c : u) c *= inv;
        double f = radial_min(u);
        if (f < global_best) {
          global_best = f;
          ubest = u;
        }
      }
    radius /= 7.0;
  }
  return global_best;
}

ObsConInstance instance_from_shadow(const Shadow& s, std::vector<ObsHandle> obs, int K,
                                    int chi_bits, double alpha, double beta, int threads) {
  ObsConInstance inst;
  inst.n = s.n;
  inst.d = s.d;
  inst.dim = 1;
  for (int i = 0; i < s.n; ++i) inst.dim *= static_cast<std::size_t>(s.d);
  inst.alpha = alpha;
  inst.beta = beta;
  inst.targets.reserve(obs.size());
  for (const auto& h : obs) inst.targets.push_back(mom_recover(s, h, K, chi_bits, threads));
  inst.observables = std::move(obs);
  inst.validate();
  return inst;
}

namespace {

nlohmann::json obs_to_json(const ObsHandle& h) {
  nlohmann::json j;
  if (std::holds_alternative<PauliString>(h)) {
    const PauliString& p = std::get<PauliString>(h);
    if (p.is_qubit()) {
      j["pauli"] = p.letters;
    } else {
      nlohmann::json w;
      std::vector<int> a, b;
      for (auto& [aa, bb] : p.weyl) {
        a.push_back(aa);
        b.push_back(bb);
      }
      w["a"] = a;
      w["b"] = b;
      w["part"] = "plain";
      w["d"] = p.localdim;
      j["weyl"] = w;
    }
  } else if (std::holds_alternative<WeylPart>(h)) {
    const WeylPart& wp = std::get<WeylPart>(h);
    nlohmann::json w;
    std::vector<int> a, b;
    for (auto& [aa, bb] : wp.string.weyl) {
      a.push_back(aa);
      b.push_back(bb);
    }
    w["a"] = a;
    w["b"] = b;
    w["part"] = wp.imag ? "im" : "re";
    w["d"] = wp.string.localdim;
    j["weyl"] = w;
  } else {
    j["matrix"] = matrix_to_json(std::get<ComplexMatrix>(h));
  }
  return j;
}

ObsHandle obs_from_json(const nlohmann::json& j) {
  if (j.contains("pauli")) return PauliString::qubit(j["pauli"].get<std::string>());
  if (j.contains("weyl")) {
    const auto& w = j["weyl"];
    auto a = w.at("a").get<std::vector<int>>();
    auto b = w.at("b").get<std::vector<int>>();
    require(a.size() == b.size(), ErrorKind::invalid_input, "weyl label arrays mismatch");
    std::vector<std::pair<int, int>> labels;
    for (std::size_t i = 0; i < a.size(); ++i) labels.emplace_back(a[i], b[i]);
    PauliString p = PauliString::qudit(w.at("d").get<int>(), std::move(labels));
    std::string part = w.value("part", "re");
    if (part == "plain") return p;
    return WeylPart{std::move(p), part == "im"};
  }
  require(j.contains("matrix"), ErrorKind::invalid_input,
          "observable JSON needs pauli, weyl, or matrix");
  ComplexMatrix m = matrix_from_json(j["matrix"]);
  Observable checked{m};  // validates Hermiticity and norm
  return checked.mat;
}

}  // namespace

nlohmann::json instance_to_json(const ObsConInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["d"] = inst.d;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& h : inst.observables) arr.push_back(obs_to_json(h));
  j["observables"] = std::move(arr);
  j["targets"] = inst.targets;
  j["alpha"] = inst.alpha;
  j["beta"] = inst.beta;
  return j;
}

ObsConInstance instance_from_json(const nlohmann::json& j) {
  ObsConInstance inst;
  inst.n = j.at("n");
  inst.d = j.value("d", 2);
  inst.dim = 1;
  for (int i = 0; i < inst.n; ++i) inst.dim *= static_cast<std::size_t>(inst.d);
  for (const auto& o : j.at("observables")) inst.observables.push_back(obs_from_json(o));
  inst.targets = j.at("targets").get<std::vector<double>>();
  inst.alpha = j.at("alpha");
  inst.beta = j.at("beta");
  inst.validate();
  return inst;
}

nlohmann::json decision_to_json(const Decision& d) {
  nlohmann::json j;
  j["verdict"] = d.verdict;
  j["chi_star"] = d.chi_star;
  j["iterations"] = d.iterations;
  j["residual"] = d.residual;
  return j;
}

}  // namespace shadowval
