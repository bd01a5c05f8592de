// shadowval: classical-shadow validity toolkit.
//
// Subcommands: shadow, recover, decide, reduce-cldm, dequantize, xform,
// gen-fixture, bench. All stochastic commands require --seed; every run
// writes a JSON report (plus a flat CSV twin) that embeds its own config.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shadowval/cldm.hpp"
#include "shadowval/decider.hpp"
#include "shadowval/dequant.hpp"
#include "shadowval/fixtures.hpp"
#include "shadowval/report.hpp"
#include "shadowval/shadows.hpp"
#include "shadowval/xforms.hpp"

using namespace shadowval;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::invalid_input, "cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::invalid_input, "cannot write " + path);
  out << j.dump(2) << "\n";
}

mpq_class rational_from_json(const nlohmann::json& j) {
  if (j.is_string()) return rational_from_decimal(j.get<std::string>());
  return mpq_class(j.get<double>());
}

DensityMatrix named_state(const std::string& name, int n, int d) {
  std::size_t dim = 1;
  for (int i = 0; i < n; ++i) dim *= static_cast<std::size_t>(d);
  if (name == "mixed") return DensityMatrix::maximally_mixed(dim);
  if (name == "zero") {
    std::vector<cplx> psi(dim, cplx(0.0, 0.0));
    psi[0] = 1.0;
    return DensityMatrix::pure(psi);
  }
  if (name == "plus") {
    std::vector<cplx> psi(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    return DensityMatrix::pure(psi);
  }
  return DensityMatrix{matrix_from_json(load_json(name))};
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void apply_tol_profile(const std::string& path) {
  if (path.empty()) return;
  nlohmann::json j = load_json(path);
  auto& t = tolerances();
  t.hermitian = j.value("hermitian", t.hermitian);
  t.trace_one = j.value("trace_one", t.trace_one);
  t.psd = j.value("psd", t.psd);
  t.obs_norm = j.value("obs_norm", t.obs_norm);
  t.eig_residual = j.value("eig_residual", t.eig_residual);
  t.imag_part = j.value("imag_part", t.imag_part);
  t.lp_interval = j.value("lp_interval", t.lp_interval);
  t.unitary = j.value("unitary", t.unitary);
  t.stitch_float = j.value("stitch_float", t.stitch_float);
}

SnapshotAlphabet alphabet_for(const CldmInstance& inst, const std::vector<int>& restriction) {
  if (inst.qudit_mode()) return enumerate_alphabet_qudit(inst.d, restriction);
  return enumerate_alphabet(inst.ell(), restriction);
}

int run_bench(const std::string& out, int threads) {
  nlohmann::json cfg{{"threads", threads}};
  nlohmann::json report = make_report("bench", cfg);
  Timer total;
  RngStream rng(12345, stream_label("bench"), 0);
  auto gauss = [&rng]() {
    double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  auto random_mat = [&](std::size_t n) {
    ComplexMatrix m(n, n);
    for (auto& x : m.data()) x = cplx(gauss(), gauss());
    return m;
  };
  nlohmann::json rows = nlohmann::json::array();
  auto add_row = [&](const std::string& kernel, const std::string& variant, double sec) {
    rows.push_back({{"kernel", kernel}, {"variant", variant}, {"seconds", sec}});
    std::cout << kernel << " " << variant << ": " << sec << " s\n";
  };

  for (std::size_t n : {128u, 192u}) {
    ComplexMatrix a = random_mat(n), b = random_mat(n);
    Timer t1;
    ComplexMatrix c1 = matmul_serial(a, b);
    add_row("gemm-" + std::to_string(n), "serial", t1.seconds());
    Timer t2;
    ComplexMatrix c2 = matmul(a, b, threads);
    add_row("gemm-" + std::to_string(n), "omp", t2.seconds());
    require(c1.data() == c2.data(), ErrorKind::solver_failure, "gemm variants disagree");
  }
  for (std::size_t n : {96u, 128u}) {
    ComplexMatrix g = random_mat(n);
    ComplexMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
    Timer t1;
    auto e1 = herm_eig(h);
    add_row("eig-" + std::to_string(n), "householder-ql", t1.seconds());
    Timer t2;
    auto e2 = herm_eig_jacobi(h);
    add_row("eig-" + std::to_string(n), "jacobi-reference", t2.seconds());
    for (std::size_t i = 0; i < n; ++i)
      require(std::abs(e1.values[i] - e2.values[i]) < 1e-7 * n, ErrorKind::solver_failure,
              "eig variants disagree");
  }
  {
    SnapshotAlphabet alpha = enumerate_alphabet(1, {0, 4, 5});
    ComplexMatrix sigma = ComplexMatrix::identity(4);
    sigma *= cplx(0.25, 0.0);
    Timer t1;
    auto f1 = trace_filter(sigma, 14, 0.4, alpha, std::nullopt, 2, 1);
    add_row("trace-filter-L14", "serial", t1.seconds());
    Timer t2;
    auto f2 = trace_filter(sigma, 14, 0.4, alpha, std::nullopt, 2, std::max(threads, 2));
    add_row("trace-filter-L14", "omp", t2.seconds());
    require(f1.size() == f2.size(), ErrorKind::solver_failure, "filter variants disagree");
  }
  {
    std::vector<cplx> v(1 << 16);
    for (auto& c : v) c = cplx(gauss(), gauss());
    SqVector sq = build_sq(std::move(v));
    Timer t1;
    std::uint64_t acc = 0;
    const int draws = 2'000'000;
    for (int i = 0; i < draws; ++i) acc += sq.sample(rng);
    double sec = t1.seconds();
    add_row("sq-sampling-2e6", "alias", sec);
    report["sq_sample_sink"] = acc % 97;
  }
  report["rows"] = rows;
  finish_report(report, total.seconds());
  if (!out.empty()) write_report(report, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shadowval: classical-shadow validity toolkit"};
  app.require_subcommand(1);

  std::string out, report_path, tol_profile;
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (default 1, bitwise reproducible)");
  app.add_option("--tol-profile", tol_profile, "JSON file overriding numeric tolerances");

  // ---- shadow ----
  auto* cmd_shadow = app.add_subcommand("shadow", "sample a classical shadow");
  std::string protocol = "local", state = "mixed";
  int n = 2, d = 3, k_blocks = 1, chi = 24;
  std::uint64_t seed = 0;
  std::size_t big_l = 1000;
  cmd_shadow->add_option("--protocol", protocol, "local | global | qudit");
  cmd_shadow->add_option("--n", n, "sites");
  cmd_shadow->add_option("--d", d, "qudit dimension (qudit protocol)");
  cmd_shadow->add_option("--L", big_l, "rounds");
  cmd_shadow->add_option("--K", k_blocks, "recovery block count stored in metadata");
  cmd_shadow->add_option("--seed", seed, "master seed")->required();
  cmd_shadow->add_option("--state", state, "mixed | zero | plus | path to a state JSON");
  cmd_shadow->add_option("--out", out, "shadow JSON path")->required();
  cmd_shadow->add_option("--report", report_path, "report path (default <out>.report.json)");

  // ---- recover ----
  auto* cmd_recover = app.add_subcommand("recover", "median-of-means estimates from a shadow");
  std::string shadow_path, instance_path;
  std::vector<std::string> paulis;
  cmd_recover->add_option("--shadow", shadow_path, "shadow JSON")->required();
  cmd_recover->add_option("--pauli", paulis, "Pauli string observable (repeatable)");
  cmd_recover->add_option("--instance", instance_path, "take observables from an instance JSON");
  cmd_recover->add_option("--K", k_blocks, "block count (0 = heuristic default)");
  cmd_recover->add_option("--chi", chi, "fractional bits of precision");
  cmd_recover->add_option("--out", out, "report path")->required();

  // ---- decide ----
  auto* cmd_decide = app.add_subcommand("decide", "decide an observable-consistency instance");
  cmd_decide->add_option("--instance", instance_path, "instance JSON")->required();
  cmd_decide->add_option("--out", out, "report path")->required();

  // ---- reduce-cldm ----
  auto* cmd_reduce = app.add_subcommand("reduce-cldm", "chain-marginal to CSV reduction");
  std::string restriction_csv;
  std::string shadow_out;
  std::int64_t l_rounds = 20;
  double eps = 0.05;
  int ball_radius = 2;
  cmd_reduce->add_option("--instance", instance_path, "CLDM instance JSON")->required();
  cmd_reduce->add_option("--L", l_rounds, "shadow denominator");
  cmd_reduce->add_option("--eps", eps, "trace-norm filter tolerance");
  cmd_reduce->add_option("--restriction", restriction_csv,
                         "comma-separated alphabet letter codes (empty = full)");
  cmd_reduce->add_option("--chi", chi, "recovery precision bits");
  cmd_reduce->add_option("--ball-radius", ball_radius, "pruning ball radius for m > 3");
  cmd_reduce->add_option("--shadow-out", shadow_out, "optionally dump the stitched shadow");
  cmd_reduce->add_option("--out", out, "report path")->required();

  // ---- dequantize ----
  auto* cmd_dequant = app.add_subcommand("dequantize", "randomized-sketch decision pipeline");
  std::string input_path;
  std::size_t p_budget = 0;
  bool exact_estimates = false;
  cmd_dequant->add_option("--input", input_path, "observables/targets JSON")->required();
  cmd_dequant->add_option("--p-budget", p_budget, "FKV row budget (0 = default)");
  cmd_dequant->add_flag("--exact", exact_estimates, "replace estimators by exact contractions");
  cmd_dequant->add_option("--seed", seed, "master seed")->required();
  cmd_dequant->add_option("--out", out, "report path")->required();

  // ---- xform ----
  auto* cmd_xform = app.add_subcommand("xform", "instance-to-instance mappings");
  std::string map_name, in_path;
  double delta = 0.01;
  cmd_xform
      ->add_option("--map", map_name,
                   "cldm-to-obscon | check-to-pair | bloc-flatten | sampled-to-explicit")
      ->required();
  cmd_xform->add_option("--in", in_path, "input JSON")->required();
  cmd_xform->add_option("--delta", delta, "confidence for sampled-to-explicit");
  cmd_xform->add_option("--seed", seed, "seed for sampled-to-explicit");
  cmd_xform->add_option("--out", out, "output path")->required();

  // ---- gen-fixture ----
  auto* cmd_fixture = app.add_subcommand("gen-fixture", "write reproducible instance fixtures");
  std::string kind, out_dir = ".";
  cmd_fixture->add_option("--kind", kind, "fixture kind")->required();
  cmd_fixture->add_option("--seed", seed, "master seed")->required();
  cmd_fixture->add_option("--out-dir", out_dir, "output directory");

  // ---- bench ----
  auto* cmd_bench = app.add_subcommand("bench", "compare serial and OpenMP kernels");
  cmd_bench->add_option("--out", out, "report path");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_tol_profile(tol_profile);
    Timer timer;

    if (*cmd_shadow) {
      Protocol p = protocol_from_name(protocol);
      int site_dim = (p == Protocol::local_qudit) ? d : 2;
      DensityMatrix rho = named_state(state, n, site_dim);
      Shadow s;
      if (p == Protocol::local_qubit) s = sample_local_shadow(rho, n, big_l, seed, k_blocks, threads);
      if (p == Protocol::global_qubit)
        s = sample_global_shadow(rho, n, big_l, seed, k_blocks, threads);
      if (p == Protocol::local_qudit)
        s = sample_myz_shadow(rho, n, d, big_l, seed, k_blocks, threads);
      save_json(shadow_to_json(s), out);
      nlohmann::json cfg{{"protocol", protocol}, {"n", n},       {"d", site_dim},
                         {"L", big_l},           {"K", k_blocks}, {"seed", seed},
                         {"state", state},       {"out", out},    {"threads", threads}};
      nlohmann::json report = make_report("shadow", cfg);
      report["records"] = s.size();
      finish_report(report, timer.seconds());
      write_report(report, report_path.empty() ? out + ".report.json" : report_path);
      return 0;
    }

    if (*cmd_recover) {
      Shadow s = shadow_from_json(load_json(shadow_path));
      std::vector<ObsHandle> obs;
      std::vector<std::string> names;
      for (const auto& p : paulis) {
        obs.push_back(PauliString::qubit(p));
        names.push_back(p);
      }
      if (!instance_path.empty()) {
        ObsConInstance inst = instance_from_json(load_json(instance_path));
        for (std::size_t i = 0; i < inst.size(); ++i) {
          obs.push_back(inst.observables[i]);
          names.push_back("instance[" + std::to_string(i) + "]");
        }
      }
      require(!obs.empty(), ErrorKind::invalid_input, "no observables given");
      int kk = k_blocks > 0 ? k_blocks : default_block_count(obs.size());
      nlohmann::json cfg{{"shadow", shadow_path}, {"K", kk}, {"chi", chi}, {"threads", threads}};
      nlohmann::json report = make_report("recover", cfg);
      nlohmann::json est = nlohmann::json::array();
      for (std::size_t i = 0; i < obs.size(); ++i) {
        double y = mom_recover(s, obs[i], kk, chi, threads);
        est.push_back({{"observable", names[i]}, {"estimate", y}});
      }
      report["estimates"] = est;
      finish_report(report, timer.seconds());
      write_report(report, out);
      return 0;
    }

    if (*cmd_decide) {
      ObsConInstance inst = instance_from_json(load_json(instance_path));
      SolveOptions opts;
      opts.threads = threads;
      Decision dec = decide(inst, opts);
      nlohmann::json cfg{{"instance", instance_path}, {"threads", threads}};
      nlohmann::json report = make_report("decide", cfg);
      report["decision"] = decision_to_json(dec);
      finish_report(report, timer.seconds());
      write_report(report, out);
      std::cout << dec.verdict << " chi*=" << dec.chi_star << "\n";
      return 0;
    }

    if (*cmd_reduce) {
      CldmInstance inst = cldm_from_json(load_json(instance_path));
      std::vector<int> restriction;
      if (!restriction_csv.empty()) {
        std::stringstream ss(restriction_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) restriction.push_back(std::stoi(tok));
      }
      SnapshotAlphabet alpha = alphabet_for(inst, restriction);
      ReduceResult rr = reduce(inst, l_rounds, eps, alpha, chi, ball_radius, threads);
      SolveOptions opts;
      opts.threads = threads;
      Decision dec = decide(rr.instance, opts);
      nlohmann::json cfg{{"instance", instance_path}, {"L", l_rounds},        {"eps", eps},
                         {"restriction", restriction}, {"chi", chi},           {"threads", threads},
                         {"ball_radius", ball_radius}};
      nlohmann::json report = make_report("reduce-cldm", cfg);
      report["reduction"] = rr.report;
      report["trivial_no"] = rr.trivial_no;
      report["decision"] = decision_to_json(dec);
      if (!shadow_out.empty() && rr.shadow) save_json(shadow_to_json(*rr.shadow), shadow_out);
      finish_report(report, timer.seconds());
      write_report(report, out);
      std::cout << (rr.trivial_no ? "trivial-NO " : "") << dec.verdict << " chi*=" << dec.chi_star
                << "\n";
      return 0;
    }

    if (*cmd_dequant) {
      nlohmann::json in = load_json(input_path);
      std::vector<SqMatrix> mats;
      for (const auto& o : in.at("observables")) {
        if (o.contains("matrix")) {
          mats.push_back(build_sq(matrix_from_json(o["matrix"])));
        } else {
          mats.push_back(build_sq_factorized(o.at("lambdas").get<std::vector<double>>(),
                                             matrix_from_json(o.at("vectors"))));
        }
      }
      std::vector<const SqMatrix*> ptrs;
      for (const auto& m : mats) ptrs.push_back(&m);
      std::vector<double> f2;
      if (in.contains("frob2_bounds"))
        f2 = in["frob2_bounds"].get<std::vector<double>>();
      else
        for (const auto& m : mats) f2.push_back(m.frob2());
      DequantOptions opts;
      opts.p_budget = p_budget;
      opts.exact_estimates = exact_estimates;
      opts.threads = threads;
      opts.seed = seed;
      DequantResult dr = dequantized_decide(ptrs, f2, in.at("targets").get<std::vector<double>>(),
                                            in.at("alpha"), in.at("beta"), opts);
      nlohmann::json cfg{{"input", input_path},    {"p_budget", p_budget},
                         {"exact", exact_estimates}, {"seed", seed},
                         {"threads", threads}};
      nlohmann::json report = make_report("dequantize", cfg);
      report["pipeline"] = dr.report;
      report["decision"] = decision_to_json(dr.decision);
      finish_report(report, timer.seconds());
      write_report(report, out);
      std::cout << dr.decision.verdict << " chi*=" << dr.decision.chi_star << "\n";
      return 0;
    }

    if (*cmd_xform) {
      nlohmann::json in = load_json(in_path);
      nlohmann::json cfg{{"map", map_name}, {"in", in_path}, {"delta", delta}, {"seed", seed}};
      nlohmann::json report = make_report("xform", cfg);
      if (map_name == "cldm-to-obscon") {
        std::vector<CldmSet> sets;
        for (const auto& s : in.at("sets"))
          sets.push_back(CldmSet{s.at("sites").get<std::vector<int>>(),
                                 matrix_from_json(s.at("state"))});
        CldmToObsConResult r = cldm_to_obscon(sets, in.at("n"), rational_from_json(in.at("alpha")),
                                              rational_from_json(in.at("beta")), in.at("k"));
        save_json(instance_to_json(r.instance), out);
        report["alpha_exact"] = r.exact.alpha.get_str();
        report["beta_exact"] = r.exact.beta.get_str();
      } else if (map_name == "check-to-pair") {
        CheckTriple c;
        c.v = matrix_from_json(in.at("v"));
        c.r = rational_from_json(in.at("r"));
        c.s = rational_from_json(in.at("s"));
        CheckPair p = check_to_pair(c, rational_from_json(in.at("eps")));
        nlohmann::json o;
        o["observable"] = matrix_to_json(p.observable);
        o["target"] = p.target;
        o["alpha"] = p.exact.alpha.get_d();
        o["beta"] = p.exact.beta.get_d();
        save_json(o, out);
        report["alpha_exact"] = p.exact.alpha.get_str();
        report["beta_exact"] = p.exact.beta.get_str();
        report["scale_exact"] = p.scale.get_str();
      } else if (map_name == "bloc-flatten") {
        BlockInstance b;
        b.n = in.at("n");
        b.d = in.value("d", 2);
        b.dim = 1;
        for (int i = 0; i < b.n; ++i) b.dim *= static_cast<std::size_t>(b.d);
        for (const auto& blk : in.at("blocks")) {
          Block bb;
          ObsConInstance helper = instance_from_json(
              nlohmann::json{{"n", b.n},
                             {"d", b.d},
                             {"observables", blk.at("observables")},
                             {"targets", blk.at("targets")},
                             {"alpha", 0.0},
                             {"beta", 2.0}});
          bb.observables = helper.observables;
          bb.targets = helper.targets;
          bb.alpha = rational_from_json(blk.at("alpha"));
          bb.beta = rational_from_json(blk.at("beta"));
          b.blocks.push_back(std::move(bb));
        }
        FlattenResult f = bloc_flatten(b);
        save_json(instance_to_json(f.instance), out);
        report["alpha_exact"] = f.exact.alpha.get_str();
        report["beta_exact"] = f.exact.beta.get_str();
      } else if (map_name == "sampled-to-explicit") {
        Shadow src = shadow_from_json(in.contains("shadow") ? in.at("shadow") : in);
        require(src.protocol != Protocol::global_qubit, ErrorKind::invalid_input,
                "sampled-to-explicit CLI supports local-record shadows");
        SampledSource sampler;
        sampler.protocol = src.protocol;
        sampler.n = src.n;
        sampler.d = src.d;
        sampler.K = src.K;
        sampler.label_space = src.local_records.size();
        sampler.draw = [&src](RngStream& rng) {
          std::size_t label = rng.below(src.local_records.size());
          return std::make_pair(label, src.local_records[label]);
        };
        ReconstructionResult r = sampled_to_explicit(sampler, delta, seed);
        report["complete"] = r.complete;
        report["draws"] = r.draws;
        report["missing"] = r.missing;
        require(r.complete, ErrorKind::solver_failure,
                "reconstruction incomplete: " + std::to_string(r.missing) + " labels unseen");
        save_json(shadow_to_json(r.shadow), out);
      } else {
        throw Error(ErrorKind::invalid_input, "unknown map: " + map_name);
      }
      finish_report(report, timer.seconds());
      write_report(report, out + ".report.json");
      return 0;
    }

    if (*cmd_fixture) {
      auto docs = gen_fixture(kind, seed);
      nlohmann::json cfg{{"kind", kind}, {"seed", seed}, {"out_dir", out_dir}};
      nlohmann::json report = make_report("gen-fixture", cfg);
      nlohmann::json files = nlohmann::json::array();
      for (const auto& [stem, doc] : docs) {
        std::string path = out_dir + "/" + stem + ".json";
        save_json(doc, path);
        files.push_back(path);
      }
      report["files"] = files;
      finish_report(report, timer.seconds());
      write_report(report, out_dir + "/" + kind + ".report.json");
      return 0;
    }

    if (*cmd_bench) return run_bench(out, std::max(threads, 2));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
