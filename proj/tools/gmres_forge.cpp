// gmres-forge: experiments, preconditioning study and system forging from the command line.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"
#include "wgmres/analysis.hpp"
#include "wgmres/bundle.hpp"
#include "wgmres/experiments.hpp"
#include "wgmres/matrix_market.hpp"
#include "wgmres/precond_study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wgmres;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  out << s;
}

void write_table(const fs::path& dir, const lab::CurveTable& t) {
  std::ofstream out(dir / "curves.csv");
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "curves.csv").string());
  curves::write_csv(out, t.labels, t.columns);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, p.string() + ": " + e.what());
  }
}

json experiment_report(const lab::ExperimentConfig& cfg, const lab::CurveTable& t) {
  json rep;
  rep["experiment"] = cfg.id;
  rep["n"] = cfg.n;
  rep["seed"] = cfg.seed;
  rep["curve"] = lab::to_string(cfg.curve);
  json cols = json::array();
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    json e;
    e["label"] = t.labels[c];
    auto jumps = lab::jump_locations(t.columns[c]);
    jumps.resize(std::min<std::size_t>(jumps.size(), 3));
    e["jumps"] = jumps;
    e["gap_magnitude"] = lab::gap_magnitude(t.columns[0], t.columns[c]);
    e["stagnation_length"] = lab::stagnation_length(t.columns[c]);
    cols.push_back(e);
  }
  rep["columns"] = cols;
  if (cfg.id <= 3) {
    rep["k"] = cfg.k;
    rep["samples"] = cfg.samples;
    RVec mu = lab::experiment_spectrum(cfg);
    rep["sqrt_kappa_M"] = std::sqrt(mu.maxCoeff() / mu.minCoeff());
  }
  if (cfg.id == 5) {
    rep["eps"] = cfg.eps;
    rep["p"] = cfg.p < 0 ? cfg.n / 2 : cfg.p;
  }
  return rep;
}

curves::GVec read_g(const json& spec, const std::string& suffix, int n, std::uint64_t seed) {
  if (spec.contains("g" + suffix)) return lab::real_from_json(spec["g" + suffix]);
  if (spec.contains("r" + suffix)) return curves::curve_to_g(lab::real_from_json(spec["r" + suffix]));
  if (spec.contains("curve" + suffix)) {
    if (n < 1) throw Error(ErrorKind::InvalidConfig, "'n' is required with a named curve");
    return curves::curve_to_g(lab::prescribed_curve(lab::parse_curve_kind(spec["curve" + suffix]), n, seed));
  }
  throw Error(ErrorKind::InvalidConfig, "spec needs one of g" + suffix + ", r" + suffix + ", curve" + suffix);
}

Vec read_lambda(const json& spec, int n, std::uint64_t seed) {
  if (spec.contains("lambda")) return lab::vector_from_json(spec["lambda"]);
  const std::string kind = spec.value("lambda_kind", std::string("unit_circle"));
  Vec lam(n);
  if (kind == "unit_circle") {
    for (int k = 0; k < n; ++k) lam(k) = std::polar(1.0, 2.0 * std::numbers::pi * k / n);
  } else if (kind == "random") {
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    std::uniform_real_distribution<double> mod(0.1, 10.0), ph(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < n; ++k) {
      const double r = mod(rng);
      lam(k) = std::polar(r, ph(rng));
    }
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown lambda_kind '" + kind + "'");
  }
  return lam;
}

forge::ForgedInstance forge_from_spec(const std::string& what, const json& spec, const fs::path& spec_dir) {
  const std::uint64_t seed = spec.value("seed", std::uint64_t{0});
  int n = spec.value("n", -1);
  if (what == "swap") {
    fs::path b = spec.at("bundle").get<std::string>();
    if (b.is_relative()) b = spec_dir / b;
    auto src = lab::instance_from_json(read_json(b));
    if (!src.h) throw Error(ErrorKind::InvalidConfig, "swap needs a bundle with a preconditioner H");
    auto inst = forge::swap_left_right(src.a, src.b, *src.h);
    inst.seed = src.seed;
    return inst;
  }
  if (what == "pair") {
    auto gr = read_g(spec, "_right", n, seed);
    auto gl = read_g(spec, "_left", n, seed + 1);
    if (n < 1) n = static_cast<int>(gr.size());
    return forge::left_right_pair(gr, gl, read_lambda(spec, n, seed), seed);
  }
  auto g = read_g(spec, "", n, seed);
  if (n < 1) n = static_cast<int>(g.size());
  auto inst = forge::gps_system(g, read_lambda(spec, n, seed), std::nullopt, seed);
  if (what == "system") return inst;
  if (what == "weight") {
    auto gt = read_g(spec, "_tilde", n, seed + 1);
    auto m = forge::weight_for_curve(inst.a, inst.b, gt);
    inst.m = m.matrix();
    inst.prescribed.g_tilde = gt;
    inst.provenance = "weight_for_curve";
    return inst;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown forge target '" + what + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted GMRES convergence curve laboratory"};
  app.require_subcommand(1);

  lab::ExperimentConfig cfg;
  int exp_id = 1;
  int n_opt = -1;
  std::string curve = "loglinear", out = ".";
  auto* exp = app.add_subcommand("experiment", "Run experiment 1-5 and write curves.csv and report.json");
  exp->add_option("id", exp_id, "Experiment number")->required()->check(CLI::Range(1, 5));
  exp->add_option("--n", n_opt, "Dimension (default 20, or 60 for experiment 5)");
  exp->add_option("--k", cfg.k, "Multiplicity of the large eigenvalue (experiment 1)");
  exp->add_option("--seed", cfg.seed, "Random seed");
  exp->add_option("--samples", cfg.samples, "Number of random link matrices");
  exp->add_option("--curve", curve, "stagnation | loglinear | irregular");
  exp->add_option("--eps", cfg.eps, "Small eigenvalue (experiment 5)");
  exp->add_option("--p", cfg.p, "Split index (experiment 5)");
  exp->add_flag("--permute", cfg.permute_mu, "Shuffle the spectrum of M");
  exp->add_option("--out", out, "Output directory");

  std::string mtx, precond = "sym-part";
  std::uint64_t pseed = 0;
  int max_iter = -1;
  auto* ps = app.add_subcommand("precond-study", "Left versus right preconditioning on a Matrix Market file");
  ps->add_option("matrix", mtx, "Matrix Market file")->required();
  ps->add_option("--precond", precond, "sym-part | ilu0");
  ps->add_option("--seed", pseed, "Seed for the random right-hand side");
  ps->add_option("--max-iter", max_iter, "Iteration cap");
  ps->add_option("--out", out, "Output directory");

  std::string target, spec_path;
  auto* fg = app.add_subcommand("forge", "Build a system from a JSON prescription");
  fg->add_option("target", target, "system | weight | pair | swap")->required();
  fg->add_option("--spec", spec_path, "Prescription file")->required();
  fg->add_option("--out", out, "Output directory");

  std::string bundle_path;
  auto* ck = app.add_subcommand("check", "Replay a bundle and compare against its prescription");
  ck->add_option("bundle", bundle_path, "bundle.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*exp) {
      cfg.id = exp_id;
      cfg.n = n_opt > 0 ? n_opt : (exp_id == 5 ? 60 : 20);
      cfg.curve = lab::parse_curve_kind(curve);
      lab::validate(cfg);
      lab::CurveTable t = exp_id <= 3 ? lab::run_experiment_123(cfg)
                          : exp_id == 4 ? lab::run_experiment_4(cfg)
                                        : lab::run_experiment_5(cfg);
      fs::create_directories(out);
      write_table(out, t);
      write_text(fs::path(out) / "report.json", experiment_report(cfg, t).dump(2) + "\n");
      return 0;
    }
    if (*ps) {
      lab::PrecondOptions o;
      o.kind = lab::parse_precond_kind(precond);
      if (o.kind == lab::PrecondKind::Supplied) throw Error(ErrorKind::InvalidConfig, "the CLI builds its own preconditioner");
      o.seed = pseed;
      o.max_iter = max_iter;
      Mat a = lab::read_matrix_market(mtx);
      auto st = lab::precond_study(a, o);
      fs::create_directories(out);
      write_table(out, st.table);
      json rep = {{"matrix", mtx},
                  {"n", st.n},
                  {"preconditioner", precond},
                  {"seed", pseed},
                  {"cond_HA", st.cond_ha},
                  {"cond_AH", st.cond_ah},
                  {"sigma_min_H", st.sigma_min_h},
                  {"sigma_max_H", st.sigma_max_h},
                  {"norm_HA", st.norm_ha},
                  {"norm_AH", st.norm_ah},
                  {"left_iterations_to_1e-8", st.left_iters},
                  {"right_iterations_to_1e-8", st.right_iters},
                  {"unpreconditioned_iterations_to_1e-8", st.unprec_iters},
                  {"unpreconditioned_final_relative_residual", st.unprec_final}};
      write_text(fs::path(out) / "report.json", rep.dump(2) + "\n");
      return 0;
    }
    if (*fg) {
      fs::path sp(spec_path);
      auto inst = forge_from_spec(target, read_json(sp), sp.parent_path());
      auto rep = lab::verify_instance(inst);
      fs::create_directories(out);
      write_text(fs::path(out) / "bundle.json", lab::to_json(inst).dump() + "\n");
      write_text(fs::path(out) / "report.json", rep.dump(2) + "\n");
      return rep["pass"].get<bool>() ? 0 : 3;
    }
    if (*ck) {
      auto inst = lab::instance_from_json(read_json(bundle_path));
      auto rep = lab::verify_instance(inst);
      std::cout << rep.dump(2) << "\n";
      return rep["pass"].get<bool>() ? 0 : 3;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
