#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"
#include "wgmres/analysis.hpp"
#include "wgmres/bundle.hpp"
#include "wgmres/experiments.hpp"
#include "wgmres/matrix_market.hpp"
#include "wgmres/precond_study.hpp"

using namespace wgmres;
using namespace testutil;
using namespace wgmres::lab;

namespace {

ExperimentConfig config(int id, int samples = 5, std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.id = id;
  c.samples = samples;
  c.seed = seed;
  return c;
}

std::string csv(const CurveTable& t) {
  std::ostringstream os;
  curves::write_csv(os, t.labels, t.columns);
  return os.str();
}

}  // namespace

TEST(PrescribedCurve, Shapes) {
  auto r = prescribed_curve(CurveKind::LogLinear, 20, 0);
  ASSERT_EQ(r.size(), 21);
  EXPECT_EQ(r(0), 1.0);
  EXPECT_EQ(r(20), 0.0);
  EXPECT_NEAR(r(10), 1e-4, 1e-18);
  auto s = prescribed_curve(CurveKind::Stagnation, 20, 0);
  EXPECT_EQ(curves::curve_to_g(s), [] {
    RVec g = RVec::Zero(20);
    g(19) = 1.0;
    return g;
  }());
  auto a = prescribed_curve(CurveKind::Irregular, 20, 3);
  auto b = prescribed_curve(CurveKind::Irregular, 20, 3);
  EXPECT_EQ(a, b);
  for (int i = 1; i < 20; ++i) EXPECT_LT(a(i), a(i - 1));
  EXPECT_NE(a, prescribed_curve(CurveKind::Irregular, 20, 4));
}

TEST(Config, Validation) {
  auto bad = [](ExperimentConfig c) {
    try {
      validate(c);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::InvalidConfig;
    }
    return false;
  };
  ExperimentConfig c = config(1);
  c.n = 1;
  EXPECT_TRUE(bad(c));
  c = config(1, 0);
  EXPECT_TRUE(bad(c));
  c = config(2);
  c.n = 30;
  EXPECT_TRUE(bad(c));
  c = config(4);
  c.n = 21;
  EXPECT_TRUE(bad(c));
  c = config(1);
  c.mu = {1.0, 2.0};
  EXPECT_TRUE(bad(c));
  c = config(6);
  EXPECT_TRUE(bad(c));
  EXPECT_THROW(parse_curve_kind("linear"), Error);
  EXPECT_EQ(parse_curve_kind(to_string(CurveKind::Irregular)), CurveKind::Irregular);
}

TEST(Experiment1, JumpAtMultiplicity) {
  auto t = run_experiment_123(config(1));
  ASSERT_EQ(t.columns.size(), 6u);
  for (const auto& col : t.columns) EXPECT_EQ(col(0), 1.0);
  for (int s = 1; s <= 5; ++s) {
    EXPECT_EQ(jump_locations(t.columns[s]).front(), 8);
    const double gap = gap_magnitude(t.columns[0], t.columns[s]);
    EXPECT_LE(gap, 1e6 * (1 + 1e-9));
    EXPECT_GE(gap, 1e5);
  }
}

TEST(Experiment1, JumpFollowsK) {
  for (int k : {3, 12}) {
    ExperimentConfig c = config(1);
    c.k = k;
    auto t = run_experiment_123(c);
    for (int s = 1; s <= 5; ++s) EXPECT_EQ(jump_locations(t.columns[s]).front(), k);
  }
}

TEST(Experiment1, PermutedSpectrumSameShape) {
  ExperimentConfig c = config(1, 20);
  c.permute_mu = true;
  auto t = run_experiment_123(c);
  int at_k = 0;
  for (int s = 1; s <= 20; ++s) at_k += jump_locations(t.columns[s]).front() == 8;
  EXPECT_GE(at_k, 19);
}

TEST(Experiment2, TwoJumps) {
  auto t = run_experiment_123(config(2, 20));
  int hits = 0;
  for (int s = 1; s <= 20; ++s) {
    auto j = jump_locations(t.columns[s]);
    std::vector<int> top{j[0], j[1]};
    std::sort(top.begin(), top.end());
    hits += top == std::vector<int>{4, 11};
    EXPECT_LE(gap_magnitude(t.columns[0], t.columns[s]), 1e10 * (1 + 1e-9));
  }
  EXPECT_GE(hits, 18);
}

TEST(Experiment3, SmallJumpsEverywhere) {
  auto t = run_experiment_123(config(3, 20));
  for (int s = 1; s <= 20; ++s) {
    const RVec& r = t.columns[s];
    std::vector<double> drops;
    for (int i = 1; i < 20; ++i) drops.push_back(std::log(r(i - 1) / r(i)));
    double lg = 0.0;
    for (double d : drops) {
      ASSERT_GT(d, 0.0);
      lg += std::log(d);
    }
    const double gm = std::exp(lg / drops.size());
    for (double d : drops) EXPECT_LE(d, 10.0 * gm);
  }
}

TEST(Experiments, Deterministic) {
  for (int id : {1, 2, 3}) {
    ExperimentConfig c = config(id, 3, 42);
    c.curve = CurveKind::Irregular;
    EXPECT_EQ(csv(run_experiment_123(c)), csv(run_experiment_123(c)));
  }
  EXPECT_EQ(csv(run_experiment_4(config(4))), csv(run_experiment_4(config(4))));
  ExperimentConfig c5 = config(5);
  c5.n = 60;
  EXPECT_EQ(csv(run_experiment_5(c5)), csv(run_experiment_5(c5)));
}

TEST(Experiment4, Spectra) {
  RVec u = mu_under(6, 1);
  RVec expect(6);
  expect << 1, 1e12, 1e12, 1e12, 1, 1;
  EXPECT_EQ(u, expect);
  RVec o = mu_over(6, 2);
  expect << 1e12, 1e12, 1, 1, 1, 1e12;
  EXPECT_EQ(o, expect);
  EXPECT_EQ(mu_over(20, 0), mu_under(20, 10));
  EXPECT_EQ(mu_over(20, 10), mu_under(20, 0));
}

TEST(Experiment4, StagnationThenTracking) {
  auto t = run_experiment_4(config(4));
  const int n = 20;
  ASSERT_EQ(t.columns.size(), 1u + 2u * (n / 2 + 1));
  const RVec& ref = t.columns[0];
  for (int k = 0; k <= n / 2; ++k) {
    const RVec& rt = t.columns[1 + k];
    EXPECT_EQ(t.labels[1 + k], "under_" + std::to_string(k));
    EXPECT_EQ(stagnation_length(rt), k) << k;
    // Tracking: per-step ratios equal those of I-GMRES until the last step of the large block.
    for (int i = k + 1; i < k + n / 2 - 1; ++i)
      EXPECT_NEAR(std::log(rt(i - 1) / rt(i)), std::log(ref(i - 1) / ref(i)), 0.05) << k << " " << i;
  }
  // Endpoint identities hold bitwise.
  EXPECT_EQ(t.columns[1 + n / 2 + 1], t.columns[1 + n / 2]);
  EXPECT_EQ(t.columns[1 + n / 2 + 1 + n / 2], t.columns[1]);
}

TEST(Experiment4, OverJumpsAtK) {
  auto t = run_experiment_4(config(4));
  const int n = 20;
  for (int k = 1; k < n / 2; ++k) {
    const RVec& rt = t.columns[1 + n / 2 + 1 + k];
    EXPECT_EQ(t.labels[1 + n / 2 + 1 + k], "over_" + std::to_string(k));
    EXPECT_EQ(jump_locations(rt).front(), k);
    // After the jump the curve stagnates until the large block starts.
    for (int i = k + 1; i < k + n / 2; ++i) EXPECT_GE(rt(i), 0.95 * rt(i - 1)) << k << " " << i;
  }
}

TEST(Experiment5, ClosedForms) {
  const int n = 60, p = 30;
  const double eps = 1e-2;
  ExperimentConfig c = config(5);
  c.n = n;
  c.eps = eps;
  c.p = p;
  auto t = run_experiment_5(c);
  ASSERT_EQ(t.labels, (std::vector<std::string>{"I-GMRES", "mu1", "mu2", "mu3"}));
  const double beta1 = n / (p + eps * (n - p));
  const double beta2 = n / (eps * p + (n - p));
  const RVec& r1 = t.columns[1];
  const RVec& r2 = t.columns[2];
  for (int i = 0; i <= n; ++i) {
    EXPECT_NEAR(t.columns[0](i), std::sqrt(std::max(0.0, 1.0 - double(i) / n)), 1e-12);
    double e1, e2;
    if (i <= p) {
      e1 = std::sqrt(1.0 - beta1 / n * i);
      e2 = std::sqrt(1.0 - beta2 * eps / n * i);
    } else {
      // ||r~_p||^2 - c (i - p) with ||r~_p||^2 = c (n - p), written without cancellation.
      e1 = std::sqrt(beta1 * eps / n * (n - i));
      e2 = std::sqrt(beta2 / n * (n - i));
      EXPECT_NEAR(r1(p) * r1(p), beta1 * eps / n * (n - p), 1e-14);
      EXPECT_NEAR(r2(p) * r2(p), beta2 / n * (n - p), 1e-14);
    }
    EXPECT_NEAR(r1(i), e1, 1e-12) << i;
    EXPECT_NEAR(r2(i), e2, 1e-12) << i;
  }
  EXPECT_GT(r2(p), 0.99);
  RVec mu3 = experiment5_mu(3, n, eps, p, 1);
  EXPECT_NEAR(mu3.sum(), p + eps * (n - p), 1e-12);
  EXPECT_NE(mu3, experiment5_mu(1, n, eps, p, 1));
}

TEST(JumpMetrics, Definitions) {
  RVec r(5);
  r << 1.0, 0.9, 0.09, 0.08, 0.0;
  EXPECT_EQ(jump_locations(r), (std::vector<int>{2, 3, 1}));
  RVec flat(5);
  flat << 1.0, 1.0, 1.0, 1.0, 0.0;
  EXPECT_NEAR(gap_magnitude(flat, r), 1.0 / 0.08, 1e-12);
  EXPECT_EQ(stagnation_length(flat), 3);
  EXPECT_EQ(stagnation_length(r), 0);
  EXPECT_EQ(stagnation_length(r, 0.2), 1);
}

TEST(MatrixMarket, CoordinateDiagonal) {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 4\n2 2 9\n");
  Mat a = read_matrix_market(in);
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = 4;
  expect(1, 1) = 9;
  EXPECT_EQ(a, expect);
}

TEST(MatrixMarket, SymmetricExpands) {
  std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n2 1 5\n3 2 -2\n");
  Mat a = read_matrix_market(in);
  EXPECT_EQ(a(0, 1), cplx(5.0));
  EXPECT_EQ(a(1, 0), cplx(5.0));
  EXPECT_EQ(a(1, 2), cplx(-2.0));
  EXPECT_EQ(a(2, 1), cplx(-2.0));
  EXPECT_EQ(a(2, 2), cplx(0.0));
}

TEST(MatrixMarket, HermitianAndSkew) {
  std::istringstream h("%%MatrixMarket matrix coordinate complex hermitian\n2 2 1\n2 1 1 2\n");
  Mat a = read_matrix_market(h);
  EXPECT_EQ(a(1, 0), cplx(1, 2));
  EXPECT_EQ(a(0, 1), cplx(1, -2));
  std::istringstream s("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n");
  Mat b = read_matrix_market(s);
  EXPECT_EQ(b(0, 1), cplx(-3.0));
}

TEST(MatrixMarket, RoundTrip) {
  std::mt19937_64 rng(1);
  for (bool real_only : {true, false}) {
    Mat a = gaussian(7, 5, rng, real_only);
    std::stringstream ss;
    write_matrix_market(ss, a);
    EXPECT_EQ(read_matrix_market(ss), a);
  }
}

TEST(MatrixMarket, Errors) {
  auto kind = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_matrix_market(in);
    } catch (const Error& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(ErrorKind::NonFinite, std::string());
  };
  auto p = kind("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
  EXPECT_EQ(p.first, ErrorKind::UnsupportedField);
  auto q = kind("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 4\n3 1 1\n");
  EXPECT_EQ(q.first, ErrorKind::ParseError);
  EXPECT_NE(q.second.find("line 4"), std::string::npos) << q.second;
  auto r = kind("not a header\n");
  EXPECT_EQ(r.first, ErrorKind::ParseError);
  EXPECT_THROW(read_matrix_market(std::string("/nonexistent/file.mtx")), Error);
}

TEST(Preconditioners, Ilu0IsExactForTridiagonal) {
  const int n = 10;
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 4.0;
    if (i > 0) a(i, i - 1) = -1.0;
    if (i + 1 < n) a(i, i + 1) = -2.0;
  }
  Mat h = ilu0_preconditioner(a);
  EXPECT_LE((h * a - Mat::Identity(n, n)).norm(), 1e-12);
}

TEST(Preconditioners, SymPartSingular) {
  Mat a = Mat::Zero(2, 2);
  a(0, 1) = 1;
  a(1, 0) = -1;
  try {
    sym_part_preconditioner(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularSymmetricPart);
  }
}

TEST(PrecondStudy, ExactPreconditionerConvergesInOneStep) {
  std::mt19937_64 rng(2);
  Mat a = random_hpd(12, 1e3, rng);
  PrecondOptions opt;
  opt.seed = 5;
  auto st = precond_study(a, opt);
  EXPECT_EQ(st.left_iters, 1);
  EXPECT_EQ(st.right_iters, 1);
  EXPECT_NEAR(st.cond_ha, 1.0, 1e-8);
  EXPECT_NEAR(st.cond_ah, 1.0, 1e-8);
  EXPECT_EQ(st.table.labels.back(), "unpreconditioned");
  // Norms are relative to ||b||; only the unpreconditioned quantities start at 1.
  for (const char* label : {"left_residual", "left_error", "right_minimized", "right_error", "unpreconditioned"}) {
    auto it = std::find(st.table.labels.begin(), st.table.labels.end(), label);
    ASSERT_NE(it, st.table.labels.end());
    EXPECT_NEAR(st.table.columns[it - st.table.labels.begin()](0), 1.0, 1e-12) << label;
  }
}

TEST(PrecondStudy, ForgedPairRecovered) {
  std::mt19937_64 rng(3);
  const int n = 12;
  RVec gr = uniform_real(n, 0.1, 1.0, rng), gl = uniform_real(n, 0.1, 1.0, rng);
  auto inst = forge::left_right_pair(gr, gl, random_spectrum(n, 0.5, 2.0, rng), 9);
  // The study draws its own b; replay the instance's b through the supplied-preconditioner path instead.
  auto left = krylov::preconditioned_gmres(inst.a, inst.b, *inst.h, std::nullopt);
  auto right = krylov::preconditioned_gmres(inst.a, inst.b, std::nullopt, *inst.h);
  EXPECT_LE(analysis::curve_deviation(left.minimized, curves::g_to_curve(gl)), 1e-7);
  EXPECT_LE(analysis::curve_deviation(right.minimized, curves::g_to_curve(gr)), 1e-7);
  PrecondOptions opt;
  opt.kind = PrecondKind::Supplied;
  opt.supplied = *inst.h;
  auto st = precond_study(inst.a, opt);
  EXPECT_NEAR(st.sigma_max_h, num::singular_values(*inst.h)(0), 1e-10 * st.sigma_max_h);
  EXPECT_GE(st.left_iters, 1);
  EXPECT_GE(st.right_iters, 1);
}

TEST(PrecondStudy, SuppliedMissing) {
  PrecondOptions opt;
  opt.kind = PrecondKind::Supplied;
  EXPECT_THROW(precond_study(Mat::Identity(3, 3), opt), Error);
}

TEST(Bundle, RoundTripAndVerify) {
  std::mt19937_64 rng(4);
  const int n = 10;
  RVec g = uniform_real(n, 0.1, 1.0, rng);
  auto inst = forge::gps_system(g, random_spectrum(n, 0.5, 2.0, rng), std::nullopt, 8);
  auto j = to_json(inst);
  auto back = instance_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.a, inst.a);
  EXPECT_EQ(back.b, inst.b);
  EXPECT_EQ(back.prescribed.g, inst.prescribed.g);
  EXPECT_EQ(back.prescribed.lambda, inst.prescribed.lambda);
  EXPECT_EQ(back.provenance, "gps_system");
  EXPECT_EQ(back.seed, 8u);
  auto rep = verify_instance(back);
  EXPECT_TRUE(rep["pass"].get<bool>()) << rep.dump();
}

TEST(Bundle, PairVerifies) {
  std::mt19937_64 rng(5);
  const int n = 10;
  RVec gr = uniform_real(n, 0.1, 1.0, rng), gl = uniform_real(n, 0.1, 1.0, rng);
  auto inst = forge::left_right_pair(gr, gl, random_spectrum(n, 0.5, 2.0, rng), 2);
  auto back = instance_from_json(nlohmann::json::parse(to_json(inst).dump()));
  ASSERT_TRUE(back.h.has_value());
  auto rep = verify_instance(back);
  EXPECT_TRUE(rep["pass"].get<bool>()) << rep.dump();
  back.a(0, 0) += 1.0;
  EXPECT_FALSE(verify_instance(back)["pass"].get<bool>());
}

TEST(Bundle, MalformedJson) {
  EXPECT_EQ(matrix_from_json(nlohmann::json::parse("[[1,[0,2]]]"))(0, 1), cplx(0, 2));
  EXPECT_THROW(matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")), Error);
  EXPECT_THROW(matrix_from_json(nlohmann::json::parse("[[1,\"x\"]]")), Error);
  EXPECT_THROW(instance_from_json(nlohmann::json::parse("{}")), Error);
}
