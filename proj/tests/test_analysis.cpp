#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wgmres/analysis.hpp"
#include "wgmres/curves.hpp"
#include "wgmres/forge.hpp"
#include "wgmres/krylov.hpp"

using namespace wgmres;
using namespace testutil;
using krylov::WeightMatrix;

namespace {

struct Pair {
  Mat a;
  Vec b;
  WeightMatrix m;
  krylov::Trace ti, tm;
};

Pair random_pair(int n, double kappa, std::mt19937_64& rng) {
  Mat a = gaussian(n, n, rng) + 3.0 * Mat::Identity(n, n);
  Vec b = gaussian_vec(n, rng);
  WeightMatrix m(random_hpd(n, kappa, rng));
  krylov::Options opt;
  opt.keep_vectors = true;
  auto ti = krylov::mgmres(a, b, WeightMatrix::identity(n), opt);
  auto tm = krylov::mgmres(a, b, m, opt);
  return {a, b, m, ti, tm};
}

// Phases d with T = D up to 1e-10, |d_i| = 1.
bool is_diagonal_phase(const Mat& t, double tol) {
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      const double v = std::abs(t(i, j));
      if (i == j ? std::abs(v - 1.0) > tol : v > tol) return false;
    }
  return true;
}

}  // namespace

TEST(Ipsen, EmptyBasis) {
  std::mt19937_64 rng(1);
  Vec b = gaussian_vec(5, rng);
  WeightMatrix m(random_hpd(5, 10, rng));
  EXPECT_NEAR(analysis::ipsen_residual_norm(Mat(5, 0), b, m), m.norm(b), 1e-14 * m.norm(b));
}

TEST(Ipsen, MatchesSolverTrace) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20;
    Pair p = random_pair(n, trial % 2 ? 1.0 : 1e4, rng);
    for (int k = 1; k < p.tm.iterations; ++k) {
      const Mat wk = p.ti.basis_w.leftCols(k);
      const double got = analysis::ipsen_residual_norm(wk, p.b, p.m);
      const double ref = p.tm.residual_norms(k);
      EXPECT_NEAR(got, ref, 1e-8 * ref) << k;
      const double entry = analysis::ipsen_inverse_entry(wk, p.b, p.m);
      EXPECT_NEAR(entry, 1.0 / (ref * ref), 1e-8 / (ref * ref));
      Vec r = analysis::ipsen_residual(wk, p.b, p.m);
      EXPECT_LE(p.m.norm(r - p.tm.residuals[k]), 1e-8 * p.m.norm(p.b));
    }
  }
}

TEST(Ipsen, RankDeficientBasis) {
  Vec b = Vec::Ones(3);
  try {
    analysis::ipsen_residual_norm(b, b, WeightMatrix::identity(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficientBasis);
  }
}

TEST(NormRatio, IdentityWeights) {
  std::mt19937_64 rng(3);
  Pair p = random_pair(8, 1.0, rng);
  const auto id = WeightMatrix::identity(8);
  for (auto which : {analysis::Ratio::TildeI_TildeM, analysis::Ratio::RM_RI, analysis::Ratio::RI_TildeM,
                     analysis::Ratio::TildeI_RI, analysis::Ratio::TildeN_RN})
    EXPECT_NEAR(analysis::norm_ratio(p.ti.basis_w.leftCols(4), p.b, id, id, which), 1.0, 1e-12);
}

TEST(NormRatio, AgainstSolverResiduals) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 12;
    Pair p = random_pair(n, 1e4, rng);
    const auto id = WeightMatrix::identity(n);
    for (int k = 1; k < n; ++k) {
      const Mat wk = p.ti.basis_w.leftCols(k);
      const Vec& r = p.ti.residuals[k];
      const Vec& rt = p.tm.residuals[k];
      auto ratio = [&](analysis::Ratio w) { return analysis::norm_ratio(wk, p.b, p.m, id, w); };
      EXPECT_NEAR(ratio(analysis::Ratio::TildeI_TildeM), rt.norm() / p.m.norm(rt), 1e-7 * rt.norm() / p.m.norm(rt));
      EXPECT_NEAR(ratio(analysis::Ratio::RM_RI), p.m.norm(r) / r.norm(), 1e-7 * p.m.norm(r) / r.norm());
      EXPECT_NEAR(ratio(analysis::Ratio::RI_TildeM), r.norm() / p.m.norm(rt), 1e-7 * r.norm() / p.m.norm(rt));
      EXPECT_NEAR(ratio(analysis::Ratio::TildeI_RI), rt.norm() / r.norm(), 1e-7 * rt.norm() / r.norm());
    }
  }
}

TEST(NormRatio, ErrorNormsWithInverseNormalWeight) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 10;
    Pair p = random_pair(n, 1e3, rng);
    Mat ainv = p.a.inverse();
    WeightMatrix nw(Mat(ainv.adjoint() * ainv));
    Vec xs = p.a.partialPivLu().solve(p.b);
    for (int k = 1; k < n; ++k) {
      const double got = analysis::norm_ratio(p.ti.basis_w.leftCols(k), p.b, p.m, nw, analysis::Ratio::TildeN_RN);
      const double ref = (xs - p.tm.iterates[k]).norm() / (xs - p.ti.iterates[k]).norm();
      EXPECT_NEAR(got, ref, 1e-6 * ref) << k;
    }
  }
}

TEST(Sandwich, RandomInstances) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Pair p = random_pair(15, 1e6, rng);
    auto rep = analysis::sandwich(p.ti, p.tm, p.m);
    EXPECT_TRUE(rep.all());
    EXPECT_TRUE(rep.normalized.all());
  }
}

TEST(Sandwich, NeedsResiduals) {
  std::mt19937_64 rng(7);
  Pair p = random_pair(5, 10, rng);
  p.ti.residuals.clear();
  EXPECT_THROW(analysis::sandwich(p.ti, p.tm, p.m), Error);
}

TEST(Lookahead, IdentityLink) {
  std::mt19937_64 rng(8);
  Pair p = random_pair(10, 1.0, rng);
  auto t = analysis::extract_link(p.ti, p.ti, WeightMatrix::identity(10));
  auto rep = analysis::lookahead_bounds(t, p.ti, p.ti);
  EXPECT_TRUE(rep.all());
  for (int k = 0; k < 10; ++k) {
    EXPECT_NEAR(rep.bounds.lower(k), rep.bounds.observed(k), 1e-10 * rep.bounds.observed(k));
    EXPECT_NEAR(rep.bounds.upper(k), rep.bounds.observed(k), 1e-10 * rep.bounds.observed(k));
  }
}

TEST(Lookahead, RandomWeightsAndTrailingBlock) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 14;
    Pair p = random_pair(n, 1e6, rng);
    auto t = analysis::extract_link(p.ti, p.tm, p.m);
    auto rep = analysis::lookahead_bounds(t, p.ti, p.tm);
    EXPECT_TRUE(rep.all());
    for (bool b : rep.interlacing) EXPECT_TRUE(b);
    const double last = rep.bounds.observed(n - 1);
    EXPECT_NEAR(rep.bounds.lower(n - 1), last, 1e-9 * last);
    EXPECT_NEAR(rep.bounds.upper(n - 1), last, 1e-9 * last);
  }
}

TEST(Lookahead, ExperimentOneStyleLink) {
  std::mt19937_64 rng(10);
  const int n = 20;
  RVec sigma(n);
  sigma.head(12).setOnes();
  sigma.tail(8).setConstant(1e-3);
  for (int trial = 0; trial < 5; ++trial) {
    RVec g = uniform_real(n, 0.1, 1.0, rng);
    auto tinv = forge::link_with_singular_values(sigma, rng()).t;
    RVec gt = (tinv * g.cast<cplx>()).cwiseAbs();
    auto inst = forge::gps_system(g, random_spectrum(n, 0.5, 2.0, rng), std::nullopt, rng());
    WeightMatrix m = forge::weight_for_curve(inst.a, inst.b, gt);
    auto ti = krylov::mgmres(inst.a, inst.b, WeightMatrix::identity(n));
    auto tm = krylov::mgmres(inst.a, inst.b, m);
    auto link = analysis::extract_link(ti, tm, m);
    EXPECT_TRUE(analysis::lookahead_bounds(link, ti, tm).all());
  }
}

TEST(Lookahead, LinkMismatch) {
  std::mt19937_64 rng(11);
  Pair p = random_pair(6, 10, rng);
  auto t = analysis::extract_link(p.ti, p.tm, p.m);
  t.t(0, 0) *= 2.0;
  EXPECT_THROW(analysis::lookahead_bounds(t, p.ti, p.tm), Error);
}

TEST(NecessaryConditions, Identity) {
  RVec g = RVec::Constant(4, 0.5);
  auto rep = analysis::necessary_conditions(forge::make_link(Mat::Identity(4, 4), 4), g, g, RVec::Ones(4));
  EXPECT_TRUE(rep.all());
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name;
}

TEST(NecessaryConditions, WeylEqualityForRandomLinks) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    RVec sigma = uniform_real(10, -3.0, 0.0, rng);
    for (int i = 0; i < 10; ++i) sigma(i) = std::pow(10.0, sigma(i));
    std::sort(sigma.data(), sigma.data() + 10, std::greater<>());
    auto link = forge::link_with_singular_values(sigma, rng());
    RVec gt = uniform_real(10, 0.1, 1.0, rng);
    RVec g = (link.t * gt.cast<cplx>()).real();
    auto rep = analysis::necessary_conditions(link, g, gt, sigma);
    EXPECT_TRUE(rep.get("weyl_multiplicative").pass) << rep.get("weyl_multiplicative").residual;
    EXPECT_TRUE(rep.get("weyl_additive").pass);
    EXPECT_TRUE(rep.get("frobenius").pass);
    EXPECT_TRUE(rep.get("diagonal_eigenvalues").pass);
    EXPECT_TRUE(rep.get("trailing_entry").pass);
  }
}

TEST(NecessaryConditions, ForgedLinksPassEverything) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    Triple tr = feasible_triple(rng);
    auto link = std::get<forge::LinkMatrix>(forge::two_by_two_link(tr.g, tr.gt, tr.sigma));
    auto rep = analysis::necessary_conditions(link, tr.g, tr.gt, tr.sigma);
    for (const auto& c : rep.checks)
      if (!c.informational) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
    EXPECT_TRUE(rep.corrected_ratio_is_eigenvalue);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 12;
    Pair p = random_pair(n, 1e5, rng);
    auto link = analysis::extract_link(p.ti, p.tm, p.m);
    RVec sigma = num::singular_values(link.t);
    auto rep = analysis::necessary_conditions(link, p.ti.g_realized, p.tm.g_realized, sigma);
    for (const auto& c : rep.checks)
      if (!c.informational) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
  }
}

TEST(NecessaryConditions, PerturbedTrailingEntry) {
  RVec g(2), gt(2);
  g << 0.6, 0.8;
  gt << 0.8, 0.6;
  auto link = forge::link_for_curves(g, gt);
  Mat t = link.t;
  t(1, 1) *= 1.01;
  auto bad = forge::make_link(t, 2);
  auto rep = analysis::necessary_conditions(bad, g, gt, bad.sigma);
  EXPECT_FALSE(rep.get("trailing_entry").pass);
  EXPECT_NEAR(rep.get("trailing_entry").residual, 0.01, 1e-12);
  EXPECT_FALSE(rep.all());
}

TEST(ExtractLink, IdentityWeight) {
  std::mt19937_64 rng(14);
  Pair p = random_pair(9, 1.0, rng);
  auto ti2 = krylov::mgmres(p.a, p.b, WeightMatrix::identity(9));
  auto link = analysis::extract_link(p.ti, ti2, WeightMatrix::identity(9));
  EXPECT_TRUE(is_diagonal_phase(link.t, 1e-10));
}

TEST(ExtractLink, SimultaneousInstanceRecoversSingularValues) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Triple tr = feasible_triple(rng);
    const Mat t = std::get<forge::LinkMatrix>(forge::two_by_two_link(tr.g, tr.gt, tr.sigma)).t;
    RVec mu(2);
    mu << 1.0 / (tr.sigma(0) * tr.sigma(0)), 1.0 / (tr.sigma(1) * tr.sigma(1));
    WeightMatrix m(hpd_with_eigenvalues(mu, rng()));
    auto inst = forge::simultaneous_system(tr.g, tr.gt, m, t, random_spectrum(2, 0.5, 2.0, rng), rng());
    auto ti = krylov::mgmres(inst.a, inst.b, WeightMatrix::identity(2));
    auto tm = krylov::mgmres(inst.a, inst.b, m);
    auto link = analysis::extract_link(ti, tm, m);
    EXPECT_LE(std::abs(link.sigma(0) - tr.sigma(0)), 1e-8 * tr.sigma(0));
    EXPECT_LE(std::abs(link.sigma(1) - tr.sigma(1)), 1e-8 * tr.sigma(0));
  }
}

TEST(ExtractLink, LinkRelatesDecreaseVectors) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    Pair p = random_pair(10, 1e6, rng);
    auto link = analysis::extract_link(p.ti, p.tm, p.m);
    Vec res = p.ti.g_realized.cast<cplx>() - link.t * p.tm.g_realized.cast<cplx>();
    EXPECT_LE(res.norm(), 1e-8 * p.ti.g_realized.norm());
  }
}

TEST(ExtractLink, DifferentSystems) {
  std::mt19937_64 rng(17);
  Pair p = random_pair(6, 10, rng);
  Pair q = random_pair(6, 10, rng);
  EXPECT_THROW(analysis::extract_link(p.ti, q.tm, p.m), Error);
}

TEST(Characterization, WeightFromConstruction) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10;
    RVec g = uniform_real(n, 0.1, 1.0, rng), gt = uniform_real(n, 0.1, 1.0, rng);
    auto inst = forge::gps_system(g, random_spectrum(n, 0.5, 2.0, rng), std::nullopt, rng());
    WeightMatrix m = forge::weight_for_curve(inst.a, inst.b, gt);
    if (m.cond() > 1e8) continue;
    auto res = analysis::verify_weight_characterization(inst.a, inst.b, m, gt);
    EXPECT_TRUE(res.ok) << res.failure;
    // The construction's link is diagonal g_i / g~_i; the witness agrees up to phases.
    for (int i = 0; i < n; ++i) EXPECT_NEAR(std::abs(res.t(i, i)), g(i) / gt(i), 1e-7 * g(i) / gt(i));
  }
}

TEST(Characterization, IdentityWeight) {
  std::mt19937_64 rng(19);
  const int n = 8;
  RVec g = uniform_real(n, 0.1, 1.0, rng);
  auto inst = forge::gps_system(g, random_spectrum(n, 0.5, 2.0, rng), std::nullopt, 1);
  auto res = analysis::verify_weight_characterization(inst.a, inst.b, WeightMatrix::identity(n), g);
  EXPECT_TRUE(res.ok);
  EXPECT_TRUE(is_diagonal_phase(res.t, 1e-8));
}

TEST(Characterization, WrongLength) {
  std::mt19937_64 rng(20);
  const int n = 8;
  RVec g = uniform_real(n, 0.1, 1.0, rng);
  auto inst = forge::gps_system(g, random_spectrum(n, 0.5, 2.0, rng), std::nullopt, 1);
  RVec gt = g;
  gt(n - 1) = 0.0;
  auto res = analysis::verify_weight_characterization(inst.a, inst.b, WeightMatrix::identity(n), gt);
  EXPECT_FALSE(res.ok);
  EXPECT_FALSE(res.failure.empty());
}

TEST(Characterization, PreconditionerFromLeftRightPair) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 12;
    RVec gr = uniform_real(n, 0.1, 1.0, rng), gl = uniform_real(n, 0.1, 1.0, rng);
    auto inst = forge::left_right_pair(gr, gl, random_spectrum(n, 0.5, 2.0, rng), rng());
    const Mat& h = *inst.h;
    Mat a_hat = inst.a * h;
    auto res = analysis::verify_preconditioner_characterization(a_hat, inst.b, h, gl);
    EXPECT_TRUE(res.ok) << res.failure << " " << res.curve_error;
    Mat hp = h;
    hp(0, n - 1) += 0.5 * h.norm();
    auto bad = analysis::verify_preconditioner_characterization(a_hat, inst.b, hp, gl);
    EXPECT_FALSE(bad.ok);
    EXPECT_GT(bad.curve_error, 1e-7);
  }
}

TEST(Characterization, IdentityPreconditionerIsWeightCase) {
  std::mt19937_64 rng(22);
  const int n = 8;
  RVec g = uniform_real(n, 0.1, 1.0, rng);
  auto inst = forge::gps_system(g, random_spectrum(n, 0.5, 2.0, rng), std::nullopt, 3);
  auto a = analysis::verify_preconditioner_characterization(inst.a, inst.b, Mat::Identity(n, n), g);
  auto b = analysis::verify_weight_characterization(inst.a, inst.b, WeightMatrix::identity(n), g);
  EXPECT_EQ(a.ok, b.ok);
  EXPECT_TRUE(a.ok);
  EXPECT_EQ(a.curve_error, b.curve_error);
}

TEST(CurveDeviation, Cases) {
  RVec ref(3), got(3);
  ref << 1.0, 0.5, 0.0;
  got << 1.0, 0.55, 1e-3;
  EXPECT_NEAR(analysis::curve_deviation(got, ref), 0.1, 1e-14);
  EXPECT_EQ(analysis::curve_deviation(ref, ref), 0.0);
  EXPECT_NEAR(analysis::curve_deviation(got.head(2), ref), 0.1, 1e-14);
  EXPECT_EQ(analysis::curve_deviation(got.head(1), ref), 1.0);
}
