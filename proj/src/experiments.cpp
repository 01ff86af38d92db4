#include "wgmres/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wgmres/forge.hpp"

namespace wgmres::lab {

CurveKind parse_curve_kind(const std::string& s) {
  if (s == "stagnation") return CurveKind::Stagnation;
  if (s == "loglinear") return CurveKind::LogLinear;
  if (s == "irregular") return CurveKind::Irregular;
  throw Error(ErrorKind::InvalidConfig, "unknown curve kind '" + s + "'");
}

std::string to_string(CurveKind k) {
  switch (k) {
    case CurveKind::Stagnation: return "stagnation";
    case CurveKind::LogLinear: return "loglinear";
    case CurveKind::Irregular: return "irregular";
  }
  return "?";
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.id < 1 || cfg.id > 5) throw Error(ErrorKind::InvalidConfig, "experiment id must be 1..5");
  if (cfg.n < 2) throw Error(ErrorKind::InvalidConfig, "n must be at least 2");
  if (cfg.samples < 1) throw Error(ErrorKind::InvalidConfig, "sample count must be positive");
  if (cfg.id == 1 && (cfg.k < 0 || cfg.k > cfg.n)) throw Error(ErrorKind::InvalidConfig, "k must lie in 0..n");
  if (cfg.id == 2 && cfg.mu.empty() && cfg.n != 20)
    throw Error(ErrorKind::InvalidConfig, "experiment 2 multiplicities 4/7/9 need n = 20");
  if (cfg.id == 4 && cfg.n % 2 != 0) throw Error(ErrorKind::InvalidConfig, "experiment 4 needs even n");
  if (cfg.id == 5) {
    const int p = cfg.p < 0 ? cfg.n / 2 : cfg.p;
    if (p < 0 || p > cfg.n) throw Error(ErrorKind::InvalidConfig, "p must lie in 0..n");
    if (!(cfg.eps > 0)) throw Error(ErrorKind::InvalidConfig, "eps must be positive");
  }
  if (!cfg.mu.empty()) {
    if (static_cast<int>(cfg.mu.size()) != cfg.n)
      throw Error(ErrorKind::InvalidConfig, "multiplicities of mu must sum to n");
    for (double v : cfg.mu)
      if (!(v > 0)) throw Error(ErrorKind::InvalidConfig, "mu must be positive");
  }
}

curves::Curve prescribed_curve(CurveKind kind, int n, std::uint64_t seed) {
  curves::Curve r = curves::Curve::Zero(n + 1);
  switch (kind) {
    case CurveKind::Stagnation:
      r.head(n).setOnes();
      break;
    case CurveKind::LogLinear:
      for (int i = 0; i < n; ++i) r(i) = std::pow(10.0, -8.0 * i / n);
      break;
    case CurveKind::Irregular: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> ud(-2.0, 0.3);
      double decades = 0.0;
      r(0) = 1.0;
      for (int i = 1; i < n; ++i) {
        decades += std::pow(10.0, ud(rng));
        r(i) = std::pow(10.0, -decades);
      }
      break;
    }
  }
  return r;
}

RVec experiment_spectrum(const ExperimentConfig& cfg) {
  const int n = cfg.n;
  if (!cfg.mu.empty()) return Eigen::Map<const RVec>(cfg.mu.data(), n);
  RVec mu(n);
  switch (cfg.id) {
    case 1:
      for (int i = 0; i < n; ++i) mu(i) = i < cfg.k ? 1e12 : 1.0;
      break;
    case 2:
      for (int i = 0; i < n; ++i) mu(i) = i < 4 ? 1e20 : (i < 11 ? 1e10 : 1.0);
      break;
    case 3:
      for (int i = 0; i < n; ++i) mu(i) = std::pow(10.0, 12.0 * i / (n - 1));
      break;
    default:
      throw Error(ErrorKind::InvalidConfig, "no default spectrum for this experiment");
  }
  return mu;
}

CurveTable run_experiment_123(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.id > 3) throw Error(ErrorKind::InvalidConfig, "run_experiment_123 handles experiments 1-3");
  RVec mu = experiment_spectrum(cfg);
  std::mt19937_64 rng(cfg.seed);
  if (cfg.permute_mu) std::shuffle(mu.data(), mu.data() + mu.size(), rng);
  const RVec sq = mu.cwiseSqrt();

  curves::Curve r = prescribed_curve(cfg.curve, cfg.n, cfg.seed);
  curves::GVec g = curves::curve_to_g(r);
  CurveTable tab;
  tab.labels.push_back("I-GMRES");
  tab.columns.push_back(curves::normalize_curve(r));
  for (int s = 0; s < cfg.samples; ++s) {
    const std::uint64_t sample_seed = rng();
    Mat tinv = forge::link_with_singular_values(sq, sample_seed).t;
    curves::GVec gt = (tinv * g.cast<cplx>()).cwiseAbs();
    tab.labels.push_back("sample_" + std::to_string(s));
    tab.columns.push_back(curves::normalize_curve(curves::g_to_curve(gt)));
  }
  return tab;
}

RVec mu_under(int n, int k) {
  RVec mu = RVec::Ones(n);
  for (int i = k; i < k + n / 2; ++i) mu(i) = 1e12;
  return mu;
}

RVec mu_over(int n, int k) {
  RVec mu = RVec::Constant(n, 1e12);
  for (int i = k; i < k + n / 2; ++i) mu(i) = 1.0;
  return mu;
}

CurveTable run_experiment_4(const ExperimentConfig& cfg) {
  validate(cfg);
  const int n = cfg.n;
  curves::Curve r = prescribed_curve(cfg.curve, n, cfg.seed);
  curves::GVec g = curves::curve_to_g(r);
  CurveTable tab;
  tab.labels.push_back("I-GMRES");
  tab.columns.push_back(curves::normalize_curve(r));
  auto add = [&](const std::string& label, const RVec& mu) {
    curves::GVec gt = mu.cwiseSqrt().cwiseProduct(g);
    tab.labels.push_back(label);
    tab.columns.push_back(curves::normalize_curve(curves::g_to_curve(gt)));
  };
  for (int k = 0; k <= n / 2; ++k) add("under_" + std::to_string(k), mu_under(n, k));
  for (int k = 0; k <= n / 2; ++k) add("over_" + std::to_string(k), mu_over(n, k));
  return tab;
}

RVec experiment5_decrease(const RVec& mu) {
  const double n = static_cast<double>(mu.size());
  const double beta = n / mu.sum();
  return (beta / n * mu).cwiseSqrt();
}

RVec experiment5_mu(int which, int n, double eps, int p, std::uint64_t seed) {
  RVec mu(n);
  for (int i = 0; i < n; ++i) {
    const bool head = i < p;
    mu(i) = which == 2 ? (head ? eps : 1.0) : (head ? 1.0 : eps);
  }
  if (which == 3) {
    std::mt19937_64 rng(seed);
    std::shuffle(mu.data(), mu.data() + n, rng);
  } else if (which != 1 && which != 2) {
    throw Error(ErrorKind::InvalidConfig, "experiment 5 spectrum index must be 1..3");
  }
  return mu;
}

CurveTable run_experiment_5(const ExperimentConfig& cfg) {
  validate(cfg);
  const int n = cfg.n;
  const int p = cfg.p < 0 ? n / 2 : cfg.p;
  CurveTable tab;
  tab.labels.push_back("I-GMRES");
  tab.columns.push_back(curves::g_to_curve(RVec::Constant(n, 1.0 / std::sqrt(double(n)))));
  for (int which = 1; which <= 3; ++which) {
    RVec mu = experiment5_mu(which, n, cfg.eps, p, cfg.seed);
    tab.labels.push_back("mu" + std::to_string(which));
    tab.columns.push_back(curves::g_to_curve(experiment5_decrease(mu)));
  }
  return tab;
}

namespace {

int positive_prefix(const curves::Curve& r) {
  int m = 0;
  while (m < r.size() && r(m) > 0) ++m;
  return m;  // r_0 .. r_{m-1} are positive
}

}  // namespace

std::vector<int> jump_locations(const curves::Curve& r) {
  const int m = positive_prefix(r);
  std::vector<int> idx;
  for (int i = 1; i < m; ++i) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return r(a - 1) / r(a) > r(b - 1) / r(b); });
  return idx;
}

double gap_magnitude(const curves::Curve& r, const curves::Curve& rt) {
  const int m = std::min(positive_prefix(r), positive_prefix(rt));
  double worst = 0.0;
  for (int k = 0; k < m; ++k) worst = std::max(worst, (r(k) / r(0)) / (rt(k) / rt(0)));
  return worst;
}

int stagnation_length(const curves::Curve& rt, double tol) {
  int len = 0;
  for (Eigen::Index i = 1; i < rt.size() && rt(i) >= (1.0 - tol) * rt(i - 1); ++i) ++len;
  return len;
}

}  // namespace wgmres::lab
