#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgmres/curves.hpp"

namespace wgmres::lab {

enum class CurveKind { Stagnation, LogLinear, Irregular };

CurveKind parse_curve_kind(const std::string& s);
std::string to_string(CurveKind k);

struct ExperimentConfig {
  int id = 1;
  int n = 20;
  int k = 8;            ///< multiplicity of the large eigenvalue in experiment 1
  int samples = 5;
  std::uint64_t seed = 0;
  CurveKind curve = CurveKind::LogLinear;
  bool permute_mu = false;  ///< shuffle the spectrum of M (experiments 1-3)
  double eps = 1e-2;        ///< experiment 5
  int p = -1;               ///< experiment 5, -1 means n/2
  std::vector<double> mu;   ///< explicit spectrum for M, overrides the experiment default
};

/// Throws InvalidConfig on inconsistent settings.
void validate(const ExperimentConfig& cfg);

/// Normalized residual columns; column 0 is the I-GMRES reference.
struct CurveTable {
  std::vector<std::string> labels;
  std::vector<RVec> columns;
};

/// Prescribed I-GMRES curve r_0 .. r_n with r_0 = 1 and r_n = 0.
/// Log-linear decays as 10^{-8 i / n}; irregular accumulates seeded log-uniform drops.
curves::Curve prescribed_curve(CurveKind kind, int n, std::uint64_t seed);

/// Spectrum of M used by experiments 1, 2 and 3 (before any permutation).
RVec experiment_spectrum(const ExperimentConfig& cfg);

CurveTable run_experiment_123(const ExperimentConfig& cfg);

/// Spectra underline-mu^k and overline-mu^k for experiment 4.
RVec mu_under(int n, int k);
RVec mu_over(int n, int k);

/// Columns: I-GMRES, under_0 .. under_{n/2}, over_0 .. over_{n/2}.
CurveTable run_experiment_4(const ExperimentConfig& cfg);

/// Columns: I-GMRES, mu1, mu2, mu3. Curves are in the M-norm with ||b||_M = 1.
CurveTable run_experiment_5(const ExperimentConfig& cfg);

/// Decrease vector of M-GMRES in experiment 5: sqrt(beta mu_i / n), beta = n / sum(mu).
RVec experiment5_decrease(const RVec& mu);
RVec experiment5_mu(int which, int n, double eps, int p, std::uint64_t seed);

/// Iterations i (1-based, i < m) sorted by decreasing r_{i-1} / r_i; the final drop to zero is excluded.
std::vector<int> jump_locations(const curves::Curve& r);

/// max_k (r_k / r_0) / (rt_k / rt_0) over k before breakdown: how far the
/// normalized M-curve falls below the normalized I-curve.
double gap_magnitude(const curves::Curve& r, const curves::Curve& rt);

/// Number of leading iterations with rt_i >= (1 - tol) rt_{i-1}.
int stagnation_length(const curves::Curve& rt, double tol = 0.05);

}  // namespace wgmres::lab
