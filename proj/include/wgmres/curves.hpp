#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wgmres/numkernel.hpp"

namespace wgmres::curves {

/// Residual decrease vector: g_i = sqrt(r_{i-1}^2 - r_i^2), padded with zeros
/// up to the ambient dimension.
using GVec = RVec;

/// Convergence curve r_0, ..., r_m (r_m = 0 at breakdown).
using Curve = RVec;

/// Number of entries up to and including the last nonzero one.
int length(const GVec& g);

/// Throws on negative or non-finite entries.
void validate_g(const GVec& g);

GVec curve_to_g(const Curve& r);
Curve g_to_curve(const GVec& g);
Curve normalize_curve(const Curve& r);

struct CompatibilityReport {
  bool norm_ok = false;
  bool length_ok = false;
  double ratio = 0.0;  ///< sum g_i^2 / ||b||_M^2
  int length = 0;
  int dimension = 0;
  bool ok() const { return norm_ok && length_ok; }
};

/// M is the identity when absent.
CompatibilityReport check_compatibility(const GVec& g, const Vec& b, const std::optional<Mat>& m = std::nullopt);

/// One column per curve, one row per iteration; shorter columns are left blank.
void write_csv(std::ostream& os, const std::vector<std::string>& labels, const std::vector<RVec>& columns);

/// Full precision scientific notation.
std::string format_double(double x);

}  // namespace wgmres::curves
