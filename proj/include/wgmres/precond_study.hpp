#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wgmres/experiments.hpp"
#include "wgmres/krylov.hpp"

namespace wgmres::lab {

enum class PrecondKind { SymPart, Ilu0, Supplied };

PrecondKind parse_precond_kind(const std::string& s);
std::string to_string(PrecondKind k);

/// H = ((A + A*)/2)^{-1}.
Mat sym_part_preconditioner(const Mat& a);

/// H = (L U)^{-1} with L, U the zero fill-in incomplete factors on the pattern of A.
Mat ilu0_preconditioner(const Mat& a);

struct PrecondStudy {
  CurveTable table;  ///< relative curves: left/right minimized, companion and error norms
  double cond_ha = 0, cond_ah = 0;
  double sigma_min_h = 0, sigma_max_h = 0;
  double norm_ha = 0, norm_ah = 0;
  int left_iters = -1, right_iters = -1;  ///< first iteration with minimized relative norm <= 1e-8
  int unprec_iters = -1;
  double unprec_final = 0;  ///< relative residual of unpreconditioned GMRES after n-1 iterations
  int n = 0;
};

struct PrecondOptions {
  PrecondKind kind = PrecondKind::SymPart;
  std::optional<Mat> supplied;
  std::uint64_t seed = 0;
  int max_iter = -1;
  bool run_unpreconditioned = true;
};

PrecondStudy precond_study(const Mat& a, const PrecondOptions& opt);

}  // namespace wgmres::lab
