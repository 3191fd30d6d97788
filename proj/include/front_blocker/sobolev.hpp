#pragma once

#include "front_blocker/criterion.hpp"
#include "front_blocker/grid.hpp"

namespace front_blocker {

struct SobolevEstimateOptions {
  double length = 4.0;                  ///< axial length of the truncated cylinder for C1
  GridResolution resolution{41, {9, 9}};
  int max_iterations = 500;
  double tol = 1e-10;                   ///< relative change of the quotient
};

struct SobolevEstimate {
  double C1 = 0.0;  ///< max ||w||_{L^q} / ||w||_{H^1} found on the grid
  double C2 = 0.0;  ///< max ||w||_{L^m} / ||w||_{W^{1,p}} found on the slab
  int iterations = 0;
};

/// Lower estimate of the H^1 -> L^q constant of the cylinder R x Omega:
/// nonlinear power iteration w <- M^{-1}(|w|^{q-2} w) on a truncated
/// cylinder with w = 0 at both axial ends (so the zero extension lies in
/// H^1 of the full cylinder), M the H^1 Gram matrix.
double estimate_C1(const CrossSection& cs, const SobolevEstimateOptions& options, int* iterations = nullptr);

/// Lower estimate of the W^{1,p} -> L^m constant on (-x0, 0) x Omega: best
/// quotient over constants and corner-centered Gaussian bumps, the width
/// optimized by Brent's method.
double estimate_C2(const CrossSection& cs, double x0, const SobolevEstimateOptions& options);

/// Both estimates with provenance Estimated.
SobolevConstants estimate_sobolev_constants(const CrossSection& cs, double x0,
                                            const SobolevEstimateOptions& options = {});

}  // namespace front_blocker
