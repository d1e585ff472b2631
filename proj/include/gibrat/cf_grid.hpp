#pragma once

#include <complex>
#include <vector>

namespace gibrat {

enum class CfProvenance { empirical, wild, analytic, oracle };

// Characteristic function sampled on a frequency grid.
struct CharacteristicFunctionGrid {
  std::vector<double> xi;
  std::vector<std::complex<double>> values;
  CfProvenance meta = CfProvenance::analytic;

  // Enforces the probability-CF invariants: |value| <= 1 + 1e-12 everywhere,
  // value(0) = 1 within 1e-12 when the grid contains 0, and Hermitian
  // symmetry within 1e-12 when the grid is symmetric about 0.
  // Throws NumericError on violation.
  void validate() const;
};

// True when the grid is an exact mirror image around 0 (with or without 0).
bool symmetric_grid(const std::vector<double>& xi);

}  // namespace gibrat
