#include "gibrat/cf_grid.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "gibrat/errors.hpp"

namespace gibrat {

bool symmetric_grid(const std::vector<double>& xi) {
  std::size_t i = 0;
  std::size_t j = xi.size();
  while (i < j) {
    if (j - i == 1) return xi[i] == 0.0;  // middle element must be the origin
    --j;
    if (xi[i] != -xi[j]) return false;
    ++i;
  }
  return true;
}

void CharacteristicFunctionGrid::validate() const {
  if (xi.size() != values.size())
    throw NumericError("cf grid: xi and value lengths differ");
  constexpr double kTol = 1e-12;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double a = std::abs(values[i]);
    if (!(a <= 1.0 + kTol)) {
      std::ostringstream msg;
      msg << "cf grid: |value| = " << a << " exceeds 1 at xi = " << xi[i];
      throw NumericError(msg.str());
    }
    if (xi[i] == 0.0 && std::abs(values[i] - 1.0) > kTol)
      throw NumericError("cf grid: value at xi = 0 is not 1");
  }
  if (symmetric_grid(xi)) {
    std::size_t i = 0;
    std::size_t j = xi.size();
    while (j - i > 1) {
      --j;
      if (std::abs(values[i] - std::conj(values[j])) > kTol) {
        std::ostringstream msg;
        msg << "cf grid: Hermitian symmetry broken at xi = " << xi[j];
        throw NumericError(msg.str());
      }
      ++i;
    }
  }
}

}  // namespace gibrat
