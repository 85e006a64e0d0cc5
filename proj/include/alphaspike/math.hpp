// Copyright 2026 The alphaspike Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace alphaspike {

/// Raised when a scalar function is evaluated outside its real domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kInvE = 0.36787944117144233;  // exp(-1)

/// Arguments this far below -1/e are still treated as the branch point.
inline constexpr double kLambertBranchTolerance = 1e-12;

namespace detail {

// Initial guess for the principal branch. Series around the branch point,
// a rational fit near the origin and the log asymptote for large arguments.
inline double LambertW0Guess(double z) {
  if (z < -0.25) {
    const double p = std::sqrt(2.0 * (std::numbers::e * z + 1.0));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
  }
  if (z < 3.0) {
    // Winitzki-style approximation, good to a few percent on this range.
    const double l = std::log1p(z);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l = std::log(z);
  const double ll = std::log(l);
  return l - ll + ll / l;
}

}  // namespace detail

/// Principal branch W0 of the Lambert W function (w * e^w = z, w >= -1).
///
/// Arguments in [-1/e - 1e-12, -1/e] are clamped to the branch point, since
/// cancellation in spike-time arguments routinely undershoots by a few ulps.
/// Throws DomainError for anything lower or for NaN.
inline double LambertW0(double z) {
  if (std::isnan(z)) throw DomainError("LambertW0: NaN argument");
  if (z < -kInvE) {
    if (z < -kInvE - kLambertBranchTolerance) {
      throw DomainError("LambertW0: argument " + std::to_string(z) +
                        " below -1/e");
    }
    return -1.0;
  }
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;

  double w = detail::LambertW0Guess(z);
  if (w <= -1.0) w = -1.0 + 1e-300;

  // Halley iteration on f(w) = w e^w - z.
  for (int iter = 0; iter < 32; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    if (wp1 <= 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    const double step = f / denom;
    double next = w - step;
    if (next < -1.0) next = 0.5 * (w - 1.0);  // stay on the principal branch
    if (next == w) break;
    const bool converged = std::abs(next - w) <= 4e-16 * (1.0 + std::abs(next));
    w = next;
    if (converged) break;
  }
  return w;
}

/// Alpha postsynaptic kernel w_i (t - t_i) e^{tau (t_i - t)}; zero before the
/// presynaptic spike arrives.
inline double AlphaKernel(double t, double t_i, double w_i, double tau) {
  if (t < t_i) return 0.0;
  const double s = t - t_i;
  return w_i * s * std::exp(-tau * s);
}

}  // namespace alphaspike
