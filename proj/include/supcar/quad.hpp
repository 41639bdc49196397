#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace supcar {

struct QuadOptions {
  double epsabs = 0.0;
  double epsrel = 1e-10;
  int max_intervals = 4000;
};

template <class T>
struct BasicQuadResult {
  T value{};
  double abs_error = 0.0;
  bool converged = true;
  int evaluations = 0;
};

using QuadResult = BasicQuadResult<double>;
using ComplexQuadResult = BasicQuadResult<std::complex<double>>;

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<std::complex<double>(double)>;

// Global adaptive Gauss-Kronrod (10/21) over [a, b], optionally pre-split at breakpoints.
QuadResult integrate(const RealFn& f, double a, double b, const QuadOptions& opt = {});
QuadResult integrate_points(const RealFn& f, const std::vector<double>& points, const QuadOptions& opt = {});
ComplexQuadResult integrate_points_complex(const ComplexFn& f, const std::vector<double>& points,
                                           const QuadOptions& opt = {});

// Integral of g over [lo, hi] where either end may be infinite. Infinite ends are located by
// marching outward from `hint` in unit chunks until contributions are negligible; when the
// march reaches |u| = 745 without settling the result is flagged as not converged.
QuadResult integrate_line(const RealFn& g, double lo, double hi, double hint, const QuadOptions& opt = {});
ComplexQuadResult integrate_line_complex(const ComplexFn& g, double lo, double hi, double hint,
                                         const QuadOptions& opt = {});

struct DivergenceCheck {
  bool divergent = false;
  double value = 0.0;
  std::vector<double> estimates;
};

// Truncation-doubling test: integrates g over [anchor - L, anchor] (direction < 0) or
// [anchor, anchor + L] (direction > 0) for L = L0 * 2^k, k = 0..doublings. The integral is
// declared divergent unless the last relative increment is below tol.
DivergenceCheck truncation_doubling(const RealFn& g, double anchor, int direction, double L0 = 5.0,
                                    int doublings = 6, double tol = 1e-3);

}  // namespace supcar
