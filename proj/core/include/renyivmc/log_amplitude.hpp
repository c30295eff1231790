#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace rvmc {

/// An unnormalized density-matrix element rho_{s s'} in log form:
/// rho = exp(log_modulus) * exp(i * phase). Exact zeros are represented by
/// log_modulus = -infinity. Diagonal elements always carry phase 0.
struct LogAmplitude {
  double log_modulus = -std::numeric_limits<double>::infinity();
  double phase = 0.0;  ///< radians in (-pi, pi]

  bool is_zero() const { return !std::isfinite(log_modulus); }

  std::complex<double> value() const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(log_modulus), phase);
  }

  /// Normalizes a raw complex log (real part: log-modulus, imaginary part:
  /// accumulated phase, possibly outside (-pi, pi]).
  static LogAmplitude from_log(std::complex<double> log_value) {
    LogAmplitude a;
    a.log_modulus = log_value.real();
    if (!std::isfinite(a.log_modulus)) {
      a.log_modulus = -std::numeric_limits<double>::infinity();
      a.phase = 0.0;
      return a;
    }
    double p = std::remainder(log_value.imag(), 6.283185307179586476925286766559);
    if (p <= -3.141592653589793238462643383280) p += 6.283185307179586476925286766559;
    a.phase = p;
    return a;
  }
};

/// Raw complex log of a matrix element; imaginary part is the accumulated
/// (unwrapped) phase. Used internally so that finite differences of the log
/// are free of branch jumps.
using CLog = std::complex<double>;

inline constexpr double neg_infinity() { return -std::numeric_limits<double>::infinity(); }

inline bool clog_is_zero(const CLog& l) { return !std::isfinite(l.real()); }

/// exp of a log-ratio, 0 if the numerator is an exact zero.
inline std::complex<double> ratio_from_logs(const CLog& num, const CLog& den) {
  if (clog_is_zero(num)) return {0.0, 0.0};
  const CLog d = num - den;
  return std::polar(std::exp(d.real()), d.imag());
}

}  // namespace rvmc
