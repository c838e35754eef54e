#ifndef RB_LORENTZ_HPP
#define RB_LORENTZ_HPP

#include <complex>
#include <optional>
#include <span>

namespace rb {

// Least-squares Lorentzian T(nu) = offset + amplitude / (1 + (2(nu-nu0)/fwhm)^2).
struct LorentzianFit {
  double nu0 = 0.0;        // center frequency [Hz]
  double fwhm = 0.0;       // full width at half maximum [Hz]
  double amplitude = 0.0;  // peak height above the baseline
  double offset = 0.0;     // baseline
  double q = 0.0;          // nu0 / fwhm
  double residual_norm = 0.0;
  int iterations = 0;
};

struct LorentzOptions {
  bool fix_offset_zero = false;  // freeze the baseline at 0
  double gradient_tol = 1e-10;   // relative gradient stopping criterion
  int max_iterations = 200;
  // Optional starting point (nu0, fwhm, amplitude, offset); otherwise the
  // guess is derived from the peak sample and half-height crossings.
  std::optional<LorentzianFit> initial_guess;
};

// Levenberg-Marquardt fit; frequencies are nondimensionalized by the data
// span internally (THz-scale abscissa with GHz-scale widths is
// ill-conditioned otherwise).
LorentzianFit fit_lorentzian(std::span<const double> frequency_hz,
                             std::span<const double> transmission,
                             const LorentzOptions& options = {});

// Q = |Re(omega) / Im(omega)| / 2 from a complex eigenfrequency.
double q_from_complex_frequency(std::complex<double> omega);

}  // namespace rb

#endif
