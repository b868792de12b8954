#pragma once

#include <optional>
#include <span>
#include <vector>

namespace paoa {

// Largest magnitude allowed inside exp(); arguments are clamped to
// [-kExpClamp, kExpClamp] to avoid overflow for extreme gate voltages.
inline constexpr double kExpClamp = 700.0;

double clamped_exp(double x);

// Dark-count activation parameters of one device plus its operating point.
// kappa is the Poisson exposure at (theta, t_int). When lambda0 is present,
// kappa = lambda0 * exp(zeta * theta) * t_int must hold.
struct GompertzParams {
  double alpha = 1.4;                  // gate exponent coefficient [1/V]
  double kappa = 0.6931471805599453;   // dimensionless exposure
  std::optional<double> lambda0;       // native DCR at 0 C, 0 V [1/s]
  double zeta = 0.0;                   // temperature coefficient [1/C]
  double theta = 0.0;                  // operating temperature [C]
  double t_int = 1.0;                  // integration window [s]

  // Builds params from the rate model, deriving kappa.
  static GompertzParams from_rate(double lambda0, double zeta, double theta,
                                  double t_int, double alpha);

  void validate() const;  // throws std::invalid_argument
};

struct ActivationDescriptors {
  double v_mid = 0.0;       // Pr{m=1} = 1/2
  double v_inflc = 0.0;     // second derivative zero
  double dv_transit = 0.0;  // transition input range
};

// Bipolar activation used by the p-circuit: symmetric tanh or the
// asymmetric Gompertz form 2*exp(-kappa*exp(-alpha*x)) - 1.
struct Activation {
  enum class Kind { SymmetricTanh, Gompertz };
  Kind kind = Kind::SymmetricTanh;
  double alpha = 0.0;
  double kappa = 0.0;

  static Activation tanh_kind() { return {}; }
  static Activation gompertz(double alpha, double kappa) {
    return {Kind::Gompertz, alpha, kappa};
  }

  double operator()(double x) const;
};

// lambda = lambda0 * exp(zeta*theta - alpha*vg); requires lambda0 present.
double dark_count_rate(const GompertzParams& p, double theta, double vg);

// 1 - exp(-rate * t_int)
double event_probability(double rate, double t_int);

// Pr{m=1} = exp(-kappa * exp(-alpha * vg))
double prob_one(double alpha, double kappa, double vg);
double prob_one(const GompertzParams& p, double vg);

double bipolar_activation(const Activation& kind, double x);

ActivationDescriptors descriptors(const GompertzParams& p);

// Gain k = e/(2*alpha) matching the Gompertz slope at v_inflc to the
// logistic slope 1/2.
double slope_gain(double alpha);

// Exact shift of v_inflc/v_mid under a temperature change: zeta*d_theta/alpha.
double temperature_shift(const GompertzParams& p, double d_theta);

// First-order shift under timing jitter: (d_t/t_int)/alpha.
// Requires |d_t|/t_int < 0.1.
double jitter_shift(const GompertzParams& p, double d_t);

struct SweepPoint {
  double vg = 0.0;
  double p_hat = 0.0;
  long n_windows = 1;
};

struct GompertzFit {
  double alpha = 0.0;
  double kappa = 0.0;
};

// Weighted least squares in the linearized space
// ln(-ln p_hat) = ln(kappa) - alpha*vg, weights n_windows.
// Points with p_hat in {0, 1} are dropped; needs >= 3 usable points.
GompertzFit fit_gompertz(std::span<const SweepPoint> curve);

}  // namespace paoa
