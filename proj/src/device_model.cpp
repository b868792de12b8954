#include "paoa/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace paoa {

double clamped_exp(double x) {
  return std::exp(std::clamp(x, -kExpClamp, kExpClamp));
}

GompertzParams GompertzParams::from_rate(double lambda0, double zeta,
                                         double theta, double t_int,
                                         double alpha) {
  GompertzParams p;
  p.alpha = alpha;
  p.lambda0 = lambda0;
  p.zeta = zeta;
  p.theta = theta;
  p.t_int = t_int;
  p.kappa = lambda0 * clamped_exp(zeta * theta) * t_int;
  p.validate();
  return p;
}

void GompertzParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("GompertzParams: alpha must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("GompertzParams: kappa must be > 0");
  if (!(t_int > 0.0)) throw std::invalid_argument("GompertzParams: t_int must be > 0");
  if (lambda0 && !(*lambda0 > 0.0))
    throw std::invalid_argument("GompertzParams: lambda0 must be > 0");
}

double dark_count_rate(const GompertzParams& p, double theta, double vg) {
  p.validate();
  if (!p.lambda0)
    throw std::invalid_argument("dark_count_rate: lambda0 absent");
  return *p.lambda0 * clamped_exp(p.zeta * theta - p.alpha * vg);
}

double event_probability(double rate, double t_int) {
  if (rate < 0.0) throw std::invalid_argument("event_probability: rate < 0");
  if (!(t_int > 0.0)) throw std::invalid_argument("event_probability: t_int <= 0");
  return -std::expm1(-rate * t_int);
}

double prob_one(double alpha, double kappa, double vg) {
  return clamped_exp(-kappa * clamped_exp(-alpha * vg));
}

double prob_one(const GompertzParams& p, double vg) {
  p.validate();
  return prob_one(p.alpha, p.kappa, vg);
}

double Activation::operator()(double x) const {
  if (kind == Kind::SymmetricTanh) return std::tanh(x);
  return 2.0 * prob_one(alpha, kappa, x) - 1.0;
}

double bipolar_activation(const Activation& kind, double x) { return kind(x); }

ActivationDescriptors descriptors(const GompertzParams& p) {
  p.validate();
  ActivationDescriptors d;
  d.v_inflc = std::log(p.kappa) / p.alpha;
  d.v_mid = std::log(p.kappa / std::log(2.0)) / p.alpha;
  d.dv_transit = 1.925 / p.alpha;
  return d;
}

double slope_gain(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("slope_gain: alpha must be > 0");
  return std::exp(1.0) / (2.0 * alpha);
}

double temperature_shift(const GompertzParams& p, double d_theta) {
  p.validate();
  return p.zeta * d_theta / p.alpha;
}

double jitter_shift(const GompertzParams& p, double d_t) {
  p.validate();
  const double r = d_t / p.t_int;
  if (std::abs(r) >= 0.1)
    throw std::invalid_argument("jitter_shift: |d_t|/t_int must be < 0.1");
  return r / p.alpha;
}

GompertzFit fit_gompertz(std::span<const SweepPoint> curve) {
  // y = ln(-ln p_hat) = ln(kappa) - alpha * vg
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  std::size_t usable = 0;
  for (const auto& pt : curve) {
    if (!(pt.p_hat > 0.0) || !(pt.p_hat < 1.0)) continue;
    const double w = static_cast<double>(pt.n_windows);
    const double y = std::log(-std::log(pt.p_hat));
    sw += w;
    swx += w * pt.vg;
    swy += w * y;
    swxx += w * pt.vg * pt.vg;
    swxy += w * pt.vg * y;
    ++usable;
  }
  if (usable < 3)
    throw std::invalid_argument("fit_gompertz: fewer than 3 usable points");
  const double det = sw * swxx - swx * swx;
  if (det == 0.0 || !std::isfinite(det))
    throw std::invalid_argument("fit_gompertz: degenerate curve");
  const double slope = (sw * swxy - swx * swy) / det;
  const double intercept = (swy - slope * swx) / sw;
  GompertzFit fit;
  fit.alpha = -slope;
  fit.kappa = std::exp(intercept);
  if (!(fit.alpha > 0.0) || !std::isfinite(fit.kappa))
    throw std::invalid_argument("fit_gompertz: degenerate curve");
  return fit;
}

}  // namespace paoa
