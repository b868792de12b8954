#include "paoa/array_emulator.hpp"

#include <cmath>
#include <stdexcept>

namespace paoa {

void ArrayModel::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("ArrayModel: empty grid");
  if (pixels.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("ArrayModel: pixel count mismatch");
  if (!(t_int > 0.0)) throw std::invalid_argument("ArrayModel: t_int <= 0");
  for (const auto& px : pixels)
    if (!(px.alpha > 0.0) || !(px.kappa_ref > 0.0))
      throw std::invalid_argument("ArrayModel: invalid pixel parameters");
}

void CalibratedArray::validate() const {
  array.validate();
  if (cal.size() != array.pixels.size())
    throw std::invalid_argument("CalibratedArray: calibration table size mismatch");
}

namespace {

// Lognormal with given mean and relative (arithmetic) sigma; rel_sigma 0
// degenerates to the mean.
double draw_lognormal(double mean, double rel_sigma, Rng& rng) {
  if (rel_sigma == 0.0) return mean;
  const double cv2 = rel_sigma * rel_sigma;
  const double sigma2 = std::log1p(cv2);
  const double mu = std::log(mean) - 0.5 * sigma2;
  return std::exp(mu + std::sqrt(sigma2) * rng.normal());
}

}  // namespace

ArrayModel synthesize_array(const VariabilitySpec& spec, int rows, int cols,
                            std::uint64_t seed) {
  if (!(spec.alpha_mean > 0.0) || !(spec.kappa_mean > 0.0) ||
      spec.alpha_rel_sigma < 0.0 || spec.kappa_rel_sigma < 0.0)
    throw std::invalid_argument("synthesize_array: invalid variability spec");
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("synthesize_array: empty grid");
  ArrayModel array;
  array.rows = rows;
  array.cols = cols;
  array.seed = seed;
  array.pixels.resize(static_cast<std::size_t>(rows) * cols);
  Rng rng(derive_seed(seed, 0x41525241 /* "ARRA" */));
  for (auto& px : array.pixels) {
    px.alpha = draw_lognormal(spec.alpha_mean, spec.alpha_rel_sigma, rng);
    px.kappa_ref = draw_lognormal(spec.kappa_mean, spec.kappa_rel_sigma, rng);
    px.zeta = spec.zeta;
  }
  return array;
}

double pixel_kappa(const ArrayModel& array, int pixel, double d_theta) {
  const PixelModel& px = array.pixels.at(pixel);
  return px.kappa_ref * clamped_exp(px.zeta * d_theta);
}

double pixel_prob_one(const ArrayModel& array, int pixel, double vg,
                      double d_theta) {
  const PixelModel& px = array.pixels.at(pixel);
  return prob_one(px.alpha, pixel_kappa(array, pixel, d_theta), vg);
}

std::vector<SweepPoint> sweep_activation(const ArrayModel& array, int pixel,
                                         std::span<const double> vg_grid,
                                         long n_windows, Rng& rng) {
  if (n_windows < 1) throw std::invalid_argument("sweep_activation: n_windows < 1");
  std::vector<SweepPoint> curve;
  curve.reserve(vg_grid.size());
  for (double vg : vg_grid) {
    const double p = pixel_prob_one(array, pixel, vg);
    long ones = 0;
    for (long w = 0; w < n_windows; ++w)
      if (rng.uniform_unit() < p) ++ones;
    curve.push_back({vg, static_cast<double>(ones) / n_windows, n_windows});
  }
  return curve;
}

PixelCalibration calibrate_pixel(std::span<const SweepPoint> curve) {
  const GompertzFit fit = fit_gompertz(curve);
  PixelCalibration cal;
  cal.fitted_alpha = fit.alpha;
  cal.fitted_kappa = fit.kappa;
  cal.v_bias = std::log(fit.kappa / std::log(2.0)) / fit.alpha;
  cal.gain_k = slope_gain(fit.alpha);
  return cal;
}

CalibratedArray calibrate_array(const ArrayModel& array,
                                std::span<const double> vg_grid,
                                long n_windows, std::uint64_t seed) {
  array.validate();
  CalibratedArray ca;
  ca.array = array;
  ca.cal.resize(array.pixels.size());
  for (int px = 0; px < array.size(); ++px) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(px)));
    const auto curve = sweep_activation(array, px, vg_grid, n_windows, rng);
    ca.cal[px] = calibrate_pixel(curve);
  }
  return ca;
}

CalibratedArray calibrate_array_exact(const ArrayModel& array,
                                      std::span<const double> vg_grid) {
  array.validate();
  CalibratedArray ca;
  ca.array = array;
  ca.cal.resize(array.pixels.size());
  std::vector<SweepPoint> curve(vg_grid.size());
  for (int px = 0; px < array.size(); ++px) {
    for (std::size_t k = 0; k < vg_grid.size(); ++k)
      curve[k] = {vg_grid[k], pixel_prob_one(array, px, vg_grid[k]), 1};
    ca.cal[px] = calibrate_pixel(curve);
  }
  return ca;
}

PixelCalibration compensate_drift(const PixelCalibration& cal,
                                  const PixelModel& pixel, double d_theta) {
  PixelCalibration out = cal;
  out.v_bias += pixel.zeta / pixel.alpha * d_theta;
  return out;
}

int sample_bit(const CalibratedArray& ca, int pixel, double input_i, Rng& rng,
               double d_theta) {
  if (pixel < 0 || pixel >= ca.array.size() ||
      ca.cal.at(pixel).gain_k == 0.0)
    throw std::invalid_argument("sample_bit: uncalibrated pixel");
  const PixelCalibration& cal = ca.cal[pixel];
  const double vg = cal.v_bias + cal.gain_k * input_i;
  const double p = pixel_prob_one(ca.array, pixel, vg, d_theta);
  return rng.uniform_unit() < p ? 1 : -1;
}

}  // namespace paoa
