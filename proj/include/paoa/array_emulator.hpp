#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paoa/device_model.hpp"
#include "paoa/rng.hpp"

namespace paoa {

// One virtual pgSPAD pixel. kappa_ref is the Poisson exposure at the
// array's reference temperature and integration window.
struct PixelModel {
  double alpha = 1.4;
  double kappa_ref = 0.6931471805599453;
  double zeta = 0.05;
};

// Lognormal variability over (alpha, kappa); zeta fixed.
// A relative sigma of 0 collapses to the mean (degenerate distribution).
struct VariabilitySpec {
  double alpha_mean = 1.4;
  double alpha_rel_sigma = 0.10;
  double kappa_mean = 0.6931471805599453;
  double kappa_rel_sigma = 0.20;
  double zeta = 0.05;
};

struct ArrayModel {
  int rows = 64;
  int cols = 64;
  std::vector<PixelModel> pixels;  // row-major
  double theta = 25.0;             // reference/operating temperature [C]
  double t_int = 1e-3;
  std::uint64_t seed = 0;

  int size() const { return rows * cols; }
  void validate() const;
};

// Per-pixel operating point from a fitted sweep.
// v_bias = fitted v_mid; gain_k = e/(2*fitted_alpha).
struct PixelCalibration {
  double v_bias = 0.0;
  double gain_k = 0.0;
  double fitted_alpha = 0.0;
  double fitted_kappa = 0.0;
};

struct CalibratedArray {
  ArrayModel array;
  std::vector<PixelCalibration> cal;  // one per pixel

  void validate() const;
};

ArrayModel synthesize_array(const VariabilitySpec& spec, int rows, int cols,
                            std::uint64_t seed);

// Exposure of pixel `pixel` at temperature offset d_theta from reference.
double pixel_kappa(const ArrayModel& array, int pixel, double d_theta = 0.0);

// Closed-form Pr{m=1} of one pixel at gate voltage vg.
double pixel_prob_one(const ArrayModel& array, int pixel, double vg,
                      double d_theta = 0.0);

// Bernoulli sweep: for each grid voltage, fraction of n_windows with m=1.
std::vector<SweepPoint> sweep_activation(const ArrayModel& array, int pixel,
                                         std::span<const double> vg_grid,
                                         long n_windows, Rng& rng);

PixelCalibration calibrate_pixel(std::span<const SweepPoint> curve);

// Sweeps and fits every pixel. Per-pixel RNG streams are derived from
// `seed` by pixel index, so the result is independent of iteration order.
CalibratedArray calibrate_array(const ArrayModel& array,
                                std::span<const double> vg_grid,
                                long n_windows, std::uint64_t seed);

// Fits each pixel from its closed-form curve (no sampling noise); exact
// round-trip of the pixel parameters.
CalibratedArray calibrate_array_exact(const ArrayModel& array,
                                      std::span<const double> vg_grid);

// Software drift compensation: v_bias += (zeta/alpha) * d_theta.
PixelCalibration compensate_drift(const PixelCalibration& cal,
                                  const PixelModel& pixel, double d_theta);

// One window of pixel `pixel` driven at input_i: vg = v_bias + gain_k*input_i,
// m ~ Bernoulli(prob_one), returns 2m-1. Consumes exactly one draw.
int sample_bit(const CalibratedArray& ca, int pixel, double input_i, Rng& rng,
               double d_theta = 0.0);

}  // namespace paoa
