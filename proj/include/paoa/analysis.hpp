#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "paoa/pcircuit.hpp"

namespace paoa {

// Log-geometric schedule with quadratic curvature:
// log beta_k = log_beta0 + g_k*(log_betaf - log_beta0) + c*g_k*(1-g_k),
// g_k = k/(p-1).
struct ScheduleModel {
  double log_beta0 = 0.0;
  double log_betaf = 0.0;
  double c = 0.0;
};

struct MetricPoint {
  int depth = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long n_samples = 0;
};

// (mean_e - e_sol) / n
double residual_energy(double mean_e, double e_sol, int n);

// mean_e / e_sol; requires e_sol < 0
double approx_ratio(double mean_e, double e_sol);

// Percentile bootstrap of the mean.
std::pair<double, double> bootstrap_ci(std::span<const double> values,
                                       int n_resamples, double level,
                                       std::uint64_t seed);

// Least-squares curvature fit: beta0/betaf pinned at the endpoints,
// c* = <g, r>/<g, g> with g_k = gamma_k(1-gamma_k) and
// r_k = ln beta_k - ln beta0 - gamma_k ln(betaf/beta0).
ScheduleModel fit_schedule_model(std::span<const double> schedule);

// Residual sum of squares of the fit at curvature model.c.
double schedule_fit_residual(const ScheduleModel& model,
                             std::span<const double> schedule);

std::vector<double> extrapolate_schedule(const ScheduleModel& model,
                                         int p_target);

struct SolvedInstance {
  IsingInstance instance;
  double e_sol = 0.0;
};

enum class CiGrouping { PooledRuns, PerInstance };

struct MetricCurvePoint {
  int depth = 0;
  double mean_energy = 0.0;    // averaged over instances
  double residual = 0.0;
  MetricPoint ratio;           // approximation ratio with bootstrap CI
  long n_runs = 0;
  int n_instances = 0;
};

// Runs inference at every depth in schedules_by_depth on each solved
// instance and aggregates residual energy and approximation ratio.
std::vector<MetricCurvePoint> metric_curve(
    std::span<const SolvedInstance> instances,
    const std::map<int, TwoSchedule>& schedules_by_depth,
    const Activation& activation, const CalibratedArray* emulator,
    int runs_per_instance, std::uint64_t seed, CiGrouping grouping,
    int n_resamples, int workers);

}  // namespace paoa
