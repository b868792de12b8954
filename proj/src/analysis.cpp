#include "paoa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "paoa/rng.hpp"
#include "paoa/variational.hpp"

namespace paoa {

double residual_energy(double mean_e, double e_sol, int n) {
  if (n < 1) throw std::invalid_argument("residual_energy: n < 1");
  return (mean_e - e_sol) / static_cast<double>(n);
}

double approx_ratio(double mean_e, double e_sol) {
  if (!(e_sol < 0.0))
    throw std::invalid_argument("approx_ratio: e_sol must be negative");
  return mean_e / e_sol;
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double quantile(std::vector<double>& sorted, double q) {
  // linear interpolation between order statistics
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::pair<double, double> bootstrap_ci(std::span<const double> values,
                                       int n_resamples, double level,
                                       std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap_ci: empty input");
  if (n_resamples < 1) throw std::invalid_argument("bootstrap_ci: n_resamples < 1");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level must be in (0,1)");
  const std::size_t n = values.size();
  std::vector<double> means(n_resamples);
  for (int r = 0; r < n_resamples; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += values[rng.next_u64() % n];
    means[r] = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

ScheduleModel fit_schedule_model(std::span<const double> schedule) {
  const int p = static_cast<int>(schedule.size());
  if (p < 3) throw std::invalid_argument("fit_schedule_model: need p >= 3");
  for (double b : schedule)
    if (!(b > 0.0)) throw std::invalid_argument("fit_schedule_model: entries must be > 0");
  ScheduleModel model;
  model.log_beta0 = std::log(schedule.front());
  model.log_betaf = std::log(schedule.back());
  const double span_log = model.log_betaf - model.log_beta0;
  double gg = 0.0, gr = 0.0;
  for (int k = 0; k < p; ++k) {
    const double gamma = static_cast<double>(k) / static_cast<double>(p - 1);
    const double g = gamma * (1.0 - gamma);
    const double r = std::log(schedule[k]) - model.log_beta0 - gamma * span_log;
    gg += g * g;
    gr += g * r;
  }
  if (gg == 0.0) throw std::invalid_argument("fit_schedule_model: degenerate design");
  model.c = gr / gg;
  return model;
}

double schedule_fit_residual(const ScheduleModel& model,
                             std::span<const double> schedule) {
  const int p = static_cast<int>(schedule.size());
  double rss = 0.0;
  for (int k = 0; k < p; ++k) {
    const double gamma =
        p == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(p - 1);
    const double pred = model.log_beta0 +
                        gamma * (model.log_betaf - model.log_beta0) +
                        model.c * gamma * (1.0 - gamma);
    const double err = std::log(schedule[k]) - pred;
    rss += err * err;
  }
  return rss;
}

std::vector<double> extrapolate_schedule(const ScheduleModel& model,
                                         int p_target) {
  if (p_target < 1) throw std::invalid_argument("extrapolate_schedule: p_target < 1");
  std::vector<double> out(p_target);
  for (int k = 0; k < p_target; ++k) {
    // gamma_0 defined as 0 at p_target = 1
    const double gamma =
        p_target == 1 ? 0.0
                      : static_cast<double>(k) / static_cast<double>(p_target - 1);
    out[k] = std::exp(model.log_beta0 +
                      gamma * (model.log_betaf - model.log_beta0) +
                      model.c * gamma * (1.0 - gamma));
  }
  return out;
}

std::vector<MetricCurvePoint> metric_curve(
    std::span<const SolvedInstance> instances,
    const std::map<int, TwoSchedule>& schedules_by_depth,
    const Activation& activation, const CalibratedArray* emulator,
    int runs_per_instance, std::uint64_t seed, CiGrouping grouping,
    int n_resamples, int workers) {
  if (instances.empty()) throw std::invalid_argument("metric_curve: no instances");
  std::vector<MetricCurvePoint> curve;
  for (const auto& [depth, schedule] : schedules_by_depth) {
    MetricCurvePoint pt;
    pt.depth = depth;
    pt.n_instances = static_cast<int>(instances.size());

    std::vector<double> ratio_population;  // grouping-dependent
    double mean_energy_sum = 0.0;
    double residual_sum = 0.0;
    double ratio_sum = 0.0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto& solved = instances[k];
      PCircuitConfig config;
      config.n = solved.instance.n;
      config.p = depth;
      config.activation = activation;
      config.emulator = emulator;
      const std::uint64_t batch_seed =
          derive_seed(seed, (static_cast<std::uint64_t>(depth) << 32) | k);
      const RunBatch batch = sample_batch(solved.instance, schedule, config,
                                          runs_per_instance, batch_seed, workers);
      const double mean_e = avg_energy_cost(batch);
      mean_energy_sum += mean_e;
      residual_sum += residual_energy(mean_e, solved.e_sol, solved.instance.n);
      ratio_sum += approx_ratio(mean_e, solved.e_sol);
      pt.n_runs += static_cast<long>(batch.energies.size());
      if (grouping == CiGrouping::PooledRuns) {
        for (double e : batch.energies)
          ratio_population.push_back(approx_ratio(e, solved.e_sol));
      } else {
        ratio_population.push_back(approx_ratio(mean_e, solved.e_sol));
      }
    }
    const double inv = 1.0 / static_cast<double>(instances.size());
    pt.mean_energy = mean_energy_sum * inv;
    pt.residual = residual_sum * inv;
    pt.ratio.depth = depth;
    pt.ratio.mean = ratio_sum * inv;
    pt.ratio.n_samples = static_cast<long>(ratio_population.size());
    const auto [lo, hi] = bootstrap_ci(ratio_population, n_resamples, 0.95,
                                       derive_seed(seed, 0xb007u ^ depth));
    pt.ratio.ci_low = lo;
    pt.ratio.ci_high = hi;
    curve.push_back(std::move(pt));
  }
  return curve;
}

}  // namespace paoa
