#include "paoa/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace paoa {

void OptimizerConfig::validate() const {
  if (max_iterations < 0) throw std::invalid_argument("OptimizerConfig: max_iterations < 0");
  if (!(eps_step > 0.0)) throw std::invalid_argument("OptimizerConfig: eps_step <= 0");
  if (!(initial_step > eps_step))
    throw std::invalid_argument("OptimizerConfig: eps_step must be < initial_step");
  if (runs_per_eval < 1) throw std::invalid_argument("OptimizerConfig: runs_per_eval < 1");
}

namespace {

// Solve the m x m system D g = r by Gaussian elimination with partial
// pivoting; returns false when (near-)singular.
bool solve_linear(std::vector<double> d, std::vector<double> r, int m,
                  std::vector<double>& g) {
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int row = col + 1; row < m; ++row)
      if (std::abs(d[row * m + col]) > std::abs(d[piv * m + col])) piv = row;
    if (std::abs(d[piv * m + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < m; ++c) std::swap(d[col * m + c], d[piv * m + c]);
      std::swap(r[col], r[piv]);
    }
    for (int row = col + 1; row < m; ++row) {
      const double fac = d[row * m + col] / d[col * m + col];
      for (int c = col; c < m; ++c) d[row * m + c] -= fac * d[col * m + c];
      r[row] -= fac * r[col];
    }
  }
  g.assign(m, 0.0);
  for (int row = m - 1; row >= 0; --row) {
    double acc = r[row];
    for (int c = row + 1; c < m; ++c) acc -= d[row * m + c] * g[c];
    g[row] = acc / d[row * m + row];
  }
  return std::all_of(g.begin(), g.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

MinimizeResult minimize(const CostFn& cost, std::span<const double> x0,
                        const OptimizerConfig& config,
                        std::span<const double> lower,
                        std::span<const double> upper) {
  config.validate();
  const int m = static_cast<int>(x0.size());
  if (m == 0) throw std::invalid_argument("minimize: empty parameter vector");
  if (!lower.empty() && lower.size() != x0.size())
    throw std::invalid_argument("minimize: lower bound size mismatch");
  if (!upper.empty() && upper.size() != x0.size())
    throw std::invalid_argument("minimize: upper bound size mismatch");

  auto clamp = [&](std::vector<double> x) {
    for (int i = 0; i < m; ++i) {
      if (!lower.empty()) x[i] = std::max(x[i], lower[i]);
      if (!upper.empty()) x[i] = std::min(x[i], upper[i]);
    }
    return x;
  };

  MinimizeResult res;
  int evals = 0;
  int iteration = 0;
  auto evaluate = [&](const std::vector<double>& x) {
    ++evals;
    return cost(x);
  };

  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  pts.push_back(clamp({x0.begin(), x0.end()}));
  vals.push_back(evaluate(pts[0]));
  res.trace.push_back({0, 1, vals[0]});

  auto best_index = [&]() {
    return static_cast<int>(std::min_element(vals.begin(), vals.end()) -
                            vals.begin());
  };
  auto finish = [&](Termination why) {
    const int b = best_index();
    res.x = pts[b];
    res.cost = vals[b];
    res.evaluations_used = evals;
    res.reason = why;
    return res;
  };

  if (config.max_iterations <= 1) return finish(Termination::MaxIterations);

  // Initial interpolation set: x0 plus coordinate steps of initial_step.
  for (int i = 0; i < m; ++i) {
    std::vector<double> p = pts[0];
    p[i] += config.initial_step;
    p = clamp(std::move(p));
    pts.push_back(p);
    vals.push_back(evaluate(p));
    if (evals >= config.max_iterations) return finish(Termination::MaxIterations);
  }

  double delta = config.initial_step;
  std::vector<double> d(static_cast<std::size_t>(m) * m), r(m), g;

  while (true) {
    if (delta < config.eps_step) return finish(Termination::StepTolerance);
    if (evals >= config.max_iterations) return finish(Termination::MaxIterations);
    ++iteration;

    const int b = best_index();
    const std::vector<double>& xb = pts[b];
    const double fb = vals[b];

    int row = 0;
    for (int i = 0; i < m + 1; ++i) {
      if (i == b) continue;
      for (int c = 0; c < m; ++c) d[row * m + c] = pts[i][c] - xb[c];
      r[row] = vals[i] - fb;
      ++row;
    }

    int far = b == 0 ? 1 : 0;
    double far_dist = 0.0;
    for (int i = 0; i < m + 1; ++i) {
      if (i == b) continue;
      double dist2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double dd = pts[i][c] - xb[c];
        dist2 += dd * dd;
      }
      if (dist2 >= far_dist) {
        far_dist = dist2;
        far = i;
      }
    }
    far_dist = std::sqrt(far_dist);

    double gnorm = 0.0;
    const bool ok = solve_linear(d, r, m, g);
    if (ok)
      gnorm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    if (!ok || gnorm < 1e-300) {
      delta *= 0.5;  // flat or degenerate model: contract
      continue;
    }

    std::vector<double> xn(m);
    for (int c = 0; c < m; ++c) xn[c] = xb[c] - delta * g[c] / gnorm;
    xn = clamp(std::move(xn));
    const double fn = evaluate(xn);
    const double pred = delta * gnorm;
    const double rho = (fb - fn) / pred;

    // The trial point always replaces the farthest interpolation point;
    // radius grows on strong agreement, shrinks on failed steps taken
    // from an already-tight simplex.
    pts[far] = std::move(xn);
    vals[far] = fn;
    if (fn < fb) {
      if (rho > 0.7 && far_dist <= 3.0 * delta) delta *= 1.4;
    } else if (far_dist <= 2.0 * delta) {
      delta *= 0.5;
    }
    res.trace.push_back({iteration, evals, vals[best_index()]});
  }
}

double avg_energy_cost(const RunBatch& batch) {
  if (batch.energies.empty())
    throw std::invalid_argument("avg_energy_cost: empty batch");
  return std::accumulate(batch.energies.begin(), batch.energies.end(), 0.0) /
         static_cast<double>(batch.energies.size());
}

double cross_entropy_cost(std::span<const long> counts,
                          std::span<const double> target, double epsilon) {
  if (counts.size() != target.size())
    throw std::invalid_argument("cross_entropy_cost: size mismatch");
  if (!(epsilon > 0.0)) throw std::invalid_argument("cross_entropy_cost: epsilon <= 0");
  double total = 0.0;
  for (long c : counts) {
    if (c < 0) throw std::invalid_argument("cross_entropy_cost: negative count");
    total += static_cast<double>(c);
  }
  const double denom = total + epsilon * static_cast<double>(counts.size());
  double cost = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (target[i] == 0.0) continue;
    const double q = (static_cast<double>(counts[i]) + epsilon) / denom;
    cost -= target[i] * std::log(q);
  }
  return cost;
}

double kl_divergence(std::span<const double> p_emp,
                     std::span<const double> q_target, double epsilon) {
  if (p_emp.size() != q_target.size())
    throw std::invalid_argument("kl_divergence: size mismatch");
  if (!(epsilon > 0.0)) throw std::invalid_argument("kl_divergence: epsilon <= 0");
  const double k = static_cast<double>(p_emp.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < p_emp.size(); ++i) {
    const double p = (p_emp[i] + epsilon) / (1.0 + epsilon * k);
    const double q = (q_target[i] + epsilon) / (1.0 + epsilon * k);
    kl += p * std::log(p / q);
  }
  return kl;
}

std::vector<double> flatten_schedule(const TwoSchedule& schedule) {
  std::vector<double> x = schedule.beta1;
  x.insert(x.end(), schedule.beta2.begin(), schedule.beta2.end());
  return x;
}

TwoSchedule unflatten_schedule(std::span<const double> x) {
  if (x.empty() || x.size() % 2 != 0)
    throw std::invalid_argument("unflatten_schedule: need an even-length vector");
  const std::size_t p = x.size() / 2;
  TwoSchedule s;
  s.beta1.assign(x.begin(), x.begin() + p);
  s.beta2.assign(x.begin() + p, x.end());
  return s;
}

ScheduleTrainingResult train_instance(const IsingInstance& instance, int p,
                                      const Activation& activation,
                                      const OptimizerConfig& config,
                                      int workers) {
  if (p < 1) throw std::invalid_argument("train_instance: p < 1");
  config.validate();
  PCircuitConfig circuit;
  circuit.n = instance.n;
  circuit.p = p;
  circuit.activation = activation;

  auto cost = [&](std::span<const double> x) {
    const TwoSchedule sched = unflatten_schedule(x);
    const RunBatch batch = sample_batch(instance, sched, circuit,
                                        config.runs_per_eval, config.cost_seed,
                                        workers);
    return avg_energy_cost(batch);
  };

  const std::vector<double> x0(2 * static_cast<std::size_t>(p), 1.0);
  const std::vector<double> lo(x0.size(), 0.0);
  const std::vector<double> hi(x0.size(), kBetaMax);
  MinimizeResult opt = minimize(cost, x0, config, lo, hi);
  ScheduleTrainingResult out;
  out.schedule = unflatten_schedule(opt.x);
  out.opt = std::move(opt);
  return out;
}

TwoSchedule average_schedules(std::span<const TwoSchedule> schedules) {
  if (schedules.empty())
    throw std::invalid_argument("average_schedules: empty list");
  const int p = schedules[0].depth();
  TwoSchedule mean = TwoSchedule::constant(p, 0.0);
  for (const auto& s : schedules) {
    if (s.depth() != p)
      throw std::invalid_argument("average_schedules: depth mismatch");
    for (int k = 0; k < p; ++k) {
      mean.beta1[k] += s.beta1[k];
      mean.beta2[k] += s.beta2[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(schedules.size());
  for (int k = 0; k < p; ++k) {
    mean.beta1[k] *= inv;
    mean.beta2[k] *= inv;
  }
  return mean;
}

std::vector<double> flatten_ansatz(const CouplingAnsatz& ansatz) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(ansatz.depth()) * ansatz.n * (ansatz.n - 1) / 2);
  for (const auto& layer : ansatz.j_layers)
    for (int a = 0; a < ansatz.n; ++a)
      for (int b = a + 1; b < ansatz.n; ++b)
        x.push_back(layer[static_cast<std::size_t>(a) * ansatz.n + b]);
  return x;
}

CouplingAnsatz unflatten_ansatz(std::span<const double> x, int n, int p) {
  const std::size_t per_layer = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (x.size() != per_layer * p)
    throw std::invalid_argument("unflatten_ansatz: size mismatch");
  CouplingAnsatz ansatz;
  ansatz.n = n;
  ansatz.j_layers.assign(p, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
  std::size_t t = 0;
  for (int k = 0; k < p; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        ansatz.j_layers[k][static_cast<std::size_t>(a) * n + b] = x[t];
        ansatz.j_layers[k][static_cast<std::size_t>(b) * n + a] = x[t];
        ++t;
      }
  return ansatz;
}

MajorityTrainingResult train_majority(int p, const Activation& activation,
                                      const OptimizerConfig& config,
                                      int workers, double epsilon) {
  if (p < 1) throw std::invalid_argument("train_majority: p < 1");
  config.validate();
  const auto target = majority_target_distribution();

  auto cost = [&](std::span<const double> x) {
    const CouplingAnsatz ansatz = unflatten_ansatz(x, 4, p);
    const auto counts = sample_coupling_histogram(ansatz, activation,
                                                  config.runs_per_eval,
                                                  config.cost_seed, workers);
    return cross_entropy_cost(counts, target, epsilon);
  };

  const std::vector<double> x0(static_cast<std::size_t>(6) * p, 0.1);
  const std::vector<double> lo(x0.size(), -20.0);
  const std::vector<double> hi(x0.size(), 20.0);
  MinimizeResult opt = minimize(cost, x0, config, lo, hi);
  MajorityTrainingResult out;
  out.ansatz = unflatten_ansatz(opt.x, 4, p);
  out.opt = std::move(opt);
  return out;
}

}  // namespace paoa
