#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "paoa/pcircuit.hpp"

namespace paoa {

struct OptimizerConfig {
  int max_iterations = 300;    // cost-evaluation budget
  double eps_step = 1e-4;      // trust-radius stopping threshold
  double initial_step = 0.5;   // initial trust radius
  std::uint64_t cost_seed = 0; // common-random-numbers seed per evaluation
  int runs_per_eval = 10000;

  void validate() const;
};

enum class Termination { StepTolerance, MaxIterations };

struct TracePoint {
  int iteration = 0;
  int evaluations = 0;
  double cost = 0.0;  // best seen so far
};

struct MinimizeResult {
  std::vector<double> x;
  double cost = 0.0;
  std::vector<TracePoint> trace;
  int evaluations_used = 0;
  Termination reason = Termination::MaxIterations;
};

using CostFn = std::function<double(std::span<const double>)>;

// Derivative-free descent with a linear interpolation model over m+1 points
// and a shrinking trust region. Stops when the radius drops below eps_step
// or the evaluation budget is spent; returns the best point seen.
MinimizeResult minimize(const CostFn& cost, std::span<const double> x0,
                        const OptimizerConfig& config,
                        std::span<const double> lower = {},
                        std::span<const double> upper = {});

double avg_energy_cost(const RunBatch& batch);

// -sum_x target(x) * ln q(x), q(x) = (count(x)+eps)/(total+eps*K).
double cross_entropy_cost(std::span<const long> counts,
                          std::span<const double> target, double epsilon);

// KL(p || q) after smoothing both to full support:
// p'(x) = (p(x)+eps)/(1+eps*K), likewise q.
double kl_divergence(std::span<const double> p_emp,
                     std::span<const double> q_target, double epsilon);

// Beta parameters are clamped to [0, kBetaMax] during optimization.
inline constexpr double kBetaMax = 50.0;

struct ScheduleTrainingResult {
  TwoSchedule schedule;
  MinimizeResult opt;
};

// Optimizes the flattened 2p-vector [beta1(1..p), beta2(1..p)] against the
// mean sampled energy, with a fixed sampling seed per evaluation.
ScheduleTrainingResult train_instance(const IsingInstance& instance, int p,
                                      const Activation& activation,
                                      const OptimizerConfig& config,
                                      int workers = 1);

TwoSchedule average_schedules(std::span<const TwoSchedule> schedules);

struct MajorityTrainingResult {
  CouplingAnsatz ansatz;
  MinimizeResult opt;
};

// Optimizes 6p per-layer couplings of the 4-node majority gate against the
// smoothed cross-entropy to the uniform-over-truth-set target.
MajorityTrainingResult train_majority(int p, const Activation& activation,
                                      const OptimizerConfig& config,
                                      int workers = 1, double epsilon = 0.5);

// Flattening helpers shared by training and serialization.
std::vector<double> flatten_schedule(const TwoSchedule& schedule);
TwoSchedule unflatten_schedule(std::span<const double> x);
std::vector<double> flatten_ansatz(const CouplingAnsatz& ansatz);
CouplingAnsatz unflatten_ansatz(std::span<const double> x, int n, int p);

}  // namespace paoa
