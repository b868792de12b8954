#pragma once

#include <cstdint>
#include <vector>

#include "paoa/array_emulator.hpp"
#include "paoa/device_model.hpp"
#include "paoa/problems.hpp"
#include "paoa/rng.hpp"

namespace paoa {

// Per-layer inverse-temperature pair; the 2p variational parameters.
// Schedule 1 drives spins 0..ceil(n/2)-1, schedule 2 the rest.
struct TwoSchedule {
  std::vector<double> beta1;
  std::vector<double> beta2;

  int depth() const { return static_cast<int>(beta1.size()); }
  static TwoSchedule constant(int p, double beta);
  void validate() const;
};

struct PCircuitConfig {
  int n = 0;
  int p = 1;
  std::vector<int> update_order;  // empty => identity
  Activation activation;
  // Non-null switches sampling to the emulator backend; spin i maps to
  // pixel pixel_offset + i (row-major).
  const CalibratedArray* emulator = nullptr;
  int pixel_offset = 0;

  void validate(const IsingInstance& instance) const;
};

struct RunBatch {
  std::vector<SpinState> states;
  std::vector<double> energies;
  std::uint64_t seed = 0;
};

// I_i = sum_j J_ij s_j + h_i
double local_field(const SpinState& state, const IsingInstance& instance, int i);

// s_i <- sgn[f(beta * I_i) - u], u uniform on [-1, 1). One draw.
void update_pbit(SpinState& state, const IsingInstance& instance, int i,
                 double beta, const Activation& activation, Rng& rng);

double beta_for_spin(const TwoSchedule& schedule, int layer, int spin, int n);

// One PAOA forward pass: random init (n draws), then p sequential layers
// (n draws each); n*(p+1) draws total.
SpinState run_paoa_circuit(const IsingInstance& instance,
                           const TwoSchedule& schedule,
                           const PCircuitConfig& config, Rng& rng);

// n_runs independent forward passes; run r uses derive_seed(base_seed, r),
// so the batch is invariant to worker count and completion order.
RunBatch sample_batch(const IsingInstance& instance, const TwoSchedule& schedule,
                      const PCircuitConfig& config, int n_runs,
                      std::uint64_t base_seed, int workers = 1);

// Sequential Glauber dynamics with tanh activation at fixed beta, targeting
// the Boltzmann distribution of the normalized energy: the update field is
// scaled by 1/sqrt(n) so that stationarity holds for exp(-beta * E).
// Records one state per sweep after burn_in.
std::vector<SpinState> run_equilibrium(const IsingInstance& instance,
                                       double beta, long n_sweeps, long burn_in,
                                       Rng& rng);

// Layered coupling ansatz (majority-gate experiments): each layer carries
// its own symmetric coupling matrix, applied at beta = 1.
struct CouplingAnsatz {
  int n = 4;
  std::vector<std::vector<double>> j_layers;  // p matrices, n*n row-major

  int depth() const { return static_cast<int>(j_layers.size()); }
  void validate() const;
};

SpinState run_coupling_circuit(const CouplingAnsatz& ansatz,
                               const Activation& activation, Rng& rng);

// Histogram over the 2^n states of n_runs final samples, bit i of the
// state index taken from spin i (spin 0 most significant).
std::vector<long> sample_coupling_histogram(const CouplingAnsatz& ansatz,
                                            const Activation& activation,
                                            long n_runs, std::uint64_t base_seed,
                                            int workers = 1);

}  // namespace paoa
