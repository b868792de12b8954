#include "paoa/pcircuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace paoa {

TwoSchedule TwoSchedule::constant(int p, double beta) {
  TwoSchedule s;
  s.beta1.assign(p, beta);
  s.beta2.assign(p, beta);
  return s;
}

void TwoSchedule::validate() const {
  if (beta1.empty() || beta1.size() != beta2.size())
    throw std::invalid_argument("TwoSchedule: schedule lengths must match and be >= 1");
  for (std::size_t k = 0; k < beta1.size(); ++k)
    if (!(beta1[k] >= 0.0) || !(beta2[k] >= 0.0) ||
        !std::isfinite(beta1[k]) || !std::isfinite(beta2[k]))
      throw std::invalid_argument("TwoSchedule: entries must be finite and >= 0");
}

void PCircuitConfig::validate(const IsingInstance& instance) const {
  if (instance.n != n)
    throw std::invalid_argument("PCircuitConfig: instance size mismatch");
  if (p < 1) throw std::invalid_argument("PCircuitConfig: p < 1");
  if (!update_order.empty()) {
    if (update_order.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("PCircuitConfig: update order length mismatch");
    std::vector<char> seen(n, 0);
    for (int i : update_order) {
      if (i < 0 || i >= n || seen[i])
        throw std::invalid_argument("PCircuitConfig: update order is not a permutation");
      seen[i] = 1;
    }
  }
  if (emulator) {
    emulator->validate();
    if (pixel_offset < 0 || pixel_offset + n > emulator->array.size())
      throw std::invalid_argument("PCircuitConfig: pixel assignment out of range");
  }
}

double local_field(const SpinState& state, const IsingInstance& instance, int i) {
  if (i < 0 || i >= instance.n || state.n() != instance.n)
    throw std::invalid_argument("local_field: bad index or dimension");
  const double* row = instance.j.data() + static_cast<std::size_t>(i) * instance.n;
  double acc = instance.h[i];
  for (int b = 0; b < instance.n; ++b) acc += row[b] * state.s[b];
  return acc;
}

void update_pbit(SpinState& state, const IsingInstance& instance, int i,
                 double beta, const Activation& activation, Rng& rng) {
  if (beta < 0.0) throw std::invalid_argument("update_pbit: beta < 0");
  const double f = activation(beta * local_field(state, instance, i));
  state.s[i] = (f - rng.uniform_sym()) >= 0.0 ? 1 : -1;
}

double beta_for_spin(const TwoSchedule& schedule, int layer, int spin, int n) {
  if (layer < 0 || layer >= schedule.depth())
    throw std::invalid_argument("beta_for_spin: layer out of range");
  const int half = (n + 1) / 2;  // schedule 1 covers spins 0..ceil(n/2)-1
  return spin < half ? schedule.beta1[layer] : schedule.beta2[layer];
}

namespace {

// Hot path shared by run_paoa_circuit and sample_batch: spins as doubles,
// one uniform draw per init/update.
void forward_pass(const IsingInstance& instance, const TwoSchedule& schedule,
                  const PCircuitConfig& config, Rng& rng, std::vector<double>& s) {
  const int n = instance.n;
  const int half = (n + 1) / 2;
  s.resize(n);
  for (int i = 0; i < n; ++i) s[i] = rng.uniform_sym() < 0.0 ? -1.0 : 1.0;

  const bool tanh_act = config.activation.kind == Activation::Kind::SymmetricTanh;
  const double a = config.activation.alpha;
  const double k = config.activation.kappa;
  const double* j = instance.j.data();
  const double* h = instance.h.data();
  const int* order = config.update_order.empty() ? nullptr : config.update_order.data();

  for (int layer = 0; layer < config.p; ++layer) {
    const double b1 = schedule.beta1[layer];
    const double b2 = schedule.beta2[layer];
    for (int idx = 0; idx < n; ++idx) {
      const int i = order ? order[idx] : idx;
      const double beta = i < half ? b1 : b2;
      const double* row = j + static_cast<std::size_t>(i) * n;
      double field = h[i];
      for (int b = 0; b < n; ++b) field += row[b] * s[b];
      const double x = beta * field;
      double fmid;  // 2*Pr{+1} - 1
      if (config.emulator) {
        const int px = config.pixel_offset + i;
        const PixelCalibration& cal = config.emulator->cal[px];
        const PixelModel& pm = config.emulator->array.pixels[px];
        const double vg = cal.v_bias + cal.gain_k * x;
        fmid = 2.0 * prob_one(pm.alpha, pm.kappa_ref, vg) - 1.0;
      } else if (tanh_act) {
        fmid = std::tanh(x);
      } else {
        fmid = 2.0 * prob_one(a, k, x) - 1.0;
      }
      s[i] = (fmid - rng.uniform_sym()) >= 0.0 ? 1.0 : -1.0;
    }
  }
}

SpinState to_spin_state(const std::vector<double>& s) {
  SpinState st;
  st.s.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) st.s[i] = s[i] > 0 ? 1 : -1;
  return st;
}

}  // namespace

SpinState run_paoa_circuit(const IsingInstance& instance,
                           const TwoSchedule& schedule,
                           const PCircuitConfig& config, Rng& rng) {
  schedule.validate();
  config.validate(instance);
  if (schedule.depth() != config.p)
    throw std::invalid_argument("run_paoa_circuit: schedule depth mismatch");
  std::vector<double> s;
  forward_pass(instance, schedule, config, rng, s);
  return to_spin_state(s);
}

RunBatch sample_batch(const IsingInstance& instance, const TwoSchedule& schedule,
                      const PCircuitConfig& config, int n_runs,
                      std::uint64_t base_seed, int workers) {
  schedule.validate();
  config.validate(instance);
  if (schedule.depth() != config.p)
    throw std::invalid_argument("sample_batch: schedule depth mismatch");
  if (n_runs < 1) throw std::invalid_argument("sample_batch: n_runs < 1");

  RunBatch batch;
  batch.seed = base_seed;
  batch.states.resize(n_runs);
  batch.energies.resize(n_runs);

  auto run_range = [&](int lo, int hi) {
    std::vector<double> s;
    for (int r = lo; r < hi; ++r) {
      Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(r)));
      forward_pass(instance, schedule, config, rng, s);
      batch.states[r] = to_spin_state(s);
      batch.energies[r] = energy(instance, batch.states[r]);
    }
  };

  const int nw = std::clamp(workers, 1, n_runs);
  if (nw == 1) {
    run_range(0, n_runs);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) {
      const int lo = static_cast<int>(static_cast<long>(n_runs) * w / nw);
      const int hi = static_cast<int>(static_cast<long>(n_runs) * (w + 1) / nw);
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return batch;
}

std::vector<SpinState> run_equilibrium(const IsingInstance& instance,
                                       double beta, long n_sweeps, long burn_in,
                                       Rng& rng) {
  instance.validate();
  if (beta < 0.0) throw std::invalid_argument("run_equilibrium: beta < 0");
  const int n = instance.n;
  const double scale = beta / std::sqrt(static_cast<double>(n));
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.uniform_sym() < 0.0 ? -1.0 : 1.0;
  std::vector<SpinState> samples;
  if (n_sweeps > burn_in) samples.reserve(n_sweeps - burn_in);
  for (long sweep = 0; sweep < n_sweeps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      const double* row = instance.j.data() + static_cast<std::size_t>(i) * n;
      double field = instance.h[i];
      for (int b = 0; b < n; ++b) field += row[b] * s[b];
      const double f = std::tanh(scale * field);
      s[i] = (f - rng.uniform_sym()) >= 0.0 ? 1.0 : -1.0;
    }
    if (sweep >= burn_in) samples.push_back(to_spin_state(s));
  }
  return samples;
}

void CouplingAnsatz::validate() const {
  if (n < 1 || j_layers.empty())
    throw std::invalid_argument("CouplingAnsatz: empty ansatz");
  for (const auto& layer : j_layers) {
    if (layer.size() != static_cast<std::size_t>(n) * n)
      throw std::invalid_argument("CouplingAnsatz: layer size mismatch");
    for (int a = 0; a < n; ++a) {
      if (layer[static_cast<std::size_t>(a) * n + a] != 0.0)
        throw std::invalid_argument("CouplingAnsatz: nonzero diagonal");
      for (int b = a + 1; b < n; ++b)
        if (layer[static_cast<std::size_t>(a) * n + b] !=
            layer[static_cast<std::size_t>(b) * n + a])
          throw std::invalid_argument("CouplingAnsatz: asymmetric layer");
    }
  }
}

SpinState run_coupling_circuit(const CouplingAnsatz& ansatz,
                               const Activation& activation, Rng& rng) {
  const int n = ansatz.n;
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.uniform_sym() < 0.0 ? -1.0 : 1.0;
  const bool tanh_act = activation.kind == Activation::Kind::SymmetricTanh;
  for (const auto& layer : ansatz.j_layers) {
    const double* j = layer.data();
    for (int i = 0; i < n; ++i) {
      const double* row = j + static_cast<std::size_t>(i) * n;
      double field = 0.0;
      for (int b = 0; b < n; ++b) field += row[b] * s[b];
      const double f = tanh_act
                           ? std::tanh(field)
                           : 2.0 * prob_one(activation.alpha, activation.kappa, field) - 1.0;
      s[i] = (f - rng.uniform_sym()) >= 0.0 ? 1.0 : -1.0;
    }
  }
  return to_spin_state(s);
}

std::vector<long> sample_coupling_histogram(const CouplingAnsatz& ansatz,
                                            const Activation& activation,
                                            long n_runs, std::uint64_t base_seed,
                                            int workers) {
  ansatz.validate();
  if (n_runs < 1) throw std::invalid_argument("sample_coupling_histogram: n_runs < 1");
  const int n = ansatz.n;
  const std::size_t n_states = 1ULL << n;

  auto run_range = [&](long lo, long hi, std::vector<long>& hist) {
    hist.assign(n_states, 0);
    for (long r = lo; r < hi; ++r) {
      Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(r)));
      const SpinState st = run_coupling_circuit(ansatz, activation, rng);
      std::size_t idx = 0;
      for (int i = 0; i < n; ++i) idx = (idx << 1) | (st.s[i] > 0 ? 1u : 0u);
      ++hist[idx];
    }
  };

  const int nw = static_cast<int>(std::clamp<long>(workers, 1, n_runs));
  std::vector<std::vector<long>> partial(nw);
  if (nw == 1) {
    run_range(0, n_runs, partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) {
      const long lo = n_runs * w / nw;
      const long hi = n_runs * (w + 1) / nw;
      pool.emplace_back(run_range, lo, hi, std::ref(partial[w]));
    }
    for (auto& t : pool) t.join();
  }
  std::vector<long> hist(n_states, 0);
  for (const auto& part : partial)
    for (std::size_t i = 0; i < n_states; ++i) hist[i] += part[i];
  return hist;
}

}  // namespace paoa
