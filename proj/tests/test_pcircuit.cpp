#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <map>
#include <vector>

#include "paoa/array_emulator.hpp"
#include "paoa/pcircuit.hpp"

using namespace paoa;

namespace {

const double kLn2 = std::log(2.0);

PCircuitConfig software_config(int n, int p, Activation act = Activation::tanh_kind()) {
  PCircuitConfig c;
  c.n = n;
  c.p = p;
  c.activation = act;
  return c;
}

std::size_t state_index(const SpinState& st) {
  std::size_t idx = 0;
  for (int8_t v : st.s) idx = (idx << 1) | (v > 0 ? 1u : 0u);
  return idx;
}

}  // namespace

TEST_CASE("local_field") {
  IsingInstance z;
  z.n = 3;
  z.j.assign(9, 0.0);
  z.h = {0.3, 0.0, -0.1};
  SpinState st;
  st.s = {1, 1, 1};
  CHECK(local_field(st, z, 0) == doctest::Approx(0.3));

  IsingInstance two;
  two.n = 2;
  two.j = {0.0, 1.0, 1.0, 0.0};
  two.h = {0.0, 0.0};
  SpinState pm;
  pm.s = {1, -1};
  CHECK(local_field(pm, two, 0) == doctest::Approx(-1.0));

  // brute-force re-summation oracle on a random instance
  const auto inst = gen_sk_instance(12, 5);
  Rng rng(6);
  SpinState rs;
  for (int i = 0; i < 12; ++i) rs.s.push_back(rng.uniform_unit() < 0.5 ? -1 : 1);
  for (int i = 0; i < 12; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 12; ++j) acc += inst.jat(i, j) * rs.s[j];
    CHECK(std::abs(local_field(rs, inst, i) - acc) < 1e-12);
  }

  CHECK_THROWS_AS(local_field(pm, two, 2), std::invalid_argument);
}

TEST_CASE("update_pbit probabilities") {
  IsingInstance two;
  two.n = 2;
  two.j = {0.0, 1.0, 1.0, 0.0};
  two.h = {0.0, 0.0};

  // beta = 0: fair coin
  Rng rng(1);
  long plus = 0;
  SpinState st;
  for (int t = 0; t < 100000; ++t) {
    st.s = {1, 1};
    update_pbit(st, two, 0, 0.0, Activation::tanh_kind(), rng);
    if (st.s[0] == 1) ++plus;
  }
  CHECK(static_cast<double>(plus) / 100000 == doctest::Approx(0.5).epsilon(0.02));

  // saturation
  Rng rng2(2);
  for (int t = 0; t < 100; ++t) {
    st.s = {1, 1};
    update_pbit(st, two, 0, 500.0, Activation::tanh_kind(), rng2);
    CHECK(st.s[0] == 1);
    CHECK(st.s[1] == 1);  // other spin untouched
  }

  // f(beta*I) = 0.4 => Pr{+1} = 0.7 within 3 sigma
  IsingInstance biased;
  biased.n = 1;
  biased.j = {0.0};
  biased.h = {std::atanh(0.4)};
  Rng rng3(3);
  plus = 0;
  const int trials = 100000;
  SpinState one;
  for (int t = 0; t < trials; ++t) {
    one.s = {-1};
    update_pbit(one, biased, 0, 1.0, Activation::tanh_kind(), rng3);
    if (one.s[0] == 1) ++plus;
  }
  const double sigma = std::sqrt(0.7 * 0.3 / trials);
  CHECK(std::abs(static_cast<double>(plus) / trials - 0.7) < 3.0 * sigma);

  CHECK_THROWS_AS(update_pbit(one, biased, 0, -1.0, Activation::tanh_kind(), rng3),
                  std::invalid_argument);
}

TEST_CASE("gompertz updates stay a valid chain") {
  const auto act = Activation::gompertz(1.4, kLn2);
  for (double x : {-2.0, -1.0, 0.0, 1.0, 5.0}) {
    const double pr = (1.0 + act(x)) / 2.0;
    CHECK(pr > 0.0);
    CHECK(pr < 1.0);
  }
}

TEST_CASE("beta_for_spin half split") {
  TwoSchedule sched;
  sched.beta1 = {1.0, 2.0};
  sched.beta2 = {3.0, 4.0};
  // 26 spins: spin 13 (1-based) is index 12 -> schedule 1; spin 14 -> schedule 2
  CHECK(beta_for_spin(sched, 0, 12, 26) == 1.0);
  CHECK(beta_for_spin(sched, 1, 12, 26) == 2.0);
  CHECK(beta_for_spin(sched, 0, 13, 26) == 3.0);
  // odd n splits at ceil(n/2)
  CHECK(beta_for_spin(sched, 0, 2, 5) == 1.0);
  CHECK(beta_for_spin(sched, 0, 3, 5) == 3.0);
  // symmetric schedules are constant in the spin index
  TwoSchedule sym;
  sym.beta1 = {1.5};
  sym.beta2 = {1.5};
  for (int i = 0; i < 26; ++i) CHECK(beta_for_spin(sym, 0, i, 26) == 1.5);
  CHECK_THROWS_AS(beta_for_spin(sched, 2, 0, 26), std::invalid_argument);
}

TEST_CASE("run_paoa_circuit uniform at beta=0") {
  const auto inst = gen_sk_instance(3, 17);
  const auto sched = TwoSchedule::constant(2, 0.0);
  const auto config = software_config(3, 2);
  Rng rng(21);
  std::vector<long> counts(8, 0);
  const long runs = 80000;
  for (long r = 0; r < runs; ++r)
    ++counts[state_index(run_paoa_circuit(inst, sched, config, rng))];
  // chi-square against uniform over 8 states, 7 dof, 0.999 quantile ~ 24.3
  double chi2 = 0.0;
  const double expect = runs / 8.0;
  for (long c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 24.3);
}

TEST_CASE("run_paoa_circuit freezes a ferromagnetic chain at large beta") {
  IsingInstance chain;
  chain.n = 6;
  chain.j.assign(36, 0.0);
  chain.h.assign(6, 0.0);
  for (int i = 0; i + 1 < 6; ++i) {
    chain.jat(i, i + 1) = 1.0;
    chain.jat(i + 1, i) = 1.0;
  }
  const auto sched = TwoSchedule::constant(30, 50.0);
  const auto config = software_config(6, 30);
  int aligned = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    Rng rng(derive_seed(900, r));
    const auto st = run_paoa_circuit(chain, sched, config, rng);
    const bool all_equal =
        std::all_of(st.s.begin(), st.s.end(), [&](int8_t v) { return v == st.s[0]; });
    if (all_equal) ++aligned;
  }
  CHECK(aligned > runs * 9 / 10);  // zero-temperature Glauber oracle
}

TEST_CASE("run_paoa_circuit determinism and draw count") {
  const auto inst = gen_sk_instance(7, 4);
  const auto sched = TwoSchedule::constant(3, 1.0);
  const auto config = software_config(7, 3);
  Rng a(5), b(5);
  CHECK(run_paoa_circuit(inst, sched, config, a) ==
        run_paoa_circuit(inst, sched, config, b));
  // n*(p+1) draws counting initialization
  Rng c(6);
  run_paoa_circuit(inst, sched, config, c);
  CHECK(c.draws() == 7 * (3 + 1));

  const auto wrong = TwoSchedule::constant(2, 1.0);
  Rng d(7);
  CHECK_THROWS_AS(run_paoa_circuit(inst, wrong, config, d), std::invalid_argument);
}

TEST_CASE("sample_batch basics") {
  const auto inst = gen_sk_instance(8, 31);
  const auto sched = TwoSchedule::constant(2, 1.0);
  const auto config = software_config(8, 2);

  // n_runs = 1 reduces to a single seeded forward pass
  const auto single = sample_batch(inst, sched, config, 1, 1000);
  Rng rng(derive_seed(1000, 0));
  CHECK(single.states[0] == run_paoa_circuit(inst, sched, config, rng));
  CHECK(single.energies[0] == doctest::Approx(energy(inst, single.states[0])));

  // mean energy at beta = 0 vanishes by flip symmetry
  const auto flat = TwoSchedule::constant(2, 0.0);
  const auto batch = sample_batch(inst, flat, config, 100000, 2000);
  double mean = 0.0, var = 0.0;
  for (double e : batch.energies) mean += e;
  mean /= batch.energies.size();
  for (double e : batch.energies) var += (e - mean) * (e - mean);
  var /= batch.energies.size();
  CHECK(std::abs(mean) < 3.0 * std::sqrt(var / batch.energies.size()));
}

TEST_CASE("sample_batch is invariant to worker count") {
  const auto inst = gen_sk_instance(10, 32);
  const auto sched = TwoSchedule::constant(3, 1.2);
  const auto config = software_config(10, 3);
  const auto serial = sample_batch(inst, sched, config, 503, 77, 1);
  const auto parallel = sample_batch(inst, sched, config, 503, 77, 8);
  CHECK(serial.energies == parallel.energies);
  for (std::size_t r = 0; r < serial.states.size(); ++r)
    CHECK(serial.states[r] == parallel.states[r]);
}

TEST_CASE("detailed balance of the tanh update under normalized energy") {
  const auto inst = gen_sk_instance(4, 71);
  const double beta = 0.8;
  const double scale = beta / std::sqrt(4.0);
  // enumerate every (state, site) pair
  for (int mask = 0; mask < 16; ++mask) {
    SpinState st;
    for (int i = 0; i < 4; ++i) st.s.push_back((mask >> i) & 1 ? 1 : -1);
    for (int i = 0; i < 4; ++i) {
      SpinState fl = st;
      fl.s[i] = static_cast<int8_t>(-fl.s[i]);
      const double field = local_field(st, inst, i);  // independent of s_i
      const double pr_up = 0.5 * (1.0 + std::tanh(scale * field));
      const double p_fwd = st.s[i] == 1 ? (1.0 - pr_up) : pr_up;
      const double p_bwd = st.s[i] == 1 ? pr_up : (1.0 - pr_up);
      const double pi_s = std::exp(-beta * energy(inst, st));
      const double pi_f = std::exp(-beta * energy(inst, fl));
      CHECK(pi_s * p_fwd == doctest::Approx(pi_f * p_bwd).epsilon(1e-10));
    }
  }
}

TEST_CASE("run_equilibrium two-point Boltzmann ratio") {
  IsingInstance two;
  two.n = 2;
  two.j = {0.0, 1.0, 1.0, 0.0};
  two.h = {0.0, 0.0};
  Rng rng(404);
  const auto samples = run_equilibrium(two, 1.0, 400000, 1000, rng);
  long same = 0;
  for (const auto& st : samples)
    if (st.s[0] == st.s[1]) ++same;
  const double ratio =
      static_cast<double>(same) / static_cast<double>(samples.size() - same);
  CHECK(ratio == doctest::Approx(std::exp(2.0 / std::sqrt(2.0))).epsilon(0.03));
}

TEST_CASE("run_equilibrium uniform at beta=0") {
  const auto inst = gen_sk_instance(4, 88);
  Rng rng(89);
  const auto samples = run_equilibrium(inst, 0.0, 160000, 100, rng);
  std::vector<long> counts(16, 0);
  for (const auto& st : samples) ++counts[state_index(st)];
  double chi2 = 0.0;
  const double expect = static_cast<double>(samples.size()) / 16.0;
  for (long c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 37.7);  // 15 dof, 0.999 quantile
}

TEST_CASE("software gompertz and emulator backends sample the same law") {
  // zero-variance array: every pixel (1.4, ln2); calibrated gain makes the
  // effective input activation Gompertz with exponent e/2 and kappa ln2.
  const VariabilitySpec flat{1.4, 0.0, kLn2, 0.0, 0.05};
  const auto array = synthesize_array(flat, 2, 2, 0);
  std::vector<double> grid;
  for (int k = 0; k < 41; ++k) grid.push_back(-2.0 + 4.0 * k / 40.0);
  const auto ca = calibrate_array_exact(array, grid);

  const auto inst = gen_sk_instance(4, 12);
  const auto sched = TwoSchedule::constant(2, 0.8);

  auto cfg_sw = software_config(4, 2, Activation::gompertz(std::exp(1.0) / 2.0, kLn2));
  auto cfg_emu = software_config(4, 2);
  cfg_emu.emulator = &ca;

  const long runs = 200000;
  std::vector<double> dist_sw(16, 0.0), dist_emu(16, 0.0);
  const auto bs = sample_batch(inst, sched, cfg_sw, runs, 51, 4);
  const auto be = sample_batch(inst, sched, cfg_emu, runs, 52, 4);
  for (const auto& st : bs.states) dist_sw[state_index(st)] += 1.0 / runs;
  for (const auto& st : be.states) dist_emu[state_index(st)] += 1.0 / runs;
  double tv = 0.0;
  for (int k = 0; k < 16; ++k) tv += std::abs(dist_sw[k] - dist_emu[k]);
  CHECK(tv / 2.0 < 0.01);
}
