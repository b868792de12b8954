#include "paoa/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "paoa/rng.hpp"

namespace paoa {

void IsingInstance::validate() const {
  if (n < 1) throw std::invalid_argument("IsingInstance: n < 1");
  if (j.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("IsingInstance: coupling matrix size mismatch");
  if (h.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("IsingInstance: bias vector size mismatch");
  for (int a = 0; a < n; ++a) {
    if (jat(a, a) != 0.0)
      throw std::invalid_argument("IsingInstance: nonzero diagonal");
    for (int b = a + 1; b < n; ++b)
      if (jat(a, b) != jat(b, a))
        throw std::invalid_argument("IsingInstance: asymmetric couplings");
  }
}

IsingInstance gen_sk_instance(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_sk_instance: n < 2");
  IsingInstance inst;
  inst.n = n;
  inst.seed = seed;
  inst.j.assign(static_cast<std::size_t>(n) * n, 0.0);
  inst.h.assign(n, 0.0);
  Rng rng(seed);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double v = rng.normal();
      inst.jat(a, b) = v;
      inst.jat(b, a) = v;
    }
  return inst;
}

double energy(const IsingInstance& instance, const SpinState& state) {
  if (state.n() != instance.n)
    throw std::invalid_argument("energy: dimension mismatch");
  const int n = instance.n;
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    const double sa = state.s[a];
    double acc = 0.0;
    for (int b = a + 1; b < n; ++b) acc += instance.jat(a, b) * state.s[b];
    sum += sa * acc;
  }
  return -sum / std::sqrt(static_cast<double>(n));
}

GroundStateResult exact_ground_state(const IsingInstance& instance) {
  instance.validate();
  const int n = instance.n;
  if (n > 30) throw std::invalid_argument("exact_ground_state: n > 30");

  // s[0] fixed at +1; spins 1..n-1 walk a Gray code. Unnormalized pair sum
  // U(s) = sum_{i<j} J_ij s_i s_j is maintained incrementally together with
  // the local fields f_i = sum_j J_ij s_j. Flipping spin i changes U by
  // -2 s_i f_i (post-flip convention below uses the pre-flip value).
  std::vector<double> s(n, 1.0);
  std::vector<double> f(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) f[a] += instance.jat(a, b) * s[b];

  double u = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) u += instance.jat(a, b) * s[a] * s[b];

  auto record_state = [&]() {
    SpinState st;
    st.s.resize(n);
    for (int a = 0; a < n; ++a) st.s[a] = s[a] > 0 ? 1 : -1;
    return st;
  };

  double best_u = u;
  SpinState best = record_state();

  auto lex_less = [](const SpinState& a, const SpinState& b) {
    return std::lexicographical_compare(a.s.begin(), a.s.end(), b.s.begin(),
                                        b.s.end());
  };

  const std::uint64_t count = 1ULL << (n - 1);
  for (std::uint64_t g = 1; g < count; ++g) {
    // Gray code: spin (ctz(g) + 1) flips between step g-1 and g.
    const int i = 1 + __builtin_ctzll(g);
    const double si = s[i];
    u -= 2.0 * si * f[i];
    s[i] = -si;
    const double delta = -2.0 * si;
    for (int b = 0; b < n; ++b) f[b] += delta * instance.jat(i, b);
    if (u > best_u || (u == best_u /* tie: keep lexicographically smallest */)) {
      if (u > best_u) {
        best_u = u;
        best = record_state();
      } else {
        SpinState cand = record_state();
        if (lex_less(cand, best)) best = cand;
      }
    }
  }
  GroundStateResult result;
  result.state = best;
  result.e_sol = energy(instance, best);
  return result;
}

std::array<int, 8> majority_truth_set() {
  std::array<int, 8> out{};
  int k = 0;
  for (int m1 = 0; m1 <= 1; ++m1)
    for (int m2 = 0; m2 <= 1; ++m2)
      for (int m3 = 0; m3 <= 1; ++m3) {
        const int m4 = m3 ? (m1 | m2) : (m1 & m2);
        out[k++] = (m1 << 3) | (m2 << 2) | (m3 << 1) | m4;
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::array<double, 16> majority_target_distribution() {
  std::array<double, 16> out{};
  for (int st : majority_truth_set()) out[st] = 1.0 / 8.0;
  return out;
}

}  // namespace paoa
