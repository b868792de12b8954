#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace paoa {

// Bipolar spin configuration, entries in {-1, +1}.
struct SpinState {
  std::vector<int8_t> s;

  int n() const { return static_cast<int>(s.size()); }
  bool operator==(const SpinState&) const = default;
};

// Fully connected Ising instance with symmetric zero-diagonal couplings.
// Energy convention: E(s) = -(1/sqrt(n)) * sum_{i<j} J_ij s_i s_j.
struct IsingInstance {
  int n = 0;
  std::vector<double> j;  // n*n row-major, symmetric, zero diagonal
  std::vector<double> h;  // length n
  std::uint64_t seed = 0;

  double jat(int a, int b) const { return j[static_cast<std::size_t>(a) * n + b]; }
  double& jat(int a, int b) { return j[static_cast<std::size_t>(a) * n + b]; }

  void validate() const;  // throws on asymmetry / size mismatch
};

struct GroundStateResult {
  double e_sol = 0.0;
  SpinState state;  // a representative argmin with s[0] = +1
};

// SK instance: upper-triangle J_ij ~ N(0,1) from the seeded generator,
// mirrored; h = 0.
IsingInstance gen_sk_instance(int n, std::uint64_t seed);

double energy(const IsingInstance& instance, const SpinState& state);

// Exhaustive minimum over all 2^n states. Fixes s[0] = +1 (global flip
// symmetry) and walks the remaining states in Gray-code order with
// incremental field updates. Guarded at n <= 30.
GroundStateResult exact_ground_state(const IsingInstance& instance);

// Majority gate m4 = MAJ(m1,m2,m3): m1|m2 if m3 else m1&m2.
// States encoded as [m1 m2 m3 m4] with m1 the most significant bit.
std::array<int, 8> majority_truth_set();

// Uniform mass 1/8 on the truth set, 0 elsewhere.
std::array<double, 16> majority_target_distribution();

}  // namespace paoa
