#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "paoa/array_emulator.hpp"
#include "paoa/analysis.hpp"
#include "paoa/pcircuit.hpp"
#include "paoa/problems.hpp"

namespace paoa {

inline constexpr const char* kToolVersion = "0.1.0";

// Instance files store the upper triangle row-major plus the generation
// seed; doubles round-trip exactly.
void save_instance(const IsingInstance& instance, const std::filesystem::path& file);
IsingInstance load_instance(const std::filesystem::path& file);

void save_ground_state(const GroundStateResult& gs, const std::filesystem::path& file);
GroundStateResult load_ground_state(const std::filesystem::path& file);

struct ScheduleProvenance {
  std::vector<std::uint64_t> instance_seeds;
  std::string config_json;  // resolved training config, serialized
};

void save_schedule(const TwoSchedule& schedule, const Activation& activation,
                   const ScheduleProvenance& provenance,
                   const std::filesystem::path& file,
                   std::optional<double> fit_residual = std::nullopt);

struct ScheduleFile {
  TwoSchedule schedule;
  Activation activation;
  ScheduleProvenance provenance;
};

ScheduleFile load_schedule(const std::filesystem::path& file);

// Versioned array document: dims, seed, per-pixel alpha/kappa/zeta and,
// when calibrated, per-pixel v_bias/k.
void save_array(const CalibratedArray& array, const std::filesystem::path& file);
CalibratedArray load_array(const std::filesystem::path& file);

// All CSVs open with "# paoa <version> seed=<seed>" then a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, std::uint64_t seed,
            const std::vector<std::string>& columns);
  ~CsvWriter();

  void row(const std::vector<std::string>& cells);

  static std::string num(double v);       // shortest exact round-trip
  static std::string num(long v);
  static std::string num(int v) { return num(static_cast<long>(v)); }

 private:
  std::string path_;
  std::string buffer_;
  std::size_t n_columns_;
};

struct ResultRow {
  int depth = 0;
  std::string activation_train;
  std::string activation_infer;
  double mean_energy = 0.0;
  double e_sol = 0.0;  // averaged over instances
  double residual_energy = 0.0;
  double approx_ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long n_runs = 0;
  int n_instances = 0;
  std::uint64_t seed = 0;
};

void write_results_csv(const std::filesystem::path& file, std::uint64_t seed,
                       const std::vector<ResultRow>& rows);

}  // namespace paoa
