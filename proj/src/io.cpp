#include "paoa/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace paoa {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  json doc;
  in >> doc;
  return doc;
}

void write_json(const json& doc, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump(2) << '\n';
}

void check_version(const json& doc, const char* what) {
  if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1)
    throw std::runtime_error(std::string(what) + ": unsupported format_version");
}

json activation_to_json(const Activation& act) {
  json a;
  a["kind"] = act.kind == Activation::Kind::SymmetricTanh ? "tanh" : "gompertz";
  if (act.kind == Activation::Kind::Gompertz) {
    a["alpha"] = act.alpha;
    a["kappa"] = act.kappa;
  }
  return a;
}

Activation activation_from_json(const json& a) {
  const std::string kind = a.at("kind").get<std::string>();
  if (kind == "tanh") return Activation::tanh_kind();
  if (kind == "gompertz")
    return Activation::gompertz(a.at("alpha").get<double>(),
                                a.at("kappa").get<double>());
  throw std::runtime_error("unknown activation kind: " + kind);
}

}  // namespace

void save_instance(const IsingInstance& instance, const std::filesystem::path& file) {
  instance.validate();
  json doc;
  doc["format_version"] = 1;
  doc["n"] = instance.n;
  doc["seed"] = instance.seed;
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(instance.n) * (instance.n - 1) / 2);
  for (int a = 0; a < instance.n; ++a)
    for (int b = a + 1; b < instance.n; ++b) upper.push_back(instance.jat(a, b));
  doc["j_upper"] = upper;
  doc["h"] = instance.h;
  write_json(doc, file);
}

IsingInstance load_instance(const std::filesystem::path& file) {
  const json doc = read_json(file);
  check_version(doc, "instance");
  IsingInstance inst;
  inst.n = doc.at("n").get<int>();
  inst.seed = doc.at("seed").get<std::uint64_t>();
  inst.h = doc.at("h").get<std::vector<double>>();
  const auto upper = doc.at("j_upper").get<std::vector<double>>();
  if (upper.size() != static_cast<std::size_t>(inst.n) * (inst.n - 1) / 2)
    throw std::runtime_error("instance: j_upper length mismatch");
  inst.j.assign(static_cast<std::size_t>(inst.n) * inst.n, 0.0);
  std::size_t t = 0;
  for (int a = 0; a < inst.n; ++a)
    for (int b = a + 1; b < inst.n; ++b) {
      inst.jat(a, b) = upper[t];
      inst.jat(b, a) = upper[t];
      ++t;
    }
  inst.validate();
  return inst;
}

void save_ground_state(const GroundStateResult& gs, const std::filesystem::path& file) {
  json doc;
  doc["format_version"] = 1;
  doc["e_sol"] = gs.e_sol;
  std::vector<int> state(gs.state.s.begin(), gs.state.s.end());
  doc["state"] = state;
  write_json(doc, file);
}

GroundStateResult load_ground_state(const std::filesystem::path& file) {
  const json doc = read_json(file);
  check_version(doc, "ground state");
  GroundStateResult gs;
  gs.e_sol = doc.at("e_sol").get<double>();
  for (int v : doc.at("state").get<std::vector<int>>())
    gs.state.s.push_back(static_cast<int8_t>(v));
  return gs;
}

void save_schedule(const TwoSchedule& schedule, const Activation& activation,
                   const ScheduleProvenance& provenance,
                   const std::filesystem::path& file,
                   std::optional<double> fit_residual) {
  schedule.validate();
  json doc;
  doc["format_version"] = 1;
  doc["p"] = schedule.depth();
  doc["beta1"] = schedule.beta1;
  doc["beta2"] = schedule.beta2;
  doc["activation"] = activation_to_json(activation);
  json prov;
  prov["instance_seeds"] = provenance.instance_seeds;
  if (!provenance.config_json.empty())
    prov["config"] = json::parse(provenance.config_json);
  doc["provenance"] = prov;
  if (fit_residual) doc["fit_residual"] = *fit_residual;
  write_json(doc, file);
}

ScheduleFile load_schedule(const std::filesystem::path& file) {
  const json doc = read_json(file);
  check_version(doc, "schedule");
  ScheduleFile out;
  out.schedule.beta1 = doc.at("beta1").get<std::vector<double>>();
  out.schedule.beta2 = doc.at("beta2").get<std::vector<double>>();
  out.schedule.validate();
  if (doc.at("p").get<int>() != out.schedule.depth())
    throw std::runtime_error("schedule: depth mismatch");
  out.activation = activation_from_json(doc.at("activation"));
  if (doc.contains("provenance")) {
    const json& prov = doc["provenance"];
    if (prov.contains("instance_seeds"))
      out.provenance.instance_seeds =
          prov["instance_seeds"].get<std::vector<std::uint64_t>>();
    if (prov.contains("config")) out.provenance.config_json = prov["config"].dump();
  }
  return out;
}

void save_array(const CalibratedArray& array, const std::filesystem::path& file) {
  array.array.validate();
  json doc;
  doc["format_version"] = 1;
  doc["rows"] = array.array.rows;
  doc["cols"] = array.array.cols;
  doc["seed"] = array.array.seed;
  doc["theta"] = array.array.theta;
  doc["t_int"] = array.array.t_int;
  json pixels = json::array();
  for (const auto& px : array.array.pixels)
    pixels.push_back({{"alpha", px.alpha}, {"kappa", px.kappa_ref}, {"zeta", px.zeta}});
  doc["pixels"] = pixels;
  if (!array.cal.empty()) {
    json cal = json::array();
    for (const auto& c : array.cal)
      cal.push_back({{"v_bias", c.v_bias},
                     {"k", c.gain_k},
                     {"alpha", c.fitted_alpha},
                     {"kappa", c.fitted_kappa}});
    doc["calibration"] = cal;
  }
  write_json(doc, file);
}

CalibratedArray load_array(const std::filesystem::path& file) {
  const json doc = read_json(file);
  check_version(doc, "array");
  CalibratedArray out;
  out.array.rows = doc.at("rows").get<int>();
  out.array.cols = doc.at("cols").get<int>();
  out.array.seed = doc.at("seed").get<std::uint64_t>();
  out.array.theta = doc.at("theta").get<double>();
  out.array.t_int = doc.at("t_int").get<double>();
  for (const auto& px : doc.at("pixels")) {
    PixelModel pm;
    pm.alpha = px.at("alpha").get<double>();
    pm.kappa_ref = px.at("kappa").get<double>();
    pm.zeta = px.at("zeta").get<double>();
    out.array.pixels.push_back(pm);
  }
  out.array.validate();
  if (doc.contains("calibration")) {
    for (const auto& c : doc["calibration"]) {
      PixelCalibration cal;
      cal.v_bias = c.at("v_bias").get<double>();
      cal.gain_k = c.at("k").get<double>();
      cal.fitted_alpha = c.at("alpha").get<double>();
      cal.fitted_kappa = c.at("kappa").get<double>();
      out.cal.push_back(cal);
    }
    out.validate();
  }
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& file, std::uint64_t seed,
                     const std::vector<std::string>& columns)
    : path_(file.string()), n_columns_(columns.size()) {
  buffer_ = "# paoa ";
  buffer_ += kToolVersion;
  buffer_ += " seed=";
  buffer_ += std::to_string(seed);
  buffer_ += '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_, std::ios::binary);
  out << buffer_;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw std::invalid_argument("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

std::string CsvWriter::num(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string CsvWriter::num(long v) { return std::to_string(v); }

void write_results_csv(const std::filesystem::path& file, std::uint64_t seed,
                       const std::vector<ResultRow>& rows) {
  CsvWriter csv(file, seed,
                {"depth", "activation_train", "activation_infer", "mean_energy",
                 "e_sol", "residual_energy", "approx_ratio", "ci_low", "ci_high",
                 "n_runs", "n_instances", "seed"});
  for (const auto& r : rows)
    csv.row({CsvWriter::num(r.depth), r.activation_train, r.activation_infer,
             CsvWriter::num(r.mean_energy), CsvWriter::num(r.e_sol),
             CsvWriter::num(r.residual_energy), CsvWriter::num(r.approx_ratio),
             CsvWriter::num(r.ci_low), CsvWriter::num(r.ci_high),
             CsvWriter::num(r.n_runs), CsvWriter::num(r.n_instances),
             std::to_string(r.seed)});
}

}  // namespace paoa
