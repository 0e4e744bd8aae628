#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "darwin/dynamics.hpp"
#include "darwin/kspace_ed.hpp"
#include "darwin/noise.hpp"
#include "darwin/response.hpp"
#include "darwin/units.hpp"

namespace darwin::cli {

enum class Experiment { dynamics, fields, ed, response, noise };
const char* to_string(Experiment e);

struct DynamicsParams {
  dynamics::ParticleSet particles;
  double dt = 1e-3;
  std::size_t steps = 1000;
  dynamics::Method method = dynamics::Method::implicit_midpoint;
  double r_min = 1e-6;
  std::size_t output_every = 1;
};

struct FieldsParams {
  double L = 1.0;
  int nside = 32;
  dynamics::ParticleSet particles;
  bool binary_dumps = false;
};

struct KuboRequest {
  ed::IVec3 k = ed::IVec3(1, 0, 0);
  std::vector<double> omegas;
  double temperature = 1.0;
  double s = 1e-2;
  ed::Polarization polarization = ed::Polarization::longitudinal;
  int richardson_levels = 1;
};

struct EdParams {
  ed::BasisSpec basis;
  ed::ParticleSpecies species;
  ed::HamiltonianTerms terms;
  std::size_t levels = 10;
  std::optional<KuboRequest> kubo;
};

/// Built-in response model chosen in the config.
struct ModelSpec {
  std::string type = "zero";  // zero, drude, london
  double density = 1.0;
  double charge = 1.0;
  double mass = 1.0;
  double gamma = 0.0;
  double lambda = 1.0;

  response::ResponseModel build(const UnitSystem& u) const;
};

struct ResponseParams {
  ModelSpec model;
  /// Written in decreasing order, so the last row is the long-wavelength end.
  std::vector<double> k;
  std::vector<double> omega;
  double k_scale = 1.0;
};

struct NoiseParams {
  noise::SpectrumKind kind = noise::SpectrumKind::voltage;
  ModelSpec model;
  double temperature = 1.0;
  std::vector<double> omega;
  noise::CircuitGeometry geometry;
  double k = 1.0;
  double volume = 1.0;
  // photon_number: C(t, l) = amplitude * exp(-t / decay_time)
  double amplitude = 1.0;
  double decay_time = 1.0;
  noise::QuadratureTolerances tolerances;
};

using ExperimentParams = std::variant<DynamicsParams, FieldsParams, EdParams, ResponseParams, NoiseParams>;

struct Scenario {
  std::string name;
  std::string description;
  UnitSystem units;
  Experiment experiment = Experiment::dynamics;
  ExperimentParams params;
  /// Relative to the output root.
  std::string output_dir;
};

/// Validates the whole config. Throws ConfigError naming the file line and
/// field of the first problem.
Scenario parse_scenario(const ConfigDocument& doc);

struct Artifact {
  std::string name;
  std::string content;
};

/// Runs the experiment and returns the artifacts in memory; nothing is written.
std::vector<Artifact> run_scenario(const Scenario& s);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

/// manifest.json listing every artifact with its size and SHA-256.
Artifact make_manifest(const Scenario& s, const std::vector<Artifact>& artifacts);

/// Writes the artifacts and the manifest into `dir`, creating it if needed.
void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts);

// Command entry points used by the darwin executable. Return the exit code:
// 0 success, 1 runtime or physics failure, 2 usage or config error.

/// `config` is a path, or the name of a bundled scenario.
int run_command(const std::string& config, std::ostream& out, std::ostream& err);
int verify_command(const std::string& suite, std::ostream& out, std::ostream& err);
int list_examples_command(std::ostream& out, std::ostream& err);

/// DARWIN_OUTPUT_ROOT, or the current directory.
std::string output_root();
/// DARWIN_SCENARIO_DIR, or the bundled scenarios directory.
std::string scenario_dir();

}  // namespace darwin::cli
