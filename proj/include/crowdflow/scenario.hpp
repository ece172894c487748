#pragma once

#include <crowdflow/mesh.hpp>
#include <crowdflow/observables.hpp>
#include <crowdflow/potential.hpp>
#include <crowdflow/simulation.hpp>
#include <crowdflow/transport.hpp>

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdflow {

/// Scenario in physical (SI) units, as read from a config file.
struct Scenario {
  std::string domain = "rectangle";
  double length = 100.0;  // L [m]
  double width = 4.0;     // B [m]
  bool outlet_open = true;
  double mesh_size = 0.5;  // [m]

  double speed = 1.18;            // V [m/s]
  double pedestrians = 1500.0;    // N
  double capacity_density = 1.3;  // rho_C [ped/m^2]

  double repulsion = 5e-4;  // c, dimensionless
  double theta_deg = 2.0;
  double sensory_radius = 2.0;  // R [m]
  double sensory_half_angle_deg = 45.0;
  WallMode wall_mode = WallMode::scrape;

  double inflow_rate = 40.0;  // F [ped/s]
  double fade_ratio = 0.1;    // p
  double entrance_depth = -1.0;  // [m]; negative selects 2R

  double cfl_safety = 0.9;
  double dt_max = 1.0;    // [s]
  double t_end = 2000.0;  // [s]

  std::vector<double> sections{50.0};  // profile abscissae [m]
  double snapshot_every = 0.0;          // scaled time; 0 disables snapshots
  unsigned long seed = 0;

  double time_scale() const { return length / speed; }
  double buffer_depth() const { return entrance_depth < 0 ? 2.0 * sensory_radius : entrance_depth; }
};

/// Every problem found in a config, one message per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Flat `key = value` text, `#` comments. Throws ConfigError listing every bad line and field.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(const Scenario& s, std::ostream& os);

/// Semantic checks; empty when valid.
std::vector<std::string> validate(const Scenario& s);

/// Mesh, potential, and scaled parameters of a scenario; immutable once built.
struct PreparedScenario {
  Scenario scenario;
  DomainSpec spec;
  std::unique_ptr<TriMesh> mesh;
  PotentialField field;
  SimulationParams params;
  std::optional<ArrivalLaw> arrivals;
  double total = 0.0;              // N
  double capacity_density = 0.0;   // rho_C in scaled mass density (rho_C L^2)
};

PreparedScenario prepare(const Scenario& s, int threads = 1);

struct RunOptions {
  std::optional<std::filesystem::path> out;  // no files when empty
  int threads = 1;
  std::optional<double> snapshot_every;      // overrides the scenario value
};

struct SectionProfile {
  double x = 0.0;  // [m]
  std::vector<std::pair<double, double>> rows;  // (y [m], rho_p [ped/m^2]) averaged over the plateau
};

struct RunReport {
  double time_scale = 0.0;  // T [s]
  double egress_time = 0.0;  // T_a / T; +inf when the crowd never fully leaves
  double delta_rho = 0.0;
  RegimeSummary regimes;
  double max_rho_p = 0.0;     // max pedestrian density over the middle half of the walkway during the plateau
  double budget_drift = 0.0;  // max relative change of S + I + M + G
  int steps = 0;
  std::vector<Sample> series;  // pedestrian units
  std::vector<SectionProfile> profiles;
  std::vector<std::string> warnings;
};

/// Runs a prepared scenario; writes artifacts when options.out is set.
RunReport run_prepared(const PreparedScenario& p, const RunOptions& options = {});
RunReport run_scenario(const Scenario& s, const RunOptions& options = {});

/// Element count, sizes, areas and boundary census.
void describe_mesh(const TriMesh& mesh, std::ostream& os, double length_scale = 1.0);

/// printf("%.17g") with inf/nan spelled out.
std::string format_number(double v);

}  // namespace crowdflow
