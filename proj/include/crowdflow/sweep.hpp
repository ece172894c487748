#pragma once

#include <crowdflow/scenario.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crowdflow {

struct SweepCell {
  double c = 0.0;
  double theta_deg = 0.0;
  double ta_over_t = 0.0;
  double delta_rho = 0.0;
  std::string error;  // empty on success
  bool ok() const { return error.empty(); }
};

/// Grid in c-major order: cells[i * thetas.size() + j] is (cs[i], thetas[j]).
struct SweepTable {
  std::vector<double> cs;
  std::vector<double> thetas;  // degrees
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t i, std::size_t j) const { return cells[i * thetas.size() + j]; }
};

/// One independent run per (c, theta); cells are spread over `threads` workers and
/// each run is single threaded. Failures are recorded in the cell and the sweep continues.
SweepTable run_sweep(const Scenario& base, const std::vector<double>& cs, const std::vector<double>& thetas_deg,
                     int threads = 1);

/// c,theta,Ta_over_T,delta_rho; failed cells are written with nan values.
void write_sweep_csv(const SweepTable& table, std::ostream& os);
/// c,theta,error for the failed cells only.
void write_sweep_errors(const SweepTable& table, std::ostream& os);

struct Tuning {
  double c = 0.0;
  double theta_deg = 0.0;
};

/// Reading the sweep as tuning charts: c is picked where T_a/T reaches the target
/// along theta = theta_ref, then theta where delta_rho reaches its target at that c.
/// Repeated once with theta_ref set to the recovered angle. Bilinear interpolation
/// on the grid; std::nullopt when a target is not bracketed.
std::optional<Tuning> tune(const SweepTable& table, double target_ta_over_t, double target_delta_rho,
                           double theta_ref_deg);

/// Bilinear interpolation of a cell field; nan where a needed cell failed.
double interpolate(const SweepTable& table, double c, double theta_deg, double SweepCell::*field);

}  // namespace crowdflow
