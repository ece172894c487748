#pragma once

#include <crowdflow/mesh.hpp>

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace crowdflow {

/// Fraction of N that may remain when the crowd event is declared over.
inline constexpr double kMassClosure = 1e-6;

/// First time with G / N >= 1 - kMassClosure; +infinity when never reached, 0 when N == 0.
double egress_time(std::span<const double> times, std::span<const double> egress, double total);

/// Samples of the density along the chord of one section x = const.
///
/// The side value averages the two wall-adjacent elements, the mid value the
/// elements touching the mid-chord point. Points are probed slightly to both
/// sides of the section so that grid lines do not bias the choice.
class ChordProbe {
 public:
  ChordProbe(const TriMesh& mesh, double x, int profile_samples = 64);

  double x() const { return x_; }
  double rho_mid(const Eigen::VectorXd& density) const;
  double rho_side(const Eigen::VectorXd& density) const;
  /// (y, density) pairs from the lower to the upper wall.
  std::vector<std::pair<double, double>> profile(const Eigen::VectorXd& density) const;

 private:
  static double mean(const std::vector<int>& ids, const Eigen::VectorXd& density);

  double x_;
  std::vector<int> mid_;
  std::vector<int> lower_;
  std::vector<int> upper_;
  std::vector<double> profile_y_;
  std::vector<std::vector<int>> profile_ids_;
};

/// (rho_m - rho_s) / rho_C, all densities in the same units.
double delta_rho(double rho_mid, double rho_side, double capacity_density);
double delta_rho(const ChordProbe& probe, const Eigen::VectorXd& density, double capacity_density);

struct Window {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t i0 = 0;
  std::size_t i1 = 0;  // inclusive
};

/// Centered difference of M over a window of width `span` (linear interpolation in t).
std::vector<double> smoothed_rate(std::span<const double> times, std::span<const double> mass, double span);

/// Longest run with |dM/dt| <= tolerance * max |dM/dt| and M >= half its maximum.
std::optional<Window> detect_plateau(std::span<const double> times, std::span<const double> mass,
                                     double tolerance = 0.02, double span = 0.05);

struct RegimeSummary {
  std::optional<Window> plateau;
  bool filling = false;  // M rises before the plateau
  bool leaving = false;  // M falls after the plateau
  bool ordered() const { return plateau && filling && leaving; }
};

RegimeSummary classify_regimes(std::span<const double> times, std::span<const double> mass,
                               double tolerance = 0.02, double span = 0.05);

double total_mass(const TriMesh& mesh, const Eigen::VectorXd& density);

/// Copy scaled to unit total mass. Throws std::domain_error on zero mass.
Eigen::VectorXd to_probability_density(const TriMesh& mesh, const Eigen::VectorXd& density);
/// Copy scaled by N (probability density -> mass density).
Eigen::VectorXd to_mass_density(const Eigen::VectorXd& probability, double total);

/// Expected pedestrian count (N / total mass) * sum over the region of rho |E|.
double expected_count(const TriMesh& mesh, const Eigen::VectorXd& density, std::span<const int> region,
                      double total);

}  // namespace crowdflow
