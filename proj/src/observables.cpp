#include <crowdflow/observables.hpp>
#include <crowdflow/potential.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdflow {

double egress_time(std::span<const double> times, std::span<const double> egress, double total) {
  if (times.size() != egress.size()) throw std::invalid_argument("egress_time: series length mismatch");
  if (!(total > 0)) return 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (egress[i] / total >= 1.0 - kMassClosure) return times[i];
  return std::numeric_limits<double>::infinity();
}

namespace {

void probe_points(const TriMesh& mesh, const CentroidIndex& index, double x, double y, double eps_y,
                  std::vector<int>& out) {
  // Larger than eps_y so that probes near a node never sit on a cell diagonal.
  const double eps_x = 1e-5 * mesh.h_min();
  for (double dx : {-eps_x, eps_x}) {
    const int k = locate(mesh, index, Vec2(x + dx, y + eps_y));
    if (k >= 0) out.push_back(k);
  }
}

}  // namespace

ChordProbe::ChordProbe(const TriMesh& mesh, double x, int profile_samples) : x_(x) {
  const auto [y1, y2] = chord_ends(mesh, x);
  const CentroidIndex index(mesh, std::max(mesh.h_max(), 2 * mesh.max_reach()));
  const double eps = 1e-7 * mesh.h_min();
  probe_points(mesh, index, x, y1, eps, lower_);
  probe_points(mesh, index, x, y2, -eps, upper_);
  const double ym = 0.5 * (y1 + y2);
  probe_points(mesh, index, x, ym, eps, mid_);
  probe_points(mesh, index, x, ym, -eps, mid_);
  if (lower_.empty() || upper_.empty() || mid_.empty())
    throw std::invalid_argument("chord probe: section outside the mesh");
  for (int i = 0; i < profile_samples; ++i) {
    const double y = y1 + (y2 - y1) * (i + 0.5) / profile_samples;
    std::vector<int> ids;
    probe_points(mesh, index, x, y, 0.0, ids);
    if (ids.empty()) continue;
    profile_y_.push_back(y);
    profile_ids_.push_back(std::move(ids));
  }
}

double ChordProbe::mean(const std::vector<int>& ids, const Eigen::VectorXd& density) {
  double s = 0.0;
  for (int k : ids) s += density[k];
  return s / static_cast<double>(ids.size());
}

double ChordProbe::rho_mid(const Eigen::VectorXd& density) const { return mean(mid_, density); }

double ChordProbe::rho_side(const Eigen::VectorXd& density) const {
  return 0.5 * (mean(lower_, density) + mean(upper_, density));
}

std::vector<std::pair<double, double>> ChordProbe::profile(const Eigen::VectorXd& density) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(profile_y_.size());
  for (std::size_t i = 0; i < profile_y_.size(); ++i) out.emplace_back(profile_y_[i], mean(profile_ids_[i], density));
  return out;
}

double delta_rho(double rho_mid, double rho_side, double capacity_density) {
  if (!(capacity_density > 0)) throw std::invalid_argument("capacity density must be positive");
  return (rho_mid - rho_side) / capacity_density;
}

double delta_rho(const ChordProbe& probe, const Eigen::VectorXd& density, double capacity_density) {
  return delta_rho(probe.rho_mid(density), probe.rho_side(density), capacity_density);
}

std::vector<double> smoothed_rate(std::span<const double> times, std::span<const double> mass, double span) {
  const std::size_t n = times.size();
  std::vector<double> rate(n, 0.0);
  if (n < 2) return rate;
  auto value_at = [&](double t) {
    if (t <= times.front()) return mass.front();
    if (t >= times.back()) return mass.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return mass[j - 1] + w * (mass[j] - mass[j - 1]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(times.front(), times[i] - 0.5 * span);
    const double b = std::min(times.back(), times[i] + 0.5 * span);
    rate[i] = b > a ? (value_at(b) - value_at(a)) / (b - a) : 0.0;
  }
  return rate;
}

std::optional<Window> detect_plateau(std::span<const double> times, std::span<const double> mass,
                                     double tolerance, double span) {
  if (times.size() != mass.size()) throw std::invalid_argument("detect_plateau: series length mismatch");
  if (times.size() < 3) return std::nullopt;
  const auto rate = smoothed_rate(times, mass, span);
  double max_rate = 0.0, max_mass = 0.0;
  for (std::size_t i = 0; i < rate.size(); ++i) {
    max_rate = std::max(max_rate, std::abs(rate[i]));
    max_mass = std::max(max_mass, mass[i]);
  }
  if (!(max_mass > 0)) return std::nullopt;
  std::optional<Window> best;
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t i = 0; i <= rate.size(); ++i) {
    const bool ok = i < rate.size() && std::abs(rate[i]) <= tolerance * max_rate && mass[i] >= 0.5 * max_mass;
    if (ok && !in_run) {
      run_start = i;
      in_run = true;
    } else if (!ok && in_run) {
      in_run = false;
      const std::size_t last = i - 1;
      if (!best || times[last] - times[run_start] > best->t1 - best->t0)
        best = Window{times[run_start], times[last], run_start, last};
    }
  }
  if (best && best->i1 == best->i0) return std::nullopt;
  return best;
}

RegimeSummary classify_regimes(std::span<const double> times, std::span<const double> mass, double tolerance,
                               double span) {
  RegimeSummary s;
  s.plateau = detect_plateau(times, mass, tolerance, span);
  if (!s.plateau) return s;
  const double level = mass[s.plateau->i0];
  // Filling: M climbs from (near) zero to the plateau level before it starts.
  const double before_min = *std::min_element(mass.begin(), mass.begin() + s.plateau->i0 + 1);
  s.filling = s.plateau->i0 > 0 && before_min < 0.5 * level;
  const double after_min = *std::min_element(mass.begin() + s.plateau->i1, mass.end());
  s.leaving = s.plateau->i1 + 1 < mass.size() && after_min < 0.5 * mass[s.plateau->i1];
  return s;
}

double total_mass(const TriMesh& mesh, const Eigen::VectorXd& density) {
  return density.dot(mesh.areas());
}

Eigen::VectorXd to_probability_density(const TriMesh& mesh, const Eigen::VectorXd& density) {
  const double m = total_mass(mesh, density);
  if (!(m > 0)) throw std::domain_error("cannot normalize a density with zero total mass");
  return density / m;
}

Eigen::VectorXd to_mass_density(const Eigen::VectorXd& probability, double total) { return probability * total; }

double expected_count(const TriMesh& mesh, const Eigen::VectorXd& density, std::span<const int> region,
                      double total) {
  const double m = total_mass(mesh, density);
  if (!(m > 0)) return 0.0;
  double in = 0.0;
  for (int k : region) in += density[k] * mesh.area(k);
  return total / m * in;
}

}  // namespace crowdflow
