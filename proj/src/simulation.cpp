#include <crowdflow/observables.hpp>
#include <crowdflow/simulation.hpp>

#include <cmath>

namespace crowdflow {

Simulation::Simulation(const TriMesh& mesh, Eigen::Matrix2Xd desired, const SimulationParams& params,
                       Eigen::VectorXd initial, std::optional<ArrivalLaw> arrivals, double reservoir)
    : mesh_(&mesh),
      desired_(std::move(desired)),
      params_(params),
      interaction_(mesh, desired_, params.interaction),
      transport_(mesh, params.boundary.outlet_open, params.threads),
      density_(std::move(initial)) {
  if (density_.size() != mesh.num_elements()) throw std::invalid_argument("initial density size mismatch");
  if (!density_.allFinite() || (density_.array() < 0).any())
    throw std::invalid_argument("initial density must be finite and nonnegative");
  if (!(params.t_end > 0)) throw std::invalid_argument("t_end must be positive");
  if (arrivals) entrance_.emplace(mesh, *arrivals, reservoir, density_);
  series_.push_back(sample());
}

Eigen::Matrix2Xd Simulation::corrected_velocity() const {
  return correct_at_walls(*mesh_, total_velocity(desired_, interaction_.apply(density_)), params_.boundary);
}

Eigen::Matrix2Xd Simulation::velocity() const { return corrected_velocity(); }

Sample Simulation::sample() const {
  Sample s;
  s.t = t_;
  s.S = reservoir();
  s.I = Entrance::buffer_mass(*mesh_, density_);
  s.M = Entrance::walkway_mass(*mesh_, density_);
  s.G = egress_;
  return s;
}

double Simulation::advance(const Eigen::Matrix2Xd& w, double dt) {
  StepResult r = transport_.step(density_, w, dt);
  if (!r.density.allFinite())
    throw NumericalAbort("non-finite density at t = " + std::to_string(t_ + dt), t_, density_);
  density_ = std::move(r.density);
  egress_ += r.egress;
  if (entrance_) clamped_ += entrance_->step(density_, dt, r.egress).clamped;
  t_ += dt;
  ++steps_;
  series_.push_back(sample());
  return dt;
}

double Simulation::step() {
  const Eigen::Matrix2Xd w = corrected_velocity();
  return advance(w, stable_dt(*mesh_, w, params_.cfl_safety, params_.dt_max));
}

double Simulation::step(double dt) { return advance(corrected_velocity(), dt); }

void Simulation::run(double total, const std::function<void(const Simulation&)>& observer) {
  if (observer) observer(*this);
  const double target = (1.0 - kMassClosure) * total;
  while (t_ < params_.t_end) {
    if (total > 0 && egress_ >= target) break;
    if (!(total > 0) && steps_ > 0 && density_.isZero(0.0)) break;
    const Eigen::Matrix2Xd w = corrected_velocity();
    const double dt = std::min(stable_dt(*mesh_, w, params_.cfl_safety, params_.dt_max), params_.t_end - t_);
    advance(w, dt);
    if (observer) observer(*this);
  }
}

}  // namespace crowdflow
