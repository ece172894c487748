#pragma once

#include <crowdflow/entrance.hpp>
#include <crowdflow/interaction.hpp>
#include <crowdflow/mesh.hpp>
#include <crowdflow/transport.hpp>

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdflow {

struct SimulationParams {
  InteractionParams interaction;
  BoundaryPolicy boundary;
  double cfl_safety = 0.9;
  double dt_max = 0.01;
  double t_end = 20.0;
  int threads = 1;
};

/// Bulk state after a step, masses in the units of the density integral.
struct Sample {
  double t = 0.0;
  double S = 0.0;  // reservoir
  double I = 0.0;  // entrance buffer
  double M = 0.0;  // walkway
  double G = 0.0;  // cumulative egress
};

/// Raised when the density stops being finite. Carries the last finite field.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, double t, Eigen::VectorXd last_valid)
      : std::runtime_error(what), time(t), last_valid(std::move(last_valid)) {}
  double time;
  Eigen::VectorXd last_valid;
};

/// Explicit evolution of a density under w = v_d + v_i[rho] on a fixed mesh,
/// optionally fed by a reservoir through the entrance buffer.
class Simulation {
 public:
  Simulation(const TriMesh& mesh, Eigen::Matrix2Xd desired, const SimulationParams& params,
             Eigen::VectorXd initial, std::optional<ArrivalLaw> arrivals = std::nullopt, double reservoir = 0.0);

  /// One step with the CFL time step; returns the dt used.
  double step();
  /// One step with a prescribed dt (must satisfy the CFL bound).
  double step(double dt);

  /// Steps until G >= (1 - kMassClosure) * total or t >= t_end. The observer
  /// is called once before the first step and after every step.
  void run(double total, const std::function<void(const Simulation&)>& observer = {});

  double time() const { return t_; }
  int steps() const { return steps_; }
  const TriMesh& mesh() const { return *mesh_; }
  const Eigen::VectorXd& density() const { return density_; }
  const Eigen::Matrix2Xd& desired() const { return desired_; }
  /// Corrected total velocity used by the last step (or that the next step would use).
  Eigen::Matrix2Xd velocity() const;
  const InteractionOperator& interaction() const { return interaction_; }
  double egress() const { return egress_; }
  double reservoir() const { return entrance_ ? entrance_->reservoir() : 0.0; }
  double clamped() const { return clamped_; }
  Sample sample() const;
  const std::vector<Sample>& series() const { return series_; }
  const SimulationParams& params() const { return params_; }

 private:
  Eigen::Matrix2Xd corrected_velocity() const;
  double advance(const Eigen::Matrix2Xd& w, double dt);

  const TriMesh* mesh_;
  Eigen::Matrix2Xd desired_;
  SimulationParams params_;
  InteractionOperator interaction_;
  Transport transport_;
  std::optional<Entrance> entrance_;
  Eigen::VectorXd density_;
  double t_ = 0.0;
  double egress_ = 0.0;
  double clamped_ = 0.0;
  int steps_ = 0;
  std::vector<Sample> series_;
};

}  // namespace crowdflow
