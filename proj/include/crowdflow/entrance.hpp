#pragma once

#include <crowdflow/mesh.hpp>

#include <Eigen/Core>

#include <vector>

namespace crowdflow {

/// Arrival law of the reservoir. All masses in the same units as the density integral.
struct ArrivalLaw {
  double inflow = 0.0;     // F, ideal arrival rate
  double fade = 0.1;       // p, reservoir fraction below which the rate fades out
  double total = 0.0;      // N, total arrivals
  double capacity = 1.0;   // C, buffer capacity

  void validate() const;
};

/// F * min(1, S / (N p)): constant plateau that ramps linearly to zero as the reservoir empties.
double sigma(double reservoir, const ArrivalLaw& law);

/// f = sigma(S) (1 - I / C); negative (reverse flux) when the buffer exceeds capacity.
double arrival_rate(double reservoir, double buffer, const ArrivalLaw& law);

struct EntranceReport {
  double rate = 0.0;         // f evaluated this step
  double transfer = 0.0;     // net mass that left the buffer through transport
  double clamped = 0.0;      // mass moved by the non-negativity clamps
};

/// Reservoir -> buffer -> walkway process on the entrance elements of a mesh.
class Entrance {
 public:
  /// `initial_density` fixes the starting buffer and walkway masses.
  Entrance(const TriMesh& mesh, const ArrivalLaw& law, double reservoir, const Eigen::VectorXd& initial_density);

  /// Post-transport update: advances S and the buffer mass, then overwrites the
  /// buffer density uniformly. `egress` is the mass that left the mesh during transport.
  EntranceReport step(Eigen::VectorXd& density, double dt, double egress);

  double reservoir() const { return reservoir_; }
  double buffer() const { return buffer_; }
  double domain_mass() const { return domain_; }
  double buffer_area() const { return area_; }
  const ArrivalLaw& law() const { return law_; }
  const std::vector<int>& elements() const { return elements_; }

  /// Mass on entrance elements and on the remaining (walkway) elements.
  static double buffer_mass(const TriMesh& mesh, const Eigen::VectorXd& density);
  static double walkway_mass(const TriMesh& mesh, const Eigen::VectorXd& density);

 private:
  const TriMesh* mesh_;
  ArrivalLaw law_;
  std::vector<int> elements_;
  double area_ = 0.0;
  double reservoir_ = 0.0;  // S
  double buffer_ = 0.0;     // I after the last overwrite
  double domain_ = 0.0;     // Phi, walkway mass after the last step
};

}  // namespace crowdflow
