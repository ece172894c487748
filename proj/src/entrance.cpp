#include <crowdflow/entrance.hpp>
#include <crowdflow/log.hpp>

#include <cmath>
#include <stdexcept>

namespace crowdflow {

void ArrivalLaw::validate() const {
  if (!(inflow >= 0)) throw std::invalid_argument("inflow rate F must be nonnegative");
  if (!(fade > 0 && fade < 1)) throw std::invalid_argument("fade-out ratio p must lie in (0, 1)");
  if (!(total >= 0)) throw std::invalid_argument("total arrivals N must be nonnegative");
  if (!(capacity > 0)) throw std::invalid_argument("buffer capacity C must be positive");
}

double sigma(double reservoir, const ArrivalLaw& law) {
  if (!(reservoir > 0) || !(law.total > 0)) return 0.0;
  const double ratio = reservoir / law.total;
  return ratio < law.fade ? law.inflow * ratio / law.fade : law.inflow;
}

double arrival_rate(double reservoir, double buffer, const ArrivalLaw& law) {
  return sigma(reservoir, law) * (1.0 - buffer / law.capacity);
}

double Entrance::buffer_mass(const TriMesh& mesh, const Eigen::VectorXd& density) {
  double m = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k)
    if (mesh.in_entrance(k)) m += density[k] * mesh.area(k);
  return m;
}

double Entrance::walkway_mass(const TriMesh& mesh, const Eigen::VectorXd& density) {
  double m = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k)
    if (!mesh.in_entrance(k)) m += density[k] * mesh.area(k);
  return m;
}

Entrance::Entrance(const TriMesh& mesh, const ArrivalLaw& law, double reservoir,
                   const Eigen::VectorXd& initial_density)
    : mesh_(&mesh), law_(law), reservoir_(reservoir) {
  law.validate();
  if (!(reservoir >= 0)) throw std::invalid_argument("reservoir must be nonnegative");
  for (int k = 0; k < mesh.num_elements(); ++k)
    if (mesh.in_entrance(k)) {
      elements_.push_back(k);
      area_ += mesh.area(k);
    }
  if (!(area_ > 0)) throw std::invalid_argument("entrance region has zero area");
  buffer_ = buffer_mass(mesh, initial_density);
  domain_ = walkway_mass(mesh, initial_density);
}

EntranceReport Entrance::step(Eigen::VectorXd& density, double dt, double egress) {
  const TriMesh& mesh = *mesh_;
  EntranceReport rep;
  const double buffer_now = buffer_mass(mesh, density);  // I_{n+1}, after transport
  const double domain_now = walkway_mass(mesh, density);  // Phi_{n+1}

  rep.rate = arrival_rate(reservoir_, buffer_now, law_);
  // Net mass carried from the buffer into the walkway by transport (walkway gain plus egress).
  rep.transfer = (domain_now - domain_) + egress;

  double s = reservoir_ - dt * rep.rate;
  double b = buffer_ + dt * rep.rate - rep.transfer;
  if (s < 0) {
    // Overdraft of the reservoir is charged back to the buffer.
    b += s;
    rep.clamped += -s;
    log_info("entrance: reservoir overdraft " + std::to_string(-s) + " clamped");
    s = 0;
  }
  if (b < 0) {
    // Buffer deficit is returned to the reservoir.
    s += b;
    rep.clamped += -b;
    log_info("entrance: buffer deficit " + std::to_string(-b) + " clamped");
    b = 0;
    if (s < 0) s = 0;
  }
  reservoir_ = s;
  buffer_ = b;
  domain_ = domain_now;

  const double rho = buffer_ / area_;
  for (int k : elements_) density[k] = rho;
  return rep;
}

}  // namespace crowdflow
