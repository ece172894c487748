#include <crowdflow/interaction.hpp>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace crowdflow {

void InteractionParams::validate() const {
  if (!(strength >= 0)) throw std::invalid_argument("repulsion strength c must be nonnegative");
  if (!(radius > 0)) throw std::invalid_argument("sensory radius must be positive");
  if (!(half_angle > 0 && half_angle < EIGEN_PI / 2))
    throw std::invalid_argument("sensory half angle must lie in (0, pi/2)");
  if (!(r_min > 0)) throw std::invalid_argument("kernel clamp distance must be positive");
}

namespace {

// Kernel weight of element j seen from element k (without the density factor),
// or nullopt when j is outside the sector.
std::optional<Vec2> kernel_weight(const TriMesh& mesh, int k, int j, const Sector<double>& sector,
                                  const InteractionParams& p) {
  if (j == k) return std::nullopt;
  const Vec2 xj = mesh.centroid(j);
  if (!sector.contains(xj)) return std::nullopt;
  const Vec2 d = xj - sector.center;
  const double r = d.norm();
  return Vec2(-p.strength * (d / r) / std::max(r, p.r_min) * mesh.area(j));
}

}  // namespace

Vec2 interaction_velocity(const TriMesh& mesh, int k, const Eigen::VectorXd& density,
                          const Eigen::Matrix2Xd& desired, const InteractionParams& params) {
  params.validate();
  const Sector<double> sector(mesh.centroid(k), desired.col(k), params.radius, params.half_angle);
  Vec2 v = Vec2::Zero();
  for (int j = 0; j < mesh.num_elements(); ++j)
    if (auto w = kernel_weight(mesh, k, j, sector, params)) v += *w * density[j];
  return v;
}

InteractionOperator::InteractionOperator(const TriMesh& mesh, const Eigen::Matrix2Xd& desired,
                                         const InteractionParams& params)
    : params_(params) {
  params.validate();
  const int ne = mesh.num_elements();
  if (desired.cols() != ne) throw std::invalid_argument("desired velocity size does not match mesh");
  const CentroidIndex index(mesh, params.radius);
  std::vector<Eigen::Triplet<double>> tx, ty;
  for (int k = 0; k < ne; ++k) {
    const Sector<double> sector(mesh.centroid(k), desired.col(k), params.radius, params.half_angle);
    for (int j : index.within(mesh.centroid(k), params.radius)) {
      if (auto w = kernel_weight(mesh, k, j, sector, params)) {
        tx.emplace_back(k, j, w->x());
        ty.emplace_back(k, j, w->y());
      }
    }
  }
  wx_.resize(ne, ne);
  wy_.resize(ne, ne);
  wx_.setFromTriplets(tx.begin(), tx.end());
  wy_.setFromTriplets(ty.begin(), ty.end());
}

Eigen::Matrix2Xd InteractionOperator::apply(const Eigen::VectorXd& density) const {
  Eigen::Matrix2Xd v(2, density.size());
  v.row(0) = (wx_ * density).transpose();
  v.row(1) = (wy_ * density).transpose();
  return v;
}

std::vector<int> InteractionOperator::sector_members(int k) const {
  std::vector<int> out;
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(wx_, k); it; ++it)
    out.push_back(static_cast<int>(it.col()));
  return out;
}

Eigen::Matrix2Xd total_velocity(const Eigen::Matrix2Xd& desired, const Eigen::Matrix2Xd& interaction) {
  if (desired.cols() != interaction.cols()) throw std::invalid_argument("velocity field size mismatch");
  return desired + interaction;
}

}  // namespace crowdflow
