#pragma once

#include <crowdflow/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace crowdflow {

/// Repulsion kernel parameters, all in scaled units.
struct InteractionParams {
  double strength = 0.0;           // c
  double radius = 0.02;            // R / L
  double half_angle = EIGEN_PI / 4;  // alpha
  double r_min = 0.0;              // distance clamp for the 1/r singularity

  void validate() const;
};

/// Midpoint-rule interaction velocity at element k:
///   sum over j != k with centroid in the sensory sector of -c e_r / max(r, r_min) rho_j |E_j|,
/// the sector being oriented along desired.col(k). Direct O(Q) evaluation.
Vec2 interaction_velocity(const TriMesh& mesh, int k, const Eigen::VectorXd& density,
                          const Eigen::Matrix2Xd& desired, const InteractionParams& params);

/// Precomputed linear map density -> v_i for all elements.
///
/// The sensory sectors follow v_d, which does not change in time, so the
/// kernel weights are assembled once into two sparse matrices.
class InteractionOperator {
 public:
  InteractionOperator(const TriMesh& mesh, const Eigen::Matrix2Xd& desired, const InteractionParams& params);

  /// Interaction velocity for every element (2 x Q).
  Eigen::Matrix2Xd apply(const Eigen::VectorXd& density) const;

  const InteractionParams& params() const { return params_; }
  /// Elements inside the sensory sector of element k, sorted by index.
  std::vector<int> sector_members(int k) const;
  Eigen::Index nonzeros() const { return wx_.nonZeros(); }

 private:
  InteractionParams params_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> wx_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> wy_;
};

/// w = v_d + v_i.
Eigen::Matrix2Xd total_velocity(const Eigen::Matrix2Xd& desired, const Eigen::Matrix2Xd& interaction);

}  // namespace crowdflow
