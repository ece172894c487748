#pragma once

#include <crowdflow/mesh.hpp>

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdflow {

/// Wall-inclination parameter of the parabolic potential: q = tan(theta) / B~.
double potential_curvature(double theta, double aspect);

/// Closed-form desired velocity on the rectangle, (1, -2 q y) / sqrt(1 + 4 q^2 y^2).
Vec2 rect_desired_velocity(double theta, double aspect, double y);

/// Desired-velocity field v_d = -grad u / |grad u| with u piecewise linear.
struct PotentialField {
  double theta = 0.0;
  double q = 0.0;
  Eigen::VectorXd nodal;       // u at mesh nodes
  Eigen::Matrix2Xd gradient;   // per-element grad u
  Eigen::Matrix2Xd desired;    // per-element unit v_d
  int solver_iterations = 0;
  double solver_residual = 0.0;
  std::vector<std::string> warnings;

  Vec2 desired_at(int k) const { return desired.col(k); }
};

/// Galerkin P1 solution of
///   lap u = 2q in D,  du/dn = tan(theta) b~/B~ on walls,  u = -x + q (y - y_c)^2 on inlet/outlet.
/// Throws std::runtime_error when the mesh has no Dirichlet edges or the solve fails.
PotentialField solve_potential(const TriMesh& mesh, const DomainSpec& spec, double theta);

/// Gradient of the potential at an arbitrary point, recovered by a local quadratic
/// least-squares fit to nodal values.
Vec2 recovered_gradient(const TriMesh& mesh, const CentroidIndex& index, const PotentialField& field,
                        const Vec2& p);

struct ChordSample {
  double y = 0.0;
  double gamma = 0.0;        // angle between v_d and e_x
  double alpha_i = 0.0;      // interpolated wall inclination
  double beta = 0.0;         // gamma - alpha_i
};

struct AngleDiagnostics {
  Eigen::VectorXd gamma;           // per element
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double x = 0.0;                  // section abscissa
  double y1 = 0.0;                 // lower chord end
  double y2 = 0.0;                 // upper chord end
  std::vector<ChordSample> section;
};

/// Interpolated wall angle |a1 (y - y2)/(y1 - y2) - a2 (y - y1)/(y2 - y1)|.
double interpolated_wall_angle(double y, double y1, double y2, double alpha1, double alpha2);

/// Angle of v_d to e_x, in [0, pi].
double desired_angle(const Vec2& vd);

/// Per-element gamma and gamma, alpha_i, beta at `samples` points along the chord at x.
/// Samples include both chord ends. Throws std::invalid_argument for a degenerate chord.
AngleDiagnostics angle_diagnostics(const TriMesh& mesh, const PotentialField& field, double x,
                                   double alpha1, double alpha2, int samples = 33);

/// Chord ends (lower, upper) of the section x, from the wall edges of the mesh.
std::pair<double, double> chord_ends(const TriMesh& mesh, double x);

/// CSV with columns x,y,u,vdx,vdy (one row per element, centroid values).
void write_field_csv(const TriMesh& mesh, const PotentialField& field, std::ostream& os,
                     double length_scale = 1.0);

}  // namespace crowdflow
