#pragma once

#include <crowdflow/mesh.hpp>

#include <Eigen/Core>

#include <string>
#include <vector>

namespace crowdflow {

/// Behaviour of the total velocity at impermeable boundaries.
enum class WallMode {
  scrape,  // drop the outward normal component
  stop,    // zero the velocity when it points outward
};

std::string to_string(WallMode mode);
WallMode parse_wall_mode(const std::string& text);

/// Wall correction of a velocity against outward unit normal n.
Vec2 wall_correct(const Vec2& w, const Vec2& n, WallMode mode);

struct BoundaryPolicy {
  WallMode mode = WallMode::scrape;
  bool outlet_open = true;  // false seals the outlet like a wall
};

/// Applies wall_correct to every element touching an impermeable boundary edge
/// (walls, the inlet, and the outlet when sealed), against each such edge's normal.
Eigen::Matrix2Xd correct_at_walls(const TriMesh& mesh, Eigen::Matrix2Xd w, const BoundaryPolicy& policy);

/// safety * h_min / max |w|, or dt_max when the field vanishes or the bound exceeds dt_max.
double stable_dt(const TriMesh& mesh, const Eigen::Matrix2Xd& w, double safety, double dt_max);

struct StepResult {
  Eigen::VectorXd density;
  double egress = 0.0;    // mass that left through the outlet
  double returned = 0.0;  // mass of translated parts falling outside the mesh, kept in the source
};

/// Push-forward finite-volume transport on a fixed triangulation.
///
/// Each element is translated rigidly by w_k dt and its mass is scattered to the
/// elements it overlaps, in proportion to the overlap areas. Parts crossing the
/// outlet section leave the domain; any other uncovered part stays in the source.
class Transport {
 public:
  explicit Transport(const TriMesh& mesh, bool outlet_open = true, int threads = 1);

  /// One step. Throws std::domain_error when max |w| dt exceeds h_min.
  StepResult step(const Eigen::VectorXd& density, const Eigen::Matrix2Xd& w, double dt) const;

  void set_threads(int threads) { threads_ = std::max(1, threads); }
  bool outlet_open() const { return outlet_open_; }

 private:
  struct Contribution {
    int target;
    double density;
  };

  const TriMesh* mesh_;
  CentroidIndex index_;
  std::vector<Box2<double>> boxes_;
  bool outlet_open_;
  int threads_;
};

}  // namespace crowdflow
