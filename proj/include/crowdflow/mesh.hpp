#pragma once

#include <crowdflow/geometry.hpp>

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace crowdflow {

enum class BoundaryLabel { wall, inlet, outlet };

std::string to_string(BoundaryLabel label);
BoundaryLabel parse_boundary_label(const std::string& text);

/// Walkway plan shape in scaled coordinates (lengths divided by the span L).
///
/// The walkway occupies 0 <= x <= 1 with walls at centerline(x) +- chord(x)/2.
/// An optional entrance strip of depth `entrance_depth` is attached upstream
/// (x < 0) with the chord and centerline frozen at their x = 0 values.
struct DomainSpec {
  enum class Kind { rectangle, walkway };

  Kind kind = Kind::rectangle;
  std::string name = "rectangle";
  double aspect = 1.0 / 25.0;  // reference chord B~ = B / L
  std::function<double(double)> chord;       // b~(x)
  std::function<double(double)> centerline;  // lateral offset of the mid-chord line
  double entrance_depth = 0.0;

  double chord_at(double x) const;
  double centerline_at(double x) const;

  static DomainSpec rectangle(double aspect, double entrance_depth = 0.0);
  /// Symmetric contraction b~ = B~ (1 - depth exp(-((x - 0.5) / width)^2)).
  static DomainSpec bottleneck(double aspect, double depth = 0.4, double width = 0.1,
                               double entrance_depth = 0.0);
  /// Constant chord along the arch y = rise sin^2(pi x), level at both ends.
  static DomainSpec curved(double aspect, double rise = 0.05, double entrance_depth = 0.0);
  /// Constant chord whose centerline moves laterally by `shift` around mid-span.
  static DomainSpec shifted(double aspect, double shift = 0.04, double width = 0.1,
                            double entrance_depth = 0.0);
  static DomainSpec by_name(const std::string& name, double aspect, double entrance_depth = 0.0);
};

struct LabeledEdge {
  int a = 0;
  int b = 0;
  BoundaryLabel label = BoundaryLabel::wall;
};

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int element = 0;
  BoundaryLabel label = BoundaryLabel::wall;
  Vec2 normal = Vec2::Zero();  // outward, unit length
  Vec2 midpoint = Vec2::Zero();
  double length = 0.0;
};

/// Unstructured triangular mesh with labeled boundary. Immutable after construction.
class TriMesh {
 public:
  using Triangle = std::array<int, 3>;

  TriMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
          std::vector<LabeledEdge> labels, std::vector<bool> entrance = {});

  int num_elements() const { return static_cast<int>(triangles_.size()); }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Polygon2<double>& element(int k) const { return elements_[k]; }
  std::span<const Vec2, 3> corners(int k) const { return std::span<const Vec2, 3>(corners_[k]); }

  const Eigen::Matrix2Xd& centroids() const { return centroids_; }
  Vec2 centroid(int k) const { return centroids_.col(k); }
  const Eigen::VectorXd& areas() const { return areas_; }
  double area(int k) const { return areas_[k]; }
  double total_area() const { return total_area_; }

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  /// Indices into boundary_edges() of the edges touching element k (by edge or vertex).
  const std::vector<int>& boundary_near(int k) const { return boundary_near_[k]; }

  bool in_entrance(int k) const { return entrance_[k]; }
  const std::vector<bool>& entrance_flags() const { return entrance_; }
  bool has_entrance() const;

  /// Characteristic element size 2 sqrt(3) * inradius (edge length for equilateral triangles).
  double element_size(int k) const { return sizes_[k]; }
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  /// Largest centroid-to-vertex distance over all elements.
  double max_reach() const { return max_reach_; }
  const Box2<double>& bounds() const { return bounds_; }
  /// x coordinate of the outlet section (max x over outlet edges).
  double outlet_x() const { return outlet_x_; }

 private:
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Polygon2<double>> elements_;
  std::vector<std::array<Vec2, 3>> corners_;
  Eigen::Matrix2Xd centroids_;
  Eigen::VectorXd areas_;
  std::vector<double> sizes_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::vector<int>> boundary_near_;
  std::vector<bool> entrance_;
  Box2<double> bounds_;
  double total_area_ = 0.0;
  double h_min_ = 0.0;
  double h_max_ = 0.0;
  double max_reach_ = 0.0;
  double outlet_x_ = 0.0;
};

/// Structured split-quad triangulation of the domain, mapped through the chord
/// and centerline profiles. Inlet at the upstream end, outlet at x = 1, walls lateral.
TriMesh generate_mesh(const DomainSpec& spec, double h);

/// Uniform bucket grid over element centroids.
class CentroidIndex {
 public:
  CentroidIndex(const TriMesh& mesh, double cell_size);

  double cell_size() const { return cell_; }

  /// Elements whose centroid lies within distance r of p, sorted by index.
  std::vector<int> within(const Vec2& p, double r) const;
  /// Elements whose centroid lies inside the box, sorted by index.
  void in_box(const Box2<double>& box, std::vector<int>& out) const;

 private:
  std::pair<int, int> cell_of(const Vec2& p) const;

  const TriMesh* mesh_;
  double cell_;
  Vec2 origin_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> start_;
  std::vector<int> items_;
};

/// Elements whose centroid lies within distance r of p.
std::vector<int> radius_query(const TriMesh& mesh, const Vec2& p, double r);
std::vector<int> radius_query(const CentroidIndex& index, const Vec2& p, double r);

/// Index of an element containing p, or -1.
int locate(const TriMesh& mesh, const CentroidIndex& index, const Vec2& p);

void save_mesh(const TriMesh& mesh, std::ostream& os);
void save_mesh(const TriMesh& mesh, const std::string& path);
TriMesh load_mesh(std::istream& is);
TriMesh load_mesh(const std::string& path);

}  // namespace crowdflow
