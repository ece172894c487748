#include <crowdflow/log.hpp>
#include <crowdflow/mesh.hpp>

#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace crowdflow {

namespace {
std::atomic<LogLevel> g_level{LogLevel::warning};
std::mutex g_log_mutex;
}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warning(const std::string& message) {
  if (g_level == LogLevel::quiet) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "[crowdflow] warning: " << message << '\n';
}

void log_info(const std::string& message) {
  if (g_level != LogLevel::info) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "[crowdflow] " << message << '\n';
}

std::string to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::wall: return "wall";
    case BoundaryLabel::inlet: return "inlet";
    case BoundaryLabel::outlet: return "outlet";
  }
  return "wall";
}

BoundaryLabel parse_boundary_label(const std::string& text) {
  if (text == "wall") return BoundaryLabel::wall;
  if (text == "inlet") return BoundaryLabel::inlet;
  if (text == "outlet") return BoundaryLabel::outlet;
  throw std::invalid_argument("unknown boundary label '" + text + "'");
}

// ---------------------------------------------------------------------------
// DomainSpec

double DomainSpec::chord_at(double x) const {
  const double xc = std::max(x, 0.0);
  return chord ? chord(xc) : aspect;
}

double DomainSpec::centerline_at(double x) const {
  const double xc = std::max(x, 0.0);
  return centerline ? centerline(xc) : 0.0;
}

DomainSpec DomainSpec::rectangle(double aspect, double entrance_depth) {
  DomainSpec s;
  s.kind = Kind::rectangle;
  s.name = "rectangle";
  s.aspect = aspect;
  s.entrance_depth = entrance_depth;
  return s;
}

DomainSpec DomainSpec::bottleneck(double aspect, double depth, double width, double entrance_depth) {
  DomainSpec s;
  s.kind = Kind::walkway;
  s.name = "bottleneck";
  s.aspect = aspect;
  s.entrance_depth = entrance_depth;
  s.chord = [aspect, depth, width](double x) {
    const double z = (x - 0.5) / width;
    return aspect * (1.0 - depth * std::exp(-z * z));
  };
  return s;
}

DomainSpec DomainSpec::curved(double aspect, double rise, double entrance_depth) {
  DomainSpec s;
  s.kind = Kind::walkway;
  s.name = "curved";
  s.aspect = aspect;
  s.entrance_depth = entrance_depth;
  s.centerline = [rise](double x) {
    const double s = std::sin(EIGEN_PI * x);
    return rise * s * s;
  };
  return s;
}

DomainSpec DomainSpec::shifted(double aspect, double shift, double width, double entrance_depth) {
  DomainSpec s;
  s.kind = Kind::walkway;
  s.name = "shifted";
  s.aspect = aspect;
  s.entrance_depth = entrance_depth;
  s.centerline = [shift, width](double x) {
    return 0.5 * shift * (1.0 + std::tanh((x - 0.5) / width));
  };
  return s;
}

DomainSpec DomainSpec::by_name(const std::string& name, double aspect, double entrance_depth) {
  if (name == "rectangle") return rectangle(aspect, entrance_depth);
  if (name == "bottleneck") return bottleneck(aspect, 0.4, 0.1, entrance_depth);
  if (name == "curved") return curved(aspect, 0.05, entrance_depth);
  if (name == "shifted") return shifted(aspect, aspect, 0.1, entrance_depth);
  throw std::invalid_argument("unknown domain kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// TriMesh

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

TriMesh::TriMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
                 std::vector<LabeledEdge> labels, std::vector<bool> entrance)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), entrance_(std::move(entrance)) {
  const int nn = num_nodes();
  const int ne = num_elements();
  if (ne == 0) throw std::invalid_argument("mesh has no triangles");
  if (entrance_.empty()) entrance_.assign(ne, false);
  if (static_cast<int>(entrance_.size()) != ne)
    throw std::invalid_argument("entrance flags do not match triangle count");

  elements_.reserve(ne);
  corners_.resize(ne);
  centroids_.resize(2, ne);
  areas_.resize(ne);
  sizes_.resize(ne);
  for (int k = 0; k < ne; ++k) {
    auto& t = triangles_[k];
    for (int v : t)
      if (v < 0 || v >= nn) throw std::invalid_argument("triangle references a missing node");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw std::invalid_argument("triangle with repeated node");
    const double s = cross<double>(nodes_[t[1]] - nodes_[t[0]], nodes_[t[2]] - nodes_[t[0]]);
    if (s < 0) std::swap(t[1], t[2]);
    if (s == 0) throw std::invalid_argument("degenerate triangle " + std::to_string(k));
    corners_[k] = {nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]};
    elements_.push_back(Polygon2<double>::from_ccw_unchecked({nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]}));
    areas_[k] = crowdflow::area(elements_.back());
    const Vec2 c = (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
    centroids_.col(k) = c;
    double perimeter = 0.0;
    for (int i = 0; i < 3; ++i) {
      perimeter += (nodes_[t[(i + 1) % 3]] - nodes_[t[i]]).norm();
      max_reach_ = std::max(max_reach_, (nodes_[t[i]] - c).norm());
    }
    sizes_[k] = 2.0 * std::sqrt(3.0) * (2.0 * areas_[k] / perimeter);
  }
  total_area_ = areas_.sum();
  h_min_ = *std::min_element(sizes_.begin(), sizes_.end());
  h_max_ = *std::max_element(sizes_.begin(), sizes_.end());

  bounds_ = {nodes_.front(), nodes_.front()};
  for (const auto& p : nodes_) {
    bounds_.min = bounds_.min.cwiseMin(p);
    bounds_.max = bounds_.max.cwiseMax(p);
  }

  // Edge census: each interior edge shared by two triangles, each boundary edge by one.
  std::map<EdgeKey, std::pair<int, int>> owners;  // key -> (count, element)
  for (int k = 0; k < ne; ++k) {
    const auto& t = triangles_[k];
    for (int i = 0; i < 3; ++i) {
      auto& slot = owners[edge_key(t[i], t[(i + 1) % 3])];
      ++slot.first;
      slot.second = k;
    }
  }
  std::map<EdgeKey, BoundaryLabel> label_of;
  for (const auto& e : labels) {
    const auto key = edge_key(e.a, e.b);
    auto it = owners.find(key);
    if (it == owners.end() || it->second.first != 1)
      throw std::invalid_argument("labeled edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                  " is not a boundary edge");
    if (!label_of.emplace(key, e.label).second)
      throw std::invalid_argument("boundary edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                  " labeled twice");
  }

  std::vector<std::vector<int>> node_elements(nn);
  for (int k = 0; k < ne; ++k)
    for (int v : triangles_[k]) node_elements[v].push_back(k);

  outlet_x_ = -std::numeric_limits<double>::infinity();
  boundary_near_.assign(ne, {});
  for (const auto& [key, slot] : owners) {
    if (slot.first > 2)
      throw std::invalid_argument("edge shared by more than two triangles");
    if (slot.first != 1) continue;
    auto lab = label_of.find(key);
    if (lab == label_of.end())
      throw std::invalid_argument("unlabeled boundary edge " + std::to_string(key.first) + "-" +
                                  std::to_string(key.second));
    const int k = slot.second;
    const auto& t = triangles_[k];
    // Orient along the element's counterclockwise traversal.
    int a = key.first, b = key.second;
    for (int i = 0; i < 3; ++i)
      if (t[i] == b && t[(i + 1) % 3] == a) std::swap(a, b);
    BoundaryEdge be;
    be.a = a;
    be.b = b;
    be.element = k;
    be.label = lab->second;
    const Vec2 d = nodes_[b] - nodes_[a];
    be.length = d.norm();
    be.normal = Vec2(d.y(), -d.x()) / be.length;
    be.midpoint = 0.5 * (nodes_[a] + nodes_[b]);
    if (be.label == BoundaryLabel::outlet)
      outlet_x_ = std::max({outlet_x_, nodes_[a].x(), nodes_[b].x()});
    const int id = static_cast<int>(boundary_.size());
    boundary_.push_back(be);
    for (int v : {a, b})
      for (int e : node_elements[v]) {
        auto& near = boundary_near_[e];
        if (near.empty() || near.back() != id) near.push_back(id);
      }
  }
}

bool TriMesh::has_entrance() const {
  return std::find(entrance_.begin(), entrance_.end(), true) != entrance_.end();
}

// ---------------------------------------------------------------------------
// Generator

TriMesh generate_mesh(const DomainSpec& spec, double h) {
  if (!(h > 0) || !std::isfinite(h)) throw std::invalid_argument("mesh size h must be positive");
  if (!(spec.aspect > 0)) throw std::invalid_argument("domain aspect ratio must be positive");
  if (spec.entrance_depth < 0) throw std::invalid_argument("entrance depth must be nonnegative");
  if (spec.aspect > 0.5)
    log_warning("aspect ratio " + std::to_string(spec.aspect) + " is not small; walkway model assumes B/L << 1");

  double min_chord = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4000; ++i) {
    const double x = -spec.entrance_depth + (1.0 + spec.entrance_depth) * i / 4000.0;
    const double b = spec.chord_at(x);
    if (!(b > 0)) throw std::invalid_argument("chord must be positive everywhere");
    min_chord = std::min(min_chord, b);
  }
  if (!(h < min_chord)) throw std::invalid_argument("mesh size h must be smaller than the minimum chord");

  const int nx = static_cast<int>(std::ceil(1.0 / h - 1e-9));
  // Even row count so the diagonals can mirror about the centerline.
  const int ny = 2 * static_cast<int>(std::ceil(spec.aspect / (2 * h) - 1e-9));
  const double dx = 1.0 / nx;
  const int nb = spec.entrance_depth > 0
                     ? std::max(1, static_cast<int>(std::lround(spec.entrance_depth / dx)))
                     : 0;
  const int cols = nx + nb;

  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(cols + 1) * (ny + 1));
  auto node_id = [ny](int i, int j) { return i * (ny + 1) + j; };
  for (int i = 0; i <= cols; ++i) {
    const double x = (i - nb) * dx;
    const double b = spec.chord_at(x);
    const double yc = spec.centerline_at(x);
    for (int j = 0; j <= ny; ++j) {
      const double s = -0.5 + static_cast<double>(j) / ny;  // reference fraction of the chord
      nodes.emplace_back(x, yc + s * b);
    }
  }

  std::vector<TriMesh::Triangle> tris;
  std::vector<bool> entrance;
  tris.reserve(2 * static_cast<std::size_t>(cols) * ny);
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < ny; ++j) {
      const int n00 = node_id(i, j), n10 = node_id(i + 1, j);
      const int n01 = node_id(i, j + 1), n11 = node_id(i + 1, j + 1);
      if (2 * j < ny) {
        tris.push_back({n00, n10, n11});
        tris.push_back({n00, n11, n01});
      } else {
        tris.push_back({n00, n10, n01});
        tris.push_back({n10, n11, n01});
      }
      entrance.push_back(i < nb);
      entrance.push_back(i < nb);
    }

  std::vector<LabeledEdge> labels;
  for (int i = 0; i < cols; ++i) {
    labels.push_back({node_id(i, 0), node_id(i + 1, 0), BoundaryLabel::wall});
    labels.push_back({node_id(i, ny), node_id(i + 1, ny), BoundaryLabel::wall});
  }
  for (int j = 0; j < ny; ++j) {
    labels.push_back({node_id(0, j), node_id(0, j + 1), BoundaryLabel::inlet});
    labels.push_back({node_id(cols, j), node_id(cols, j + 1), BoundaryLabel::outlet});
  }
  return TriMesh(std::move(nodes), std::move(tris), std::move(labels), std::move(entrance));
}

}  // namespace crowdflow
