#include <crowdflow/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdflow {

CentroidIndex::CentroidIndex(const TriMesh& mesh, double cell_size) : mesh_(&mesh), cell_(cell_size) {
  if (!(cell_size > 0)) throw std::invalid_argument("index cell size must be positive");
  const auto& b = mesh.bounds();
  origin_ = b.min;
  const Vec2 extent = b.max - b.min;
  // Cap the grid so that tiny radii on large meshes do not explode memory.
  const double max_cells = 4.0e6;
  if ((extent.x() / cell_ + 1) * (extent.y() / cell_ + 1) > max_cells)
    cell_ = std::sqrt(extent.x() * extent.y() / max_cells) + 1e-12;
  nx_ = std::max(1, static_cast<int>(std::floor(extent.x() / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::floor(extent.y() / cell_)) + 1);

  const int ne = mesh.num_elements();
  std::vector<int> cell_of_elem(ne);
  start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (int k = 0; k < ne; ++k) {
    auto [i, j] = cell_of(mesh.centroid(k));
    cell_of_elem[k] = i * ny_ + j;
    ++start_[cell_of_elem[k] + 1];
  }
  for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
  items_.resize(ne);
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (int k = 0; k < ne; ++k) items_[fill[cell_of_elem[k]]++] = k;
}

std::pair<int, int> CentroidIndex::cell_of(const Vec2& p) const {
  const int i = std::clamp(static_cast<int>(std::floor((p.x() - origin_.x()) / cell_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y() - origin_.y()) / cell_)), 0, ny_ - 1);
  return {i, j};
}

void CentroidIndex::in_box(const Box2<double>& box, std::vector<int>& out) const {
  out.clear();
  const auto [i0, j0] = cell_of(box.min);
  const auto [i1, j1] = cell_of(box.max);
  const auto& c = mesh_->centroids();
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j) {
      const int cell = i * ny_ + j;
      for (int s = start_[cell]; s < start_[cell + 1]; ++s) {
        const int k = items_[s];
        const double x = c(0, k), y = c(1, k);
        if (x >= box.min.x() && x <= box.max.x() && y >= box.min.y() && y <= box.max.y()) out.push_back(k);
      }
    }
  std::sort(out.begin(), out.end());
}

std::vector<int> CentroidIndex::within(const Vec2& p, double r) const {
  std::vector<int> out;
  in_box(Box2<double>{p, p}.inflated(r), out);
  const auto& c = mesh_->centroids();
  const double r2 = r * r;
  std::erase_if(out, [&](int k) { return (c.col(k) - p).squaredNorm() > r2; });
  return out;
}

std::vector<int> radius_query(const CentroidIndex& index, const Vec2& p, double r) {
  if (!(r > 0)) throw std::invalid_argument("query radius must be positive");
  return index.within(p, r);
}

std::vector<int> radius_query(const TriMesh& mesh, const Vec2& p, double r) {
  if (!(r > 0)) throw std::invalid_argument("query radius must be positive");
  return CentroidIndex(mesh, r).within(p, r);
}

int locate(const TriMesh& mesh, const CentroidIndex& index, const Vec2& p) {
  std::vector<int> cand;
  index.in_box(Box2<double>{p, p}.inflated(mesh.max_reach() * (1 + 1e-9)), cand);
  const double tol = 1e-14;
  for (int k : cand) {
    const auto v = mesh.corners(k);
    bool inside = true;
    for (int i = 0; i < 3 && inside; ++i) {
      const Vec2 e = v[(i + 1) % 3] - v[i];
      inside = cross<double>(e, p - v[i]) >= -tol * e.norm();
    }
    if (inside) return k;
  }
  return -1;
}

}  // namespace crowdflow
