#include <crowdflow/parallel.hpp>
#include <crowdflow/transport.hpp>

#include <cmath>
#include <stdexcept>

namespace crowdflow {

std::string to_string(WallMode mode) { return mode == WallMode::scrape ? "scrape" : "stop"; }

WallMode parse_wall_mode(const std::string& text) {
  if (text == "scrape") return WallMode::scrape;
  if (text == "stop") return WallMode::stop;
  throw std::invalid_argument("unknown wall mode '" + text + "'");
}

Vec2 wall_correct(const Vec2& w, const Vec2& n, WallMode mode) {
  const double wn = w.dot(n);
  if (!(wn > 0)) return w;
  return mode == WallMode::scrape ? Vec2(w - wn * n) : Vec2::Zero();
}

Eigen::Matrix2Xd correct_at_walls(const TriMesh& mesh, Eigen::Matrix2Xd w, const BoundaryPolicy& policy) {
  const auto& edges = mesh.boundary_edges();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& near = mesh.boundary_near(k);
    if (near.empty()) continue;
    Vec2 v = w.col(k);
    // Two sweeps so that corner elements settle against both walls.
    for (int sweep = 0; sweep < 2; ++sweep)
      for (int id : near) {
        const auto& e = edges[id];
        if (e.label == BoundaryLabel::outlet && policy.outlet_open) continue;
        v = wall_correct(v, e.normal, policy.mode);
      }
    w.col(k) = v;
  }
  return w;
}

double stable_dt(const TriMesh& mesh, const Eigen::Matrix2Xd& w, double safety, double dt_max) {
  if (!(safety > 0 && safety <= 1)) throw std::invalid_argument("CFL safety factor must lie in (0, 1]");
  if (!(dt_max > 0)) throw std::invalid_argument("dt_max must be positive");
  const double vmax = w.size() ? w.colwise().norm().maxCoeff() : 0.0;
  if (!(vmax > 0)) return dt_max;
  return std::min(dt_max, safety * mesh.h_min() / vmax);
}

Transport::Transport(const TriMesh& mesh, bool outlet_open, int threads)
    : mesh_(&mesh),
      index_(mesh, std::max(mesh.h_max(), 2.0 * mesh.max_reach())),
      outlet_open_(outlet_open && std::isfinite(mesh.outlet_x())),
      threads_(std::max(1, threads)) {
  boxes_.reserve(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) boxes_.push_back(mesh.element(k).bounds());
}

StepResult Transport::step(const Eigen::VectorXd& density, const Eigen::Matrix2Xd& w, double dt) const {
  const TriMesh& mesh = *mesh_;
  const int ne = mesh.num_elements();
  if (density.size() != ne || w.cols() != ne) throw std::invalid_argument("transport: field size mismatch");
  if (!(dt >= 0)) throw std::invalid_argument("transport: negative time step");
  const double vmax = ne ? w.colwise().norm().maxCoeff() : 0.0;
  if (vmax * dt > mesh.h_min() * (1.0 + 1e-12))
    throw std::domain_error("transport: CFL violation, displacement " + std::to_string(vmax * dt) +
                            " exceeds h_min " + std::to_string(mesh.h_min()));

  constexpr int kChunks = 64;
  std::vector<std::vector<Contribution>> parts(kChunks);
  std::vector<double> egress(kChunks, 0.0), returned(kChunks, 0.0);
  const double x_out = mesh.outlet_x();
  const double reach = mesh.max_reach();

  for_each_chunk(ne, kChunks, threads_, [&](int c, int begin, int end) {
    auto& out = parts[c];
    std::vector<int> cand;
    std::array<Vec2, 3> moved;
    for (int k = begin; k < end; ++k) {
      const double rho = density[k];
      if (rho == 0.0) continue;
      const Vec2 shift = w.col(k) * dt;
      if (shift.x() == 0.0 && shift.y() == 0.0) {
        out.push_back({k, rho});
        continue;
      }
      const auto src = mesh.corners(k);
      for (int i = 0; i < 3; ++i) moved[i] = src[i] + shift;
      const Box2<double> box{boxes_[k].min + shift, boxes_[k].max + shift};
      index_.in_box(box.inflated(reach), cand);
      double covered = 0.0;
      for (int q : cand) {
        if (!boxes_[q].overlaps(box)) continue;
        const double a = triangle_overlap_area<double>(std::span<const Vec2, 3>(moved), mesh.corners(q));
        if (a == 0.0) continue;
        covered += a;
        out.push_back({q, rho * (a / mesh.area(q))});
      }
      double gone = 0.0;
      if (outlet_open_ && box.max.x() > x_out)
        gone = area_right_of<double>(std::span<const Vec2, 3>(moved), x_out);
      egress[c] += rho * gone;
      const double rest = mesh.area(k) - covered - gone;
      if (rest > 0.0) {
        returned[c] += rho * rest;
        out.push_back({k, rho * (rest / mesh.area(k))});
      }
    }
  });

  StepResult r;
  r.density = Eigen::VectorXd::Zero(ne);
  for (int c = 0; c < kChunks; ++c) {
    for (const auto& p : parts[c]) r.density[p.target] += p.density;
    r.egress += egress[c];
    r.returned += returned[c];
  }
  return r;
}

}  // namespace crowdflow
