#include <crowdflow/log.hpp>
#include <crowdflow/potential.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>
#include <Eigen/SparseCore>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace crowdflow {

double potential_curvature(double theta, double aspect) { return std::tan(theta) / aspect; }

Vec2 rect_desired_velocity(double theta, double aspect, double y) {
  const double q = potential_curvature(theta, aspect);
  const double s = -2.0 * q * y;
  return Vec2(1.0, s) / std::sqrt(1.0 + s * s);
}

namespace {

// Gradients of the three barycentric shape functions of a CCW triangle.
Eigen::Matrix<double, 2, 3> shape_gradients(std::span<const Vec2, 3> p, double area) {
  Eigen::Matrix<double, 2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = p[(i + 1) % 3];
    const Vec2& b = p[(i + 2) % 3];
    g.col(i) = Vec2(a.y() - b.y(), b.x() - a.x()) / (2.0 * area);
  }
  return g;
}

}  // namespace

PotentialField solve_potential(const TriMesh& mesh, const DomainSpec& spec, double theta) {
  if (!(theta >= 0 && theta < EIGEN_PI / 2)) throw std::invalid_argument("theta must lie in [0, pi/2)");
  const int nn = mesh.num_nodes();
  const int ne = mesh.num_elements();
  const double q = potential_curvature(theta, spec.aspect);
  const double tan_theta = std::tan(theta);

  PotentialField field;
  field.theta = theta;
  field.q = q;

  // Dirichlet data on inlet and outlet nodes.
  std::vector<char> fixed(nn, 0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nn);
  for (const auto& e : mesh.boundary_edges()) {
    if (e.label == BoundaryLabel::wall) continue;
    for (int v : {e.a, e.b}) {
      const Vec2& p = mesh.nodes()[v];
      const double y = p.y() - spec.centerline_at(p.x());
      fixed[v] = 1;
      u[v] = -p.x() + q * y * y;
    }
  }
  if (std::find(fixed.begin(), fixed.end(), 1) == fixed.end())
    throw std::runtime_error("potential problem has no Dirichlet (inlet/outlet) edges");

  std::vector<int> slot(nn, -1);
  int nfree = 0;
  for (int v = 0; v < nn; ++v)
    if (!fixed[v]) slot[v] = nfree++;

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * static_cast<std::size_t>(ne));
  for (int k = 0; k < ne; ++k) {
    const auto& t = mesh.triangles()[k];
    const double a = mesh.area(k);
    const auto g = shape_gradients(mesh.corners(k), a);
    const Eigen::Matrix3d ke = a * g.transpose() * g;
    for (int i = 0; i < 3; ++i) {
      const int si = slot[t[i]];
      if (si < 0) continue;
      rhs[si] -= 2.0 * q * a / 3.0;
      for (int j = 0; j < 3; ++j) {
        const int sj = slot[t[j]];
        if (sj < 0)
          rhs[si] -= ke(i, j) * u[t[j]];
        else
          trip.emplace_back(si, sj, ke(i, j));
      }
    }
  }
  for (const auto& e : mesh.boundary_edges()) {
    if (e.label != BoundaryLabel::wall) continue;
    const double flux = tan_theta * spec.chord_at(e.midpoint.x()) / spec.aspect;
    for (int v : {e.a, e.b})
      if (slot[v] >= 0) rhs[slot[v]] += 0.5 * flux * e.length;
  }

  if (nfree > 0) {
    Eigen::SparseMatrix<double> K(nfree, nfree);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(std::max(1000, 10 * nfree));
    cg.compute(K);
    if (cg.info() != Eigen::Success) throw std::runtime_error("potential: preconditioner setup failed");
    const Eigen::VectorXd sol = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw std::runtime_error("potential: conjugate gradient did not converge (residual " +
                               std::to_string(cg.error()) + ")");
    field.solver_iterations = static_cast<int>(cg.iterations());
    field.solver_residual = cg.error();
    for (int v = 0; v < nn; ++v)
      if (slot[v] >= 0) u[v] = sol[slot[v]];
  }
  field.nodal = std::move(u);

  field.gradient.resize(2, ne);
  field.desired.resize(2, ne);
  int stationary = 0;
  for (int k = 0; k < ne; ++k) {
    const auto& t = mesh.triangles()[k];
    const auto g = shape_gradients(mesh.corners(k), mesh.area(k));
    const Vec2 grad = g * Eigen::Vector3d(field.nodal[t[0]], field.nodal[t[1]], field.nodal[t[2]]);
    field.gradient.col(k) = grad;
    const double n = grad.norm();
    if (n < 1e-12) {
      field.desired.col(k) = Vec2::UnitX();
      ++stationary;
    } else {
      field.desired.col(k) = -grad / n;
    }
  }
  if (stationary > 0) {
    field.warnings.push_back(std::to_string(stationary) +
                             " element(s) with vanishing potential gradient; v_d set to e_x");
    log_warning(field.warnings.back());
  }
  return field;
}

Vec2 recovered_gradient(const TriMesh& mesh, const CentroidIndex& index, const PotentialField& field,
                        const Vec2& p) {
  const double s = mesh.h_max();
  std::vector<int> elems = index.within(p, 2.5 * s);
  std::vector<int> nodes;
  for (int k : elems)
    for (int v : mesh.triangles()[k]) nodes.push_back(v);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  if (nodes.size() >= 6) {
    Eigen::MatrixXd A(nodes.size(), 6);
    Eigen::VectorXd b(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Vec2 d = (mesh.nodes()[nodes[i]] - p) / s;
      A.row(i) << 1.0, d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
      b[i] = field.nodal[nodes[i]];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() == 6) {
      const Eigen::VectorXd c = qr.solve(b);
      return Vec2(c[1], c[2]) / s;
    }
  }
  const int k = locate(mesh, index, p);
  if (k < 0) throw std::invalid_argument("recovered_gradient: point outside the mesh");
  return field.gradient.col(k);
}

double interpolated_wall_angle(double y, double y1, double y2, double alpha1, double alpha2) {
  return std::abs(alpha1 * (y - y2) / (y1 - y2) - alpha2 * (y - y1) / (y2 - y1));
}

double desired_angle(const Vec2& vd) {
  const double n = vd.norm();
  if (n == 0) return 0.0;
  return std::acos(std::clamp(vd.x() / n, -1.0, 1.0));
}

std::pair<double, double> chord_ends(const TriMesh& mesh, double x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.boundary_edges()) {
    if (e.label != BoundaryLabel::wall) continue;
    const Vec2& a = mesh.nodes()[e.a];
    const Vec2& b = mesh.nodes()[e.b];
    const double x0 = std::min(a.x(), b.x()), x1 = std::max(a.x(), b.x());
    if (x < x0 || x > x1 || x1 == x0) continue;
    const double y = a.y() + (b.y() - a.y()) * (x - a.x()) / (b.x() - a.x());
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (!(hi > lo)) throw std::invalid_argument("degenerate chord at x = " + std::to_string(x));
  return {lo, hi};
}

AngleDiagnostics angle_diagnostics(const TriMesh& mesh, const PotentialField& field, double x,
                                   double alpha1, double alpha2, int samples) {
  if (samples < 2) throw std::invalid_argument("angle_diagnostics: need at least two samples");
  AngleDiagnostics out;
  out.alpha1 = alpha1;
  out.alpha2 = alpha2;
  out.x = x;
  const int ne = mesh.num_elements();
  out.gamma.resize(ne);
  for (int k = 0; k < ne; ++k) out.gamma[k] = desired_angle(field.desired.col(k));

  const auto [y1, y2] = chord_ends(mesh, x);
  out.y1 = y1;
  out.y2 = y2;
  const CentroidIndex index(mesh, 2.5 * mesh.h_max());
  for (int i = 0; i < samples; ++i) {
    ChordSample s;
    s.y = y1 + (y2 - y1) * i / (samples - 1);
    const Vec2 g = recovered_gradient(mesh, index, field, Vec2(x, s.y));
    s.gamma = desired_angle(-g);
    s.alpha_i = interpolated_wall_angle(s.y, y1, y2, alpha1, alpha2);
    s.beta = s.gamma - s.alpha_i;
    out.section.push_back(s);
  }
  return out;
}

void write_field_csv(const TriMesh& mesh, const PotentialField& field, std::ostream& os,
                     double length_scale) {
  os << "x,y,u,vdx,vdy\n" << std::setprecision(12);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangles()[k];
    const Vec2 c = mesh.centroid(k) * length_scale;
    const double u = (field.nodal[t[0]] + field.nodal[t[1]] + field.nodal[t[2]]) / 3.0;
    os << c.x() << ',' << c.y() << ',' << u << ',' << field.desired(0, k) << ',' << field.desired(1, k)
       << '\n';
  }
}

}  // namespace crowdflow
