#include <crowdflow/parallel.hpp>
#include <crowdflow/sweep.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace crowdflow {

SweepTable run_sweep(const Scenario& base, const std::vector<double>& cs, const std::vector<double>& thetas_deg,
                     int threads) {
  if (cs.empty() || thetas_deg.empty()) throw std::invalid_argument("sweep grid must be nonempty");
  if (!std::is_sorted(cs.begin(), cs.end()) || !std::is_sorted(thetas_deg.begin(), thetas_deg.end()))
    throw std::invalid_argument("sweep grid values must be sorted");
  SweepTable table{cs, thetas_deg, {}};
  table.cells.resize(cs.size() * thetas_deg.size());
  parallel_tasks(static_cast<int>(table.cells.size()), threads, [&](int n) {
    SweepCell& cell = table.cells[n];
    cell.c = cs[n / thetas_deg.size()];
    cell.theta_deg = thetas_deg[n % thetas_deg.size()];
    Scenario s = base;
    s.repulsion = cell.c;
    s.theta_deg = cell.theta_deg;
    try {
      const RunReport r = run_scenario(s, RunOptions{});
      cell.ta_over_t = r.egress_time;
      cell.delta_rho = r.delta_rho;
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.ta_over_t = cell.delta_rho = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& os) {
  os << "c,theta,Ta_over_T,delta_rho\n";
  for (const auto& cell : table.cells)
    os << format_number(cell.c) << ',' << format_number(cell.theta_deg) << ',' << format_number(cell.ta_over_t)
       << ',' << format_number(cell.delta_rho) << '\n';
}

void write_sweep_errors(const SweepTable& table, std::ostream& os) {
  os << "c,theta,error\n";
  for (const auto& cell : table.cells)
    if (!cell.ok()) os << format_number(cell.c) << ',' << format_number(cell.theta_deg) << ",\"" << cell.error << "\"\n";
}

namespace {

// Index i with v[i] <= x <= v[i+1] and the weight of v[i+1]; clamps outside the range.
std::pair<std::size_t, double> bracket(const std::vector<double>& v, double x) {
  if (v.size() == 1 || x <= v.front()) return {0, 0.0};
  if (x >= v.back()) return {v.size() - 2, 1.0};
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) - 1;
  return {i, (x - v[i]) / (v[i + 1] - v[i])};
}

// First root of f - target along a sampled curve, by linear interpolation.
std::optional<double> crossing(const std::vector<double>& xs, const std::vector<double>& fs, double target) {
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = fs[i] - target, b = fs[i + 1] - target;
    if (std::isnan(a) || std::isnan(b)) continue;
    if (a == 0) return xs[i];
    if ((a < 0) != (b < 0) || b == 0) return xs[i] + (xs[i + 1] - xs[i]) * a / (a - b);
  }
  if (!xs.empty() && fs.back() == target) return xs.back();
  return std::nullopt;
}

}  // namespace

double interpolate(const SweepTable& table, double c, double theta_deg, double SweepCell::*field) {
  const auto [i, wc] = bracket(table.cs, c);
  const auto [j, wt] = bracket(table.thetas, theta_deg);
  const std::size_t i1 = std::min(i + 1, table.cs.size() - 1);
  const std::size_t j1 = std::min(j + 1, table.thetas.size() - 1);
  auto v = [&](std::size_t a, std::size_t b) { return table.at(a, b).*field; };
  return (1 - wc) * ((1 - wt) * v(i, j) + wt * v(i, j1)) + wc * ((1 - wt) * v(i1, j) + wt * v(i1, j1));
}

std::optional<Tuning> tune(const SweepTable& table, double target_ta_over_t, double target_delta_rho,
                           double theta_ref_deg) {
  std::optional<Tuning> result;
  double theta_ref = theta_ref_deg;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> ta;
    for (double c : table.cs) ta.push_back(interpolate(table, c, theta_ref, &SweepCell::ta_over_t));
    const auto c = crossing(table.cs, ta, target_ta_over_t);
    if (!c) return result;
    std::vector<double> dr;
    for (double th : table.thetas) dr.push_back(interpolate(table, *c, th, &SweepCell::delta_rho));
    const auto th = crossing(table.thetas, dr, target_delta_rho);
    if (!th) return result;
    result = Tuning{*c, *th};
    theta_ref = *th;
  }
  return result;
}

}  // namespace crowdflow
