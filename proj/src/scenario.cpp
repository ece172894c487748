#include <crowdflow/log.hpp>
#include <crowdflow/scenario.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace crowdflow {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

using Setter = std::function<std::optional<std::string>(Scenario&, std::string_view)>;

Setter number(double Scenario::*field) {
  return [field](Scenario& s, std::string_view v) -> std::optional<std::string> {
    const auto d = to_double(v);
    if (!d) return "expected a number, got '" + std::string(v) + "'";
    s.*field = *d;
    return std::nullopt;
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"domain.kind",
       [](Scenario& s, std::string_view v) -> std::optional<std::string> {
         s.domain = std::string(v);
         return std::nullopt;
       }},
      {"domain.length", number(&Scenario::length)},
      {"domain.width", number(&Scenario::width)},
      {"domain.outlet",
       [](Scenario& s, std::string_view v) -> std::optional<std::string> {
         if (v == "open") s.outlet_open = true;
         else if (v == "sealed") s.outlet_open = false;
         else return "expected 'open' or 'sealed', got '" + std::string(v) + "'";
         return std::nullopt;
       }},
      {"mesh.size", number(&Scenario::mesh_size)},
      {"crowd.speed", number(&Scenario::speed)},
      {"crowd.pedestrians", number(&Scenario::pedestrians)},
      {"crowd.capacity_density", number(&Scenario::capacity_density)},
      {"model.repulsion", number(&Scenario::repulsion)},
      {"model.theta_deg", number(&Scenario::theta_deg)},
      {"model.sensory_radius", number(&Scenario::sensory_radius)},
      {"model.sensory_half_angle_deg", number(&Scenario::sensory_half_angle_deg)},
      {"model.wall_mode",
       [](Scenario& s, std::string_view v) -> std::optional<std::string> {
         try {
           s.wall_mode = parse_wall_mode(std::string(v));
         } catch (const std::invalid_argument& e) {
           return e.what();
         }
         return std::nullopt;
       }},
      {"entrance.inflow_rate", number(&Scenario::inflow_rate)},
      {"entrance.fade_ratio", number(&Scenario::fade_ratio)},
      {"entrance.depth", number(&Scenario::entrance_depth)},
      {"time.cfl_safety", number(&Scenario::cfl_safety)},
      {"time.dt_max", number(&Scenario::dt_max)},
      {"time.end", number(&Scenario::t_end)},
      {"output.sections",
       [](Scenario& s, std::string_view v) -> std::optional<std::string> {
         std::vector<double> xs;
         while (!v.empty()) {
           const auto comma = v.find(',');
           const auto item = trim(v.substr(0, comma));
           const auto d = to_double(item);
           if (!d) return "expected a comma-separated list of numbers, got '" + std::string(item) + "'";
           xs.push_back(*d);
           if (comma == std::string_view::npos) break;
           v.remove_prefix(comma + 1);
         }
         s.sections = std::move(xs);
         return std::nullopt;
       }},
      {"output.snapshot_every", number(&Scenario::snapshot_every)},
      {"seed",
       [](Scenario& s, std::string_view v) -> std::optional<std::string> {
         unsigned long x = 0;
         const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
         if (r.ec != std::errc() || r.ptr != v.data() + v.size()) return "expected an unsigned integer";
         s.seed = x;
         return std::nullopt;
       }},
  };
  return table;
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  std::vector<std::string> problems;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const auto key = trim(v.substr(0, eq));
    const auto value = trim(v.substr(eq + 1));
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
      continue;
    }
    if (auto err = it->second(s, value)) problems.push_back(std::string(key) + ": " + *err);
  }
  for (auto& p : validate(s)) problems.push_back(std::move(p));
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path.string() + "'"});
  return parse_scenario(in);
}

void write_scenario(const Scenario& s, std::ostream& os) {
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const char* k, double v) { kv(k, format_number(v)); };
  kv("domain.kind", s.domain);
  num("domain.length", s.length);
  num("domain.width", s.width);
  kv("domain.outlet", s.outlet_open ? "open" : "sealed");
  num("mesh.size", s.mesh_size);
  num("crowd.speed", s.speed);
  num("crowd.pedestrians", s.pedestrians);
  num("crowd.capacity_density", s.capacity_density);
  num("model.repulsion", s.repulsion);
  num("model.theta_deg", s.theta_deg);
  num("model.sensory_radius", s.sensory_radius);
  num("model.sensory_half_angle_deg", s.sensory_half_angle_deg);
  kv("model.wall_mode", to_string(s.wall_mode));
  num("entrance.inflow_rate", s.inflow_rate);
  num("entrance.fade_ratio", s.fade_ratio);
  num("entrance.depth", s.entrance_depth);
  num("time.cfl_safety", s.cfl_safety);
  num("time.dt_max", s.dt_max);
  num("time.end", s.t_end);
  std::string xs;
  for (std::size_t i = 0; i < s.sections.size(); ++i) xs += (i ? ", " : "") + format_number(s.sections[i]);
  kv("output.sections", xs);
  num("output.snapshot_every", s.snapshot_every);
  kv("seed", std::to_string(s.seed));
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const char* key, const std::string& what) {
    if (!ok) bad.push_back(std::string(key) + ": " + what);
  };
  const bool known = s.domain == "rectangle" || s.domain == "bottleneck" || s.domain == "curved" ||
                     s.domain == "shifted";
  need(known, "domain.kind", "must be one of rectangle, bottleneck, curved, shifted (got '" + s.domain + "')");
  need(s.length > 0 && std::isfinite(s.length), "domain.length", "must be positive");
  need(s.width > 0 && std::isfinite(s.width), "domain.width", "must be positive");
  need(s.mesh_size > 0 && std::isfinite(s.mesh_size), "mesh.size", "must be positive");
  if (s.mesh_size > 0 && s.width > 0 && known && s.length > 0) {
    const double narrowest = s.domain == "bottleneck" ? 0.6 * s.width : s.width;
    need(s.mesh_size < narrowest, "mesh.size", "must be smaller than the narrowest chord");
  }
  need(s.speed > 0 && std::isfinite(s.speed), "crowd.speed", "must be positive");
  need(s.pedestrians >= 0 && std::isfinite(s.pedestrians), "crowd.pedestrians", "must be nonnegative");
  need(s.capacity_density > 0 && std::isfinite(s.capacity_density), "crowd.capacity_density", "must be positive");
  need(s.repulsion >= 0 && s.repulsion <= 5e-3, "model.repulsion", "must lie in [0, 5e-3]");
  need(s.theta_deg >= 0 && s.theta_deg <= 10, "model.theta_deg", "must lie in [0, 10] degrees");
  need(s.sensory_radius > 0 && std::isfinite(s.sensory_radius), "model.sensory_radius", "must be positive");
  need(s.sensory_half_angle_deg > 0 && s.sensory_half_angle_deg < 90, "model.sensory_half_angle_deg",
       "must lie in (0, 90) degrees");
  need(s.inflow_rate >= 0 && std::isfinite(s.inflow_rate), "entrance.inflow_rate", "must be nonnegative");
  if (s.pedestrians > 0) need(s.inflow_rate > 0, "entrance.inflow_rate", "must be positive when pedestrians > 0");
  need(s.fade_ratio > 0 && s.fade_ratio < 1, "entrance.fade_ratio", "must lie in (0, 1)");
  need(std::isfinite(s.entrance_depth), "entrance.depth", "must be finite");
  if (s.pedestrians > 0 && std::isfinite(s.entrance_depth))
    need(s.buffer_depth() > 0, "entrance.depth", "must be positive when pedestrians > 0");
  need(s.cfl_safety > 0 && s.cfl_safety <= 1, "time.cfl_safety", "must lie in (0, 1]");
  need(s.dt_max > 0 && std::isfinite(s.dt_max), "time.dt_max", "must be positive");
  need(s.t_end > 0 && std::isfinite(s.t_end), "time.end", "must be positive");
  for (double x : s.sections)
    need(x > 0 && x < s.length, "output.sections", "section " + format_number(x) + " outside (0, length)");
  need(s.snapshot_every >= 0 && std::isfinite(s.snapshot_every), "output.snapshot_every", "must be nonnegative");
  return bad;
}

PreparedScenario prepare(const Scenario& s, int threads) {
  if (auto bad = validate(s); !bad.empty()) throw ConfigError(std::move(bad));
  const double L = s.length;
  const double T = s.time_scale();
  PreparedScenario p;
  p.scenario = s;
  p.spec = DomainSpec::by_name(s.domain, s.width / L, s.buffer_depth() / L);
  p.mesh = std::make_unique<TriMesh>(generate_mesh(p.spec, s.mesh_size / L));
  const double theta = s.theta_deg * std::numbers::pi / 180.0;
  p.field = solve_potential(*p.mesh, p.spec, theta);
  for (const auto& w : p.field.warnings) log_warning(w);

  auto& sim = p.params;
  sim.interaction.strength = s.repulsion;
  sim.interaction.radius = s.sensory_radius / L;
  sim.interaction.half_angle = s.sensory_half_angle_deg * std::numbers::pi / 180.0;
  sim.interaction.r_min = 0.5 * p.mesh->h_min();
  sim.boundary = {s.wall_mode, s.outlet_open};
  sim.cfl_safety = s.cfl_safety;
  sim.dt_max = s.dt_max / T;
  sim.t_end = s.t_end / T;
  sim.threads = threads;

  p.total = s.pedestrians;
  p.capacity_density = s.capacity_density * L * L;
  if (s.pedestrians > 0 && p.mesh->has_entrance()) {
    double area = 0.0;
    for (int k = 0; k < p.mesh->num_elements(); ++k)
      if (p.mesh->in_entrance(k)) area += p.mesh->area(k);
    ArrivalLaw law;
    law.inflow = s.inflow_rate * T;
    law.fade = s.fade_ratio;
    law.total = s.pedestrians;
    law.capacity = p.capacity_density * area;
    p.arrivals = law;
  }
  return p;
}

void describe_mesh(const TriMesh& mesh, std::ostream& os, double length_scale) {
  const double l2 = length_scale * length_scale;
  int entrance = 0;
  for (int k = 0; k < mesh.num_elements(); ++k) entrance += mesh.in_entrance(k);
  os << "elements " << mesh.num_elements() << '\n';
  os << "nodes " << mesh.num_nodes() << '\n';
  os << "entrance_elements " << entrance << '\n';
  os << "h_min " << format_number(mesh.h_min() * length_scale) << '\n';
  os << "h_max " << format_number(mesh.h_max() * length_scale) << '\n';
  os << "area_total " << format_number(mesh.total_area() * l2) << '\n';
  os << "area_min " << format_number(mesh.areas().minCoeff() * l2) << '\n';
  os << "area_max " << format_number(mesh.areas().maxCoeff() * l2) << '\n';
  for (auto label : {BoundaryLabel::wall, BoundaryLabel::inlet, BoundaryLabel::outlet}) {
    int count = 0;
    double length = 0.0;
    for (const auto& e : mesh.boundary_edges())
      if (e.label == label) {
        ++count;
        length += e.length;
      }
    os << "boundary_" << to_string(label) << ' ' << count << " edges, length " << format_number(length * length_scale)
       << '\n';
  }
}

namespace {

void write_snapshot(const fs::path& file, const TriMesh& mesh, const Eigen::VectorXd& density,
                    const Eigen::Matrix2Xd& w, double total, double length) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  const double norm = total > 0 ? total : 1.0;
  os << "elem_id,x,y,rho,rho_p,wx,wy\n";
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vec2 c = mesh.centroid(k);
    os << k << ',' << format_number(c.x()) << ',' << format_number(c.y()) << ',' << format_number(density[k] / norm)
       << ',' << format_number(density[k] / (length * length)) << ',' << format_number(w(0, k)) << ','
       << format_number(w(1, k)) << '\n';
  }
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

}  // namespace

RunReport run_prepared(const PreparedScenario& p, const RunOptions& options) {
  const Scenario& s = p.scenario;
  const TriMesh& mesh = *p.mesh;
  const double L = s.length;
  const double norm = p.total > 0 ? p.total : 1.0;

  RunReport rep;
  rep.time_scale = s.time_scale();
  rep.warnings = p.field.warnings;

  if (options.out) {
    fs::create_directories(*options.out);
    auto os = open_out(*options.out / "mesh_info.txt");
    describe_mesh(mesh, os, L);
    auto fos = open_out(*options.out / "field.csv");
    write_field_csv(mesh, p.field, fos);
  }

  SimulationParams params = p.params;
  params.threads = options.threads;
  Eigen::VectorXd initial = Eigen::VectorXd::Zero(mesh.num_elements());
  Simulation sim(mesh, p.field.desired, params, initial, p.arrivals, p.arrivals ? p.total : 0.0);

  std::vector<ChordProbe> probes;
  for (double x : s.sections) probes.emplace_back(mesh, x / L);
  const ChordProbe mid(mesh, 0.5);

  // Per-step records, reduced over the plateau once it is known.
  std::vector<double> drho, peak;
  std::vector<std::vector<std::vector<std::pair<double, double>>>> profiles(probes.size());
  std::vector<int> middle;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double x = mesh.centroid(k).x();
    if (!mesh.in_entrance(k) && x >= 0.25 && x <= 0.75) middle.push_back(k);
  }

  const double every = options.snapshot_every.value_or(s.snapshot_every);
  double next_snapshot = 0.0;
  int snapshot_id = 0;
  std::ofstream snap_index;
  if (options.out && every > 0) {
    snap_index = open_out(*options.out / "snapshots.csv");
    snap_index << "index,t\n";
  }

  auto observe = [&](const Simulation& run) {
    const auto& rho = run.density();
    drho.push_back(delta_rho(mid, rho, p.capacity_density));
    double m = 0.0;
    for (int k : middle) m = std::max(m, rho[k]);
    peak.push_back(m / (L * L));
    for (std::size_t i = 0; i < probes.size(); ++i) profiles[i].push_back(probes[i].profile(rho));
    if (options.out && every > 0 && run.time() >= next_snapshot - 1e-12) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%04d.csv", snapshot_id);
      write_snapshot(*options.out / name, mesh, rho, run.velocity(), p.total, L);
      snap_index << snapshot_id << ',' << format_number(run.time()) << '\n';
      ++snapshot_id;
      while (next_snapshot <= run.time() + 1e-12) next_snapshot += every;
    }
  };

  try {
    sim.run(p.total, observe);
  } catch (const NumericalAbort& e) {
    if (options.out) write_snapshot(*options.out / "snapshot_abort.csv", mesh, e.last_valid, sim.velocity(), p.total, L);
    throw;
  }

  rep.steps = sim.steps();
  rep.series = sim.series();
  std::vector<double> t, M, G;
  double budget0 = 0.0;
  for (const auto& x : rep.series) {
    t.push_back(x.t);
    M.push_back(x.M / norm);
    G.push_back(x.G / norm);
    const double budget = x.S + x.I + x.M + x.G;
    if (&x == &rep.series.front()) budget0 = budget;
    if (budget0 > 0) rep.budget_drift = std::max(rep.budget_drift, std::abs(budget - budget0) / budget0);
  }
  rep.egress_time = egress_time(t, G, p.total > 0 ? 1.0 : 0.0);
  if (p.total > 0 && !std::isfinite(rep.egress_time))
    rep.warnings.push_back("crowd did not fully leave before time.end");

  rep.regimes = classify_regimes(t, M);
  std::size_t i0 = 0, i1 = 0;
  if (rep.regimes.plateau) {
    i0 = rep.regimes.plateau->i0;
    i1 = rep.regimes.plateau->i1;
  } else {
    i0 = i1 = static_cast<std::size_t>(std::max_element(M.begin(), M.end()) - M.begin());
    if (p.total > 0) rep.warnings.push_back("no full-walkway plateau detected; observables taken at peak M");
  }
  double sum = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) {
    sum += drho[i];
    rep.max_rho_p = std::max(rep.max_rho_p, peak[i]);
  }
  rep.delta_rho = sum / static_cast<double>(i1 - i0 + 1);
  for (std::size_t j = 0; j < probes.size(); ++j) {
    SectionProfile sp;
    sp.x = probes[j].x() * L;
    const auto& first = profiles[j][i0];
    for (std::size_t r = 0; r < first.size(); ++r) {
      double acc = 0.0;
      for (std::size_t i = i0; i <= i1; ++i) acc += profiles[j][i][r].second;
      sp.rows.emplace_back(first[r].first * L, acc / static_cast<double>(i1 - i0 + 1) / (L * L));
    }
    rep.profiles.push_back(std::move(sp));
  }
  for (const auto& w : rep.warnings) log_warning(w);

  if (options.out) {
    const fs::path& out = *options.out;
    auto ts = open_out(out / "timeseries.csv");
    ts << "t,S,I,M,G\n";
    for (const auto& x : rep.series)
      ts << format_number(x.t) << ',' << format_number(x.S / norm) << ',' << format_number(x.I / norm) << ','
         << format_number(x.M / norm) << ',' << format_number(x.G / norm) << '\n';
    auto ms = open_out(out / "metrics.csv");
    ms << "t,M,G\n";
    for (std::size_t i = 0; i < t.size(); ++i)
      ms << format_number(t[i]) << ',' << format_number(M[i]) << ',' << format_number(G[i]) << '\n';
    for (const auto& sp : rep.profiles) {
      char name[64];
      std::snprintf(name, sizeof name, "profile_x%g.csv", sp.x);
      auto ps = open_out(out / name);
      ps << "y,rho_p\n";
      for (const auto& [y, r] : sp.rows) ps << format_number(y) << ',' << format_number(r) << '\n';
    }
    auto sum_os = open_out(out / "summary.txt");
    sum_os << "T = " << format_number(rep.time_scale) << '\n';
    sum_os << "Ta = " << format_number(rep.egress_time * rep.time_scale) << '\n';
    sum_os << "Ta_over_T = " << format_number(rep.egress_time) << '\n';
    sum_os << "delta_rho = " << format_number(rep.delta_rho) << '\n';
    sum_os << "plateau = " << (rep.regimes.plateau ? format_number(rep.regimes.plateau->t0) + " " +
                                                         format_number(rep.regimes.plateau->t1)
                                                   : std::string("none"))
           << '\n';
    sum_os << "regimes_ordered = " << (rep.regimes.ordered() ? "yes" : "no") << '\n';
    sum_os << "max_rho_p = " << format_number(rep.max_rho_p) << '\n';
    sum_os << "budget_drift = " << format_number(rep.budget_drift) << '\n';
    sum_os << "steps = " << rep.steps << '\n';
    auto cfg = open_out(out / "config_resolved.txt");
    write_scenario(s, cfg);
  }
  return rep;
}

RunReport run_scenario(const Scenario& s, const RunOptions& options) {
  const PreparedScenario p = prepare(s, options.threads);
  return run_prepared(p, options);
}

}  // namespace crowdflow
