// Plain-text mesh format:
//
//   crowdflow-mesh 1
//   nodes <count>
//   <x> <y>                      (one line per node)
//   triangles <count>
//   <i> <j> <k>                  (zero-based node indices)
//   boundary <count>
//   <i> <j> <wall|inlet|outlet>  (every boundary edge exactly once)
//   entrance <count>             (optional)
//   <element index>
//
// Blank lines and lines starting with '#' are ignored.
#include <crowdflow/mesh.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace crowdflow {

void save_mesh(const TriMesh& mesh, std::ostream& os) {
  os << "crowdflow-mesh 1\n";
  os << std::setprecision(17);
  os << "nodes " << mesh.num_nodes() << '\n';
  for (const auto& p : mesh.nodes()) os << p.x() << ' ' << p.y() << '\n';
  os << "triangles " << mesh.num_elements() << '\n';
  for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary " << mesh.boundary_edges().size() << '\n';
  for (const auto& e : mesh.boundary_edges()) os << e.a << ' ' << e.b << ' ' << to_string(e.label) << '\n';
  std::vector<int> entrance;
  for (int k = 0; k < mesh.num_elements(); ++k)
    if (mesh.in_entrance(k)) entrance.push_back(k);
  if (!entrance.empty()) {
    os << "entrance " << entrance.size() << '\n';
    for (int k : entrance) os << k << '\n';
  }
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write mesh file " + path);
  save_mesh(mesh, os);
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return std::istringstream(line);
    }
    fail(std::string("unexpected end of file, expected ") + what);
  }

  bool at_end() {
    std::string line;
    while (is_.peek() != EOF) {
      const auto pos = is_.tellg();
      std::getline(is_, line);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') {
        ++line_no_;
        continue;
      }
      is_.seekg(pos);
      return false;
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("mesh file line " + std::to_string(line_no_) + ": " + msg);
  }

  std::size_t header(const std::string& keyword) {
    auto ss = next(keyword.c_str());
    std::string word;
    long long count = -1;
    if (!(ss >> word >> count) || word != keyword || count < 0) fail("expected '" + keyword + " <count>'");
    return static_cast<std::size_t>(count);
  }

 private:
  std::istream& is_;
  int line_no_ = 0;
};

}  // namespace

TriMesh load_mesh(std::istream& is) {
  LineReader in(is);
  {
    auto ss = in.next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "crowdflow-mesh" || version != 1)
      in.fail("expected 'crowdflow-mesh 1'");
  }
  std::vector<Vec2> nodes(in.header("nodes"));
  for (auto& p : nodes) {
    auto ss = in.next("node");
    double x, y;
    if (!(ss >> x >> y)) in.fail("malformed node");
    p = Vec2(x, y);
  }
  std::vector<TriMesh::Triangle> tris(in.header("triangles"));
  for (auto& t : tris) {
    auto ss = in.next("triangle");
    if (!(ss >> t[0] >> t[1] >> t[2])) in.fail("malformed triangle");
  }
  std::vector<LabeledEdge> labels(in.header("boundary"));
  for (auto& e : labels) {
    auto ss = in.next("boundary edge");
    std::string label;
    if (!(ss >> e.a >> e.b >> label)) in.fail("malformed boundary edge");
    try {
      e.label = parse_boundary_label(label);
    } catch (const std::invalid_argument& err) {
      in.fail(err.what());
    }
  }
  std::vector<bool> entrance(tris.size(), false);
  if (!in.at_end()) {
    const std::size_t n = in.header("entrance");
    for (std::size_t i = 0; i < n; ++i) {
      auto ss = in.next("entrance element");
      long long k = -1;
      if (!(ss >> k) || k < 0 || static_cast<std::size_t>(k) >= tris.size()) in.fail("bad entrance element");
      entrance[k] = true;
    }
  }
  try {
    return TriMesh(std::move(nodes), std::move(tris), std::move(labels), std::move(entrance));
  } catch (const std::invalid_argument& err) {
    throw std::runtime_error(std::string("inconsistent mesh: ") + err.what());
  }
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open mesh file " + path);
  return load_mesh(is);
}

}  // namespace crowdflow
