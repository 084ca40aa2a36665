#include "oracles.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oracle {

std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c,
                                   double t_min, double t_max) {
  const Vec3 n = (b - a).cross(c - a);
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-300 || n.norm() == 0) return std::nullopt;
  const double t = n.dot(a - o) / denom;
  if (!(t > t_min && t <= t_max)) return std::nullopt;
  const Vec3 p = o + t * d;
  // p is inside when it lies on the inner side of all three edges.
  const double s1 = n.dot((b - a).cross(p - a));
  const double s2 = n.dot((c - b).cross(p - b));
  const double s3 = n.dot((a - c).cross(p - c));
  const double eps = -1e-12 * n.squaredNorm();
  if (s1 >= eps && s2 >= eps && s3 >= eps) return t;
  return std::nullopt;
}

std::optional<Hit> nearest_hit(const std::vector<Mesh>& meshes, const Vec3& o, const Vec3& d, double t_min) {
  std::optional<Hit> best;
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const auto& mesh = meshes[m];
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const auto& face = mesh.faces[f];
      const double t_max = best ? best->t : std::numeric_limits<double>::infinity();
      if (auto t = ray_triangle(o, d, mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]], t_min,
                                t_max)) {
        if (!best || *t < best->t) best = Hit{*t, m, f};
      }
    }
  }
  return best;
}

double winding_number(const Mesh& mesh, const Vec3& p) {
  double total = 0;
  for (const auto& f : mesh.faces) {
    const Vec3 a = mesh.vertices[f[0]] - p, b = mesh.vertices[f[1]] - p, c = mesh.vertices[f[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  if (n2 > 0) {
    const Vec3 q = p - n * (n.dot(p - a) / n2);
    const bool inside = n.dot((b - a).cross(q - a)) >= 0 && n.dot((c - b).cross(q - b)) >= 0 &&
                        n.dot((a - c).cross(q - c)) >= 0;
    if (inside) return (p - q).norm();
  }
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c), point_segment_distance(p, c, a)});
}

double point_mesh_distance(const Mesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.faces) {
    best = std::min(best, point_triangle_distance(p, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]));
  }
  return best;
}

double min_distance(const std::vector<Mesh>& meshes, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : meshes) best = std::min(best, point_mesh_distance(m, p));
  return best;
}

PlyData read_ply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  PlyData out;
  std::size_t n_vertex = 0, n_face = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  if (!std::getline(in, line) || line != "ply") throw std::runtime_error("missing ply magic");
  out.header.push_back(line);
  for (;;) {
    if (!std::getline(in, line)) throw std::runtime_error("unterminated header");
    if (!line.empty() && line.back() == '\r') throw std::runtime_error("CR in header");
    out.header.push_back(line);
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw std::runtime_error("not ascii");
    } else if (word == "element") {
      std::size_t n = 0;
      ls >> current >> n;
      if (current == "vertex") n_vertex = n;
      else if (current == "face") n_face = n;
      else throw std::runtime_error("unexpected element " + current);
    } else if (word == "property" && current == "vertex") {
      std::string type, name;
      ls >> type >> name;
      vertex_props.push_back(name);
    }
  }
  const std::vector<std::string> expected = {"x", "y", "z", "nx", "ny", "nz"};
  if (vertex_props != expected) throw std::runtime_error("unexpected vertex properties");
  for (std::size_t i = 0; i < n_vertex; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("short vertex list");
    std::istringstream ls(line);
    std::array<double, 6> v{};
    for (auto& x : v) {
      if (!(ls >> x)) throw std::runtime_error("bad vertex line: " + line);
    }
    std::string extra;
    if (ls >> extra) throw std::runtime_error("extra vertex data: " + line);
    out.vertices.push_back(v);
  }
  for (std::size_t i = 0; i < n_face; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("short face list");
    std::istringstream ls(line);
    std::size_t k = 0;
    ls >> k;
    std::vector<std::uint32_t> f(k);
    for (auto& idx : f) {
      if (!(ls >> idx) || idx >= n_vertex) throw std::runtime_error("bad face line: " + line);
    }
    out.faces.push_back(std::move(f));
  }
  if (std::getline(in, line)) throw std::runtime_error("trailing data after faces");
  return out;
}

Aabb ply_bounds(const PlyData& ply) {
  Aabb box;
  for (const auto& v : ply.vertices) box.expand(Vec3(v[0], v[1], v[2]));
  return box;
}

std::optional<std::string> longest_json_array(const std::string& text) {
  std::optional<std::string> best;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    for (std::size_t j = text.size(); j-- > i;) {
      if (text[j] != ']') continue;
      const std::size_t len = j - i + 1;
      if (best && len <= best->size()) break;
      const std::string sub = text.substr(i, len);
      if (nlohmann::json::accept(sub)) {
        best = sub;
        break;
      }
    }
  }
  return best;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("scenesmith-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Mesh random_box(std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> pos(-spread, spread), ext(0.2, 1.5);
  const Vec3 c(pos(rng), pos(rng), pos(rng));
  const Vec3 h(ext(rng) / 2, ext(rng) / 2, ext(rng) / 2);
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back(c.x() + ((i & 1) ? h.x() : -h.x()), c.y() + ((i & 2) ? h.y() : -h.y()),
                            c.z() + ((i & 4) ? h.z() : -h.z()));
    m.normals.push_back((m.vertices.back() - c).normalized());
  }
  // Outward winding, two triangles per face.
  const std::uint32_t quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

namespace {

std::string xml_attr(const boost::property_tree::ptree& node, const std::string& key) {
  return node.get<std::string>("<xmlattr>." + key, "");
}

void walk_xml(const boost::property_tree::ptree& node, XmlFacts& f) {
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (tag == "ref") {
      f.refs.push_back(xml_attr(child, "id"));
    } else if (const std::string id = xml_attr(child, "id"); !id.empty()) {
      f.ids.push_back(id);
    }
    if (tag == "shape") {
      std::string file;
      for (const auto& [t, c] : child) {
        if (t == "string" && xml_attr(c, "name") == "filename") file = xml_attr(c, "value");
      }
      f.shapes.emplace_back(xml_attr(child, "name"), file);
    }
    walk_xml(child, f);
  }
}

}  // namespace

XmlFacts parse_scene_xml(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  boost::property_tree::read_xml(in, tree);
  if (tree.size() != 1) throw std::runtime_error("expected exactly one root element");
  XmlFacts f;
  f.root = tree.begin()->first;
  const auto& root = tree.begin()->second;
  f.version = xml_attr(root, "version");
  for (const auto& [tag, child] : root) {
    if (tag == "bsdf") f.bsdf_ids.push_back(xml_attr(child, "id"));
  }
  walk_xml(root, f);
  return f;
}

}  // namespace oracle
