#include "scenesmith/asset_library.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace scenesmith {

namespace {

[[noreturn]] void import_error(const std::string& what) { throw LibraryError("MeshImport", what); }

double to_double(const std::string& tok) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) import_error("bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    import_error("bad number '" + tok + "'");
  }
}

long long to_int(const std::string& tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) import_error("bad integer '" + tok + "'");
  return v;
}

// Fan-triangulates a polygon, dropping zero-area triangles.
void add_polygon(Mesh& m, const std::vector<std::uint32_t>& poly) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    Face f{poly[0], poly[i], poly[i + 1]};
    for (auto idx : f) {
      if (idx >= m.vertices.size()) import_error("face index out of range");
    }
    const Vec3& a = m.vertices[f[0]];
    if ((m.vertices[f[1]] - a).cross(m.vertices[f[2]] - a).norm() > 0) m.faces.push_back(f);
  }
}

void finish(Mesh& m, bool have_normals) {
  if (m.faces.empty()) import_error("mesh has no faces");
  bool normals_ok = have_normals && m.normals.size() == m.vertices.size();
  if (normals_ok) {
    for (auto& n : m.normals) {
      const double len = n.norm();
      if (!(len > 0)) {
        normals_ok = false;
        break;
      }
      n /= len;
    }
  }
  if (!normals_ok) recompute_normals(m);
}

}  // namespace

Mesh parse_ply_ascii(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) import_error("missing 'ply' magic");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;  // "list" entries are recorded as the property name
    std::vector<bool> is_list;
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (kw == "element") {
      Element e;
      std::string count;
      ls >> e.name >> count;
      e.count = static_cast<std::size_t>(to_int(count));
      elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (elements.empty()) import_error("property before element");
      std::string type, name;
      ls >> type;
      const bool list = type == "list";
      if (list) {
        std::string count_type, item_type;
        ls >> count_type >> item_type;
      }
      ls >> name;
      elements.back().props.push_back(name);
      elements.back().is_list.push_back(list);
    }
  }
  if (!ascii) import_error("only ASCII PLY is supported");

  Mesh m;
  bool have_normals = false;
  for (const auto& e : elements) {
    for (std::size_t r = 0; r < e.count; ++r) {
      if (!std::getline(in, line)) import_error("truncated element data");
      std::istringstream ls(line);
      std::string tok;
      if (e.name == "vertex") {
        Vec3 p = Vec3::Zero(), n = Vec3::Zero();
        for (std::size_t i = 0; i < e.props.size(); ++i) {
          if (!(ls >> tok)) import_error("short vertex row");
          const auto& name = e.props[i];
          if (e.is_list[i]) {
            for (auto k = to_int(tok); k > 0; --k) ls >> tok;
            continue;
          }
          if (name == "x") p.x() = to_double(tok);
          else if (name == "y") p.y() = to_double(tok);
          else if (name == "z") p.z() = to_double(tok);
          else if (name == "nx") n.x() = to_double(tok);
          else if (name == "ny") n.y() = to_double(tok);
          else if (name == "nz") n.z() = to_double(tok);
        }
        m.vertices.push_back(p);
        m.normals.push_back(n);
        have_normals = std::find(e.props.begin(), e.props.end(), "nx") != e.props.end();
      } else if (e.name == "face") {
        for (std::size_t i = 0; i < e.props.size(); ++i) {
          if (!(ls >> tok)) import_error("short face row");
          if (!e.is_list[i]) continue;
          std::vector<std::uint32_t> poly;
          for (auto k = to_int(tok); k > 0; --k) {
            if (!(ls >> tok)) import_error("short face list");
            auto idx = to_int(tok);
            if (idx < 0) import_error("negative face index");
            poly.push_back(static_cast<std::uint32_t>(idx));
          }
          if (e.props[i] == "vertex_indices" || e.props[i] == "vertex_index") add_polygon(m, poly);
        }
      }
    }
  }
  finish(m, have_normals);
  return m;
}

Mesh parse_obj(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Mesh m;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "v") {
      std::string x, y, z;
      if (!(ls >> x >> y >> z)) import_error("short vertex line");
      m.vertices.emplace_back(to_double(x), to_double(y), to_double(z));
    } else if (kw == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ls >> tok) {
        auto idx = to_int(tok.substr(0, tok.find('/')));
        if (idx < 0) idx += static_cast<long long>(m.vertices.size()) + 1;
        if (idx < 1) import_error("bad face index");
        poly.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      add_polygon(m, poly);
    }
  }
  finish(m, false);
  return m;
}

Mesh read_mesh_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LibraryError("MeshImport", "cannot open mesh file", path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".ply") return parse_ply_ascii(buf.str());
  if (ext == ".obj") return parse_obj(buf.str());
  throw LibraryError("MeshImport", "unsupported mesh format", path.string());
}

}  // namespace scenesmith
