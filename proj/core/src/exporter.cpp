#include "scenesmith/exporter.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

namespace scenesmith {

namespace {

void append_fixed(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Tiny negatives print as "-0.000000"; fold them so output is sign-stable.
  if (std::string_view(buf) == "-0.000000") {
    out += "0.000000";
  } else {
    out += buf;
  }
}

std::string rgb_text(const Rgb& rgb) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f %.3f %.3f", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string xml_attr(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ExportError("IoFailure", "cannot open '" + path.string() + "' for writing", path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ExportError("IoFailure", "short write to '" + path.string() + "'", path.string());
}

}  // namespace

std::string write_ply(const Mesh& mesh) {
  std::string out;
  out.reserve(64 * mesh.vertices.size() + 24 * mesh.faces.size() + 256);
  out += "ply\nformat ascii 1.0\ncomment scenesmith export\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) out += std::string("property float ") + p + "\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar uint vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    const Vec3 n = i < mesh.normals.size() ? mesh.normals[i] : Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      append_fixed(out, v[k]);
      out.push_back(' ');
    }
    for (int k = 0; k < 3; ++k) {
      append_fixed(out, n[k]);
      out.push_back(k == 2 ? '\n' : ' ');
    }
  }
  for (const auto& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  }
  return out;
}

std::string sanitize_name(std::string_view name) {
  std::string out(name);
  for (auto& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '.' || c == '_' || c == '-') || u >= 0x80) c = '_';
  }
  return out.empty() ? "_" : out;
}

ExportBundle build_export(const Scene& scene) {
  struct Shape {
    std::string name;
    std::string material;
    const Mesh* mesh;
  };
  std::vector<Shape> shapes;
  std::set<std::string> used_names;
  std::set<std::string> materials;
  for (const auto& o : scene.objects()) {
    if (!o.visible || o.mesh.empty()) continue;
    std::string name = sanitize_name(o.name);
    if (used_names.count(name)) {
      int k = 2;
      while (used_names.count(name + "_" + std::to_string(k))) ++k;
      name += "_" + std::to_string(k);
    }
    used_names.insert(name);
    std::string material = normalize_material_name(o.material, scene.materials());
    materials.insert(material);
    shapes.push_back({std::move(name), std::move(material), &o.mesh});
  }
  if (shapes.empty()) throw ExportError("NothingToExport", "scene has no visible mesh objects");

  ExportBundle bundle;
  bundle.material_count = materials.size();
  std::string& x = bundle.xml_text;
  x += "<scene version=\"2.1.0\">\n";
  for (const auto& m : materials) {
    x += "    <bsdf type=\"twosided\" id=\"" + xml_attr(m) + "\">\n";
    x += "        <bsdf type=\"diffuse\">\n";
    x += "            <rgb name=\"reflectance\" value=\"" + rgb_text(scene.materials().rgb(m)) + "\"/>\n";
    x += "        </bsdf>\n";
    x += "    </bsdf>\n";
  }
  for (const auto& s : shapes) {
    const std::string file = "meshes/" + s.name + ".ply";
    x += "    <shape type=\"ply\" id=\"mesh-" + s.name + "\" name=\"" + s.name + "\">\n";
    x += "        <string name=\"filename\" value=\"" + file + "\"/>\n";
    x += "        <ref id=\"" + xml_attr(s.material) + "\" name=\"bsdf\"/>\n";
    x += "    </shape>\n";
    bundle.mesh_files.emplace(file, write_ply(*s.mesh));
  }
  x += "</scene>\n";
  return bundle;
}

ExportBundle export_scene(const Scene& scene, const std::filesystem::path& out_dir) {
  ExportBundle bundle = build_export(scene);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "meshes", ec);
  if (ec) throw ExportError("IoFailure", "cannot create '" + (out_dir / "meshes").string() + "': " + ec.message(),
                            out_dir.string());
  for (const auto& [rel, bytes] : bundle.mesh_files) write_file(out_dir / rel, bytes);
  write_file(out_dir / "scene.xml", bundle.xml_text);
  return bundle;
}

}  // namespace scenesmith
