#include "scenesmith/materials.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>

namespace scenesmith {

MaterialTable MaterialTable::builtin() {
  MaterialTable t;
  t.set("itu_concrete", {0.539, 0.539, 0.539});
  t.set("itu_brick", {0.402, 0.112, 0.087});
  t.set("itu_wood", {0.430, 0.226, 0.079});
  t.set("itu_metal", {0.122, 0.135, 0.165});
  t.set("itu_glass", {0.247, 0.431, 0.527});
  t.set("itu_plasterboard", {0.704, 0.700, 0.675});
  t.set("itu_floorboard", {0.539, 0.316, 0.141});
  t.set("itu_ceiling_board", {0.730, 0.730, 0.700});
  t.set("itu_chipboard", {0.509, 0.335, 0.159});
  t.set("itu_marble", {0.800, 0.793, 0.755});
  return t;
}

MaterialTable MaterialTable::with_overrides(const std::filesystem::path& json_file) {
  MaterialTable t = builtin();
  std::ifstream f(json_file);
  if (!f) throw ExportError("IoFailure", "cannot open material override file", json_file.string());
  auto doc = nlohmann::json::parse(f, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ExportError("InvalidMaterial", "material overrides must be a JSON object", json_file.string());
  }
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_array() || value.size() != 3) throw ExportError("InvalidMaterial", "rgb must be [r, g, b]", name);
    Rgb rgb{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!value[i].is_number()) throw ExportError("InvalidMaterial", "rgb must be numeric", name);
      rgb[i] = value[i].get<double>();
    }
    t.set(name, rgb);
  }
  return t;
}

void MaterialTable::set(const std::string& canonical, const Rgb& rgb) {
  if (canonical.rfind("itu_", 0) != 0) throw ExportError("InvalidMaterial", "material names start with itu_", canonical);
  for (double c : rgb) {
    if (!(c >= 0.0 && c <= 1.0)) throw ExportError("InvalidMaterial", "rgb components lie in [0, 1]", canonical);
  }
  colors_[canonical] = rgb;
}

const Rgb& MaterialTable::rgb(std::string_view canonical) const {
  auto it = colors_.find(canonical);
  if (it == colors_.end()) throw ExportError("UnknownMaterial", "unknown material", std::string(canonical));
  return it->second;
}

std::vector<std::string> MaterialTable::names() const {
  std::vector<std::string> out;
  for (const auto& [name, rgb] : colors_) out.push_back(name);
  return out;
}

std::string canonical_material_form(std::string_view raw) {
  std::string s(raw);
  if (auto dot = s.rfind('.'); dot != std::string::npos) {
    const auto digits = s.size() - dot - 1;
    if (digits >= 1 && digits <= 3 &&
        std::all_of(s.begin() + static_cast<std::ptrdiff_t>(dot) + 1, s.end(),
                    [](unsigned char c) { return std::isdigit(c) != 0; })) {
      s.resize(dot);
    }
  }
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s.rfind("itu_", 0) != 0) s = "itu_" + s;
  return s;
}

std::string normalize_material_name(std::string_view raw, const MaterialTable& table) {
  std::string canonical = canonical_material_form(raw);
  if (!table.contains(canonical)) throw ExportError("UnknownMaterial", "unknown material '" + canonical + "'", canonical);
  return canonical;
}

}  // namespace scenesmith
