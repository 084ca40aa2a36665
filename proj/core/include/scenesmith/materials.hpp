#pragma once

#include "scenesmith/error.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scenesmith {

using Rgb = std::array<double, 3>;

// Canonical radio-material names ("itu_*") with diffuse display colors.
class MaterialTable {
 public:
  // The ten built-in itu_ materials.
  static MaterialTable builtin();
  // Built-ins overlaid with {"itu_name": [r, g, b], ...}. Throws ExportError.
  static MaterialTable with_overrides(const std::filesystem::path& json_file);

  // Throws ExportError("InvalidMaterial") for a non-itu_ name or rgb outside [0,1].
  void set(const std::string& canonical, const Rgb& rgb);
  bool contains(std::string_view canonical) const { return colors_.find(canonical) != colors_.end(); }
  const Rgb& rgb(std::string_view canonical) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Rgb, std::less<>> colors_;
};

// Strips one ".NNN" copy suffix, lowercases and adds the "itu_" prefix.
// Does not consult a table.
std::string canonical_material_form(std::string_view raw);

// canonical_material_form plus a table lookup; throws
// ExportError("UnknownMaterial") when the canonical name is not in `table`.
std::string normalize_material_name(std::string_view raw, const MaterialTable& table);

}  // namespace scenesmith
