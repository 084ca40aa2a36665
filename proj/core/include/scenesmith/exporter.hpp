#pragma once

#include "scenesmith/geometry.hpp"
#include "scenesmith/scene_engine.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace scenesmith {

struct ExportBundle {
  std::string xml_text;
  std::map<std::string, std::string> mesh_files;  // "meshes/<name>.ply" -> bytes
  std::size_t material_count = 0;
};

// ASCII PLY with x y z nx ny nz float properties and triangle faces,
// fixed 6-decimal numbers and LF line endings.
std::string write_ply(const Mesh& mesh);

// Characters outside [A-Za-z0-9._-] become '_'.
std::string sanitize_name(std::string_view name);

// Visible objects only; materials are normalized against the scene's table
// and declared once each in lexicographic order, shapes follow insertion
// order. Throws ExportError("NothingToExport" | "UnknownMaterial").
ExportBundle build_export(const Scene& scene);

// build_export, then writes <out_dir>/scene.xml and <out_dir>/meshes/*.ply.
// Throws ExportError("IoFailure") as well.
ExportBundle export_scene(const Scene& scene, const std::filesystem::path& out_dir);

}  // namespace scenesmith
