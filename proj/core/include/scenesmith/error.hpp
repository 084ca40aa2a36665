#pragma once

#include <stdexcept>
#include <string>

namespace scenesmith {

// Base of every typed failure raised by the library. `code` is a stable
// machine-readable identifier (e.g. "MissingField"), `detail` names the
// offending field, object or clause, and `stage` is the pipeline stage that
// produced it when there is one.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string detail = {}, std::string stage = {})
      : std::runtime_error(message), code_(std::move(code)), detail_(std::move(detail)), stage_(std::move(stage)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string code_;
  std::string detail_;
  std::string stage_;
};

#define SCENESMITH_DEFINE_ERROR(Name, Stage)                                              \
  class Name : public Error {                                                             \
   public:                                                                                \
    Name(std::string code, const std::string& message, std::string detail = {})           \
        : Error(std::move(code), message, std::move(detail), Stage) {}                    \
  }

SCENESMITH_DEFINE_ERROR(SchemaError, "schema");
SCENESMITH_DEFINE_ERROR(ValidationError, "validation");
SCENESMITH_DEFINE_ERROR(ResolveError, "resolve");
SCENESMITH_DEFINE_ERROR(SceneError, "execute");
SCENESMITH_DEFINE_ERROR(GeometryError, "geometry");
SCENESMITH_DEFINE_ERROR(LibraryError, "library");
SCENESMITH_DEFINE_ERROR(ExportError, "export");
SCENESMITH_DEFINE_ERROR(BackendError, "backend");
SCENESMITH_DEFINE_ERROR(DatasetError, "dataset");

#undef SCENESMITH_DEFINE_ERROR

// Failure of the command pipeline, attributed to the stage where it stopped
// ("backend", "extract", "schema", "validation", "grammar"). The raw backend
// reply is kept for logging.
class ParseFailure : public Error {
 public:
  ParseFailure(std::string code, const std::string& message, std::string detail, std::string stage,
               std::string raw_reply = {})
      : Error(std::move(code), message, std::move(detail), std::move(stage)), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const noexcept { return raw_reply_; }

 private:
  std::string raw_reply_;
};

}  // namespace scenesmith
