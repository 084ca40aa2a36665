#pragma once

#include "scenesmith/action_schema.hpp"
#include "scenesmith/scene_engine.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace scenesmith {

// Text-in, text-out chat completion. Throws BackendError("BackendUnavailable").
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& prompt) const = 0;
};

struct FewShotExample {
  std::string command;
  std::vector<std::string> scene_objects;
  std::string actions_json;
};

// The versioned example set compiled into the library.
const std::vector<FewShotExample>& few_shot_examples();

// Role, scene context, schema rules, examples, output format, then the
// command. Deterministic.
std::string build_prompt(const SceneSnapshot& snapshot, std::string_view command);

// First fenced code block, else the longest parseable bracket-balanced
// substring starting with '[' (earliest on ties). Throws
// ParseFailure("NoJsonFound", stage "extract").
std::string extract_json_block(std::string_view reply);

// Parses, renumbers local ids, then checks sequence and reference closure.
// Throws SchemaError / ValidationError.
ActionList validate_reply_json(std::string_view json_text, const std::set<std::string>& scene_names);

// Controlled-English parser used offline. Throws
// ParseFailure("Unrecognized", stage "grammar") naming the clause.
ActionList fallback_parse(const SceneSnapshot& snapshot, std::string_view command);

// Clause splitting used by fallback_parse: "then", "and then", ";" and
// commas that do not separate numbers.
std::vector<std::string> split_clauses(std::string_view command);

class ParserBackend {
 public:
  virtual ~ParserBackend() = default;
  virtual std::string_view kind() const = 0;
  // Throws ParseFailure.
  virtual ActionList parse(const SceneSnapshot& snapshot, std::string_view command) const = 0;
};

// Prompt -> chat backend -> extract -> schema -> closure.
class ChatParser final : public ParserBackend {
 public:
  explicit ChatParser(std::shared_ptr<const ChatBackend> chat, std::string kind = "external_chat_service")
      : chat_(std::move(chat)), kind_(std::move(kind)) {}
  std::string_view kind() const override { return kind_; }
  ActionList parse(const SceneSnapshot& snapshot, std::string_view command) const override;

 private:
  std::shared_ptr<const ChatBackend> chat_;
  std::string kind_;
};

class GrammarParser final : public ParserBackend {
 public:
  std::string_view kind() const override { return "fallback_grammar"; }
  ActionList parse(const SceneSnapshot& snapshot, std::string_view command) const override;
};

// Runs `backend` and guarantees every failure is a stage-attributed
// ParseFailure. Never mutates anything.
ActionList parse_command(const ParserBackend& backend, const SceneSnapshot& snapshot, std::string_view command);

}  // namespace scenesmith
