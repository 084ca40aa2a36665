#pragma once

#include "scenesmith/action_schema.hpp"
#include "scenesmith/command_pipeline.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scenesmith {

enum class SceneComplexity { kNone, kFew, kSome, kMany };
enum class CommandComplexity { kSimple, kMedium, kComplex };

std::string_view to_string(SceneComplexity c);
std::string_view to_string(CommandComplexity c);
std::optional<SceneComplexity> scene_complexity_from_string(std::string_view s);
std::optional<CommandComplexity> command_complexity_from_string(std::string_view s);

struct GenerationSpec {
  std::size_t n_samples = 5;
  std::size_t samples_per_trial = 5;
  SceneComplexity scene_complexity = SceneComplexity::kFew;
  CommandComplexity command_complexity = CommandComplexity::kMedium;
  std::optional<ActionType> required_action;  // drawn per trial when unset
  std::uint64_t seed = 0;
};

struct RawSample {
  std::string text;
  std::string generator_id;
  std::size_t trial = 0;
  std::size_t index = 0;  // within the trial
};

struct GenerationResult {
  std::vector<RawSample> samples;
  std::vector<std::string> errors;  // one per failed trial
};

struct ExistingObject {
  std::string name;
  std::string object_type;
};

struct DatasetSample {
  std::string command;
  std::vector<ExistingObject> existing_objects;
  ActionList gold_actions;
  std::string generator_id;
  std::size_t trial = 0;
  std::size_t index = 0;
  bool resequenced = false;
  std::string semantic = "pending";  // "pass", "fail", "review"
  std::string semantic_reason;
};

nlohmann::json to_json(const DatasetSample& s);
DatasetSample dataset_sample_from_json(const nlohmann::json& j);  // throws DatasetError
SceneSnapshot snapshot_of(const std::vector<ExistingObject>& objects);

// The prompt for one trial. `required` names the action every sample must use.
std::string build_generation_prompt(const GenerationSpec& spec, std::size_t trial, ActionType required);
ActionType required_action_for(const GenerationSpec& spec, std::size_t trial);

// ceil(n / samples_per_trial) trials; each reply is split into its fenced
// blocks, missing blocks count as empty (invalid) samples so every trial
// contributes samples_per_trial raw samples (the last one is trimmed to n).
GenerationResult generate(const GenerationSpec& spec, const ChatBackend& generator,
                          const std::string& generator_id = "generator");

// Offline generator: reads the parameters back from the prompt and writes
// samples built from the controlled-English grammar. A fraction of them is
// deliberately corrupted (bad JSON, bad local ids, fractional quantities,
// extra fields, duplicates, wrong meaning).
class TemplateGenerator final : public ChatBackend {
 public:
  explicit TemplateGenerator(double corruption_rate = 0.0) : corruption_rate_(corruption_rate) {}
  std::string complete(const std::string& prompt) const override;

 private:
  double corruption_rate_;
};

enum class Verdict { kPass, kFail, kReview };

struct Judgement {
  Verdict verdict = Verdict::kReview;
  std::string reason;
};

class SemanticValidator {
 public:
  virtual ~SemanticValidator() = default;
  virtual Judgement judge(const DatasetSample& sample) const = 0;
};

// Sends (command, scene, actions) to a chat backend; the reply's first line
// must be PASS or FAIL, anything else (including backend errors) is review.
class ChatSemanticValidator final : public SemanticValidator {
 public:
  explicit ChatSemanticValidator(std::shared_ptr<const ChatBackend> chat) : chat_(std::move(chat)) {}
  Judgement judge(const DatasetSample& sample) const override;
  static std::string build_prompt(const DatasetSample& sample);

 private:
  std::shared_ptr<const ChatBackend> chat_;
};

// Offline validator: re-parses the command with the grammar and compares
// canonical forms. Commands outside the grammar go to review.
class GrammarSemanticValidator final : public SemanticValidator {
 public:
  Judgement judge(const DatasetSample& sample) const override;
};

struct MetricsReport {
  std::size_t raw = 0;
  std::size_t json_valid = 0;
  std::size_t format_valid = 0;
  std::size_t unique = 0;
  std::size_t meaning_matched = 0;
  std::size_t review = 0;
  std::size_t fixed = 0;  // format-valid only after resequencing

  double json_validity_rate = 0;
  double format_validity_rate = 0;
  double unique_sample_rate = 0;
  double meaning_matched_rate = 0;
  double overall_usability_rate = 0;
  std::vector<std::string> zero_denominators;

  // Rates from counts; an empty stage yields 0 and is flagged.
  static MetricsReport from_counts(std::size_t raw, std::size_t json_valid, std::size_t format_valid,
                                   std::size_t unique, std::size_t meaning_matched);
  // Overall usability as the product of the four stage rates.
  static MetricsReport from_rates(double json, double format, double unique, double meaning);
};

nlohmann::json to_json(const MetricsReport& r);
// Aligned text table with one row per (label, report), percentages at one decimal.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

struct StageRejection {
  std::size_t raw_index = 0;
  std::string stage;
  std::string code;
  std::string message;
};

struct ValidationOutcome {
  std::vector<DatasetSample> accepted;
  std::vector<DatasetSample> review;
  std::vector<StageRejection> rejections;
  MetricsReport report;
};

// Stage 1: JSON syntax. Stage 2: sample shape, lenient parse,
// resequencing, local-id sequence and closure against existing objects.
std::optional<nlohmann::json> stage_json(const RawSample& raw, std::string* error = nullptr);
DatasetSample stage_format(const nlohmann::json& doc, const RawSample& raw);  // throws Error
// Stage 3: keeps the first of each canonical(command + actions).
std::vector<DatasetSample> stage_dedup(const std::vector<DatasetSample>& samples);
std::string dedup_key(const DatasetSample& s);

ValidationOutcome run_validation(const std::vector<RawSample>& raw, const SemanticValidator& validator);

struct AccuracyReport {
  std::size_t total = 0;
  std::size_t json_valid = 0;
  std::size_t exact = 0;
  double json_rate = 0;
  double accuracy = 0;
};

// Strict field-by-field accuracy of raw predictions against gold lists.
// Throws DatasetError("LengthMismatch").
AccuracyReport eval_accuracy(const std::vector<std::string>& pred, const std::vector<ActionList>& gold);
nlohmann::json to_json(const AccuracyReport& r);
std::string format_accuracy(const AccuracyReport& r);

}  // namespace scenesmith
