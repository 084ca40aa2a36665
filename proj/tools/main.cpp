// scenesmith command-line entry points.
//
// Exit codes: 0 ok, 2 usage, 3 parse/validation, 4 io, 5 backend.

#include "demo_scripts.hpp"

#include "scenesmith/api_service.hpp"
#include "scenesmith/command_pipeline.hpp"
#include "scenesmith/dataset_forge.hpp"
#include "scenesmith/exporter.hpp"
#include "scenesmith/outbound.hpp"
#include "scenesmith/scene_engine.hpp"
#include "scenesmith/spatial_resolver.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace scenesmith;

namespace {

enum Exit { kOk = 0, kUsage = 2, kParse = 3, kIo = 4, kBackend = 5 };

struct CliFailure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliFailure{code, message}; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) fail(kIo, "cannot write " + p.string());
}

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(kParse, p.string() + ":" + std::to_string(n) + ": not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

// Non-empty lines that are not '#' comments.
std::vector<std::string> script_lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

int exit_for(const Error& e) {
  if (e.stage() == "backend" || e.code() == "BackendUnavailable" || e.code() == "FixtureMiss") return kBackend;
  if (e.code() == "IoFailure") return kIo;
  return kParse;
}

ServiceConfig cli_config(const std::string& config_file) {
  ServiceConfig c = load_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file));
  const fs::path data = SCENESMITH_DEFAULT_DATA_DIR;
  if (c.assets_dir.empty()) c.assets_dir = data / "library";
  if (c.fixtures_dir.empty()) c.fixtures_dir = data / "fixtures";
  return c;
}

struct Session {
  ServiceBackends backends;
  Scene scene;
};

struct ExecOptions {
  std::string backend = "fallback";
  bool keep_going = false;
  bool quiet = false;
};

// Runs each command through parse -> resolve -> apply. Returns the exit code.
int run_commands(Session& s, const std::vector<std::string>& commands, const ExecOptions& opt) {
  static const GrammarParser kGrammar;
  const ParserBackend* parser = &kGrammar;
  if (opt.backend != "fallback") {
    if (!s.backends.external) fail(kBackend, "no external chat backend configured");
    parser = s.backends.external.get();
  }
  int status = kOk;
  for (const auto& command : commands) {
    if (!opt.quiet) std::cout << "> " << command << "\n";
    try {
      const auto actions = parse_command(*parser, s.scene.snapshot(), command);
      const auto resolved = resolve(s.scene.snapshot(), actions, *s.backends.library);
      const auto results = s.scene.apply_actions(resolved, *s.backends.library);
      bool ok = true;
      for (const auto& r : results) {
        if (!opt.quiet) {
          std::cout << "  " << r.index + 1 << " " << r.status << " " << to_string(resolved[r.index].action_type);
          if (!r.created_names.empty()) {
            std::cout << " ->";
            for (const auto& n : r.created_names) std::cout << " " << n;
          }
          if (!r.error_code.empty()) std::cout << " [" << r.error_code << "] " << r.message;
          std::cout << "\n";
        }
        ok = ok && r.status == "ok";
      }
      if (!ok) {
        status = kParse;
        if (!opt.keep_going) return status;
      }
    } catch (const Error& e) {
      std::cerr << "error [" << e.code() << "] stage " << (e.stage().empty() ? "-" : e.stage()) << ": " << e.what()
                << "\n";
      const int code = exit_for(e);
      if (!opt.keep_going || code == kBackend) return code;
      status = code;
    }
  }
  return status;
}

void print_export(const ExportBundle& b, const fs::path& out) {
  std::cout << "exported " << b.mesh_files.size() << " meshes, " << b.material_count << " materials to "
            << (out / "scene.xml").string() << "\n";
}

std::vector<RawSample> raw_from_jsonl(const fs::path& p) {
  std::vector<RawSample> out;
  for (const auto& j : read_jsonl(p)) {
    RawSample r;
    if (j.is_object() && j.contains("text")) {
      r.text = j.value("text", std::string());
      r.generator_id = j.value("generator", std::string());
      r.trial = j.value("trial", std::size_t{0});
      r.index = j.value("index", std::size_t{0});
    } else {
      r.text = j.dump();
    }
    out.push_back(std::move(r));
  }
  return out;
}

ApiService* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenesmith: natural-language scene authoring for indoor ray-tracing scenes"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "Service config JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = -1;
  std::string host, mode;
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--mode", mode, "Outbound mode")->check(CLI::IsMember({"live", "record", "replay"}));

  // exec
  auto* exec = app.add_subcommand("exec", "Run a script of chat commands");
  std::string script, save_path, export_dir;
  ExecOptions exec_opt;
  exec->add_option("--script", script, "Newline-separated commands")->required()->check(CLI::ExistingFile);
  exec->add_option("--backend", exec_opt.backend, "fallback or external")
      ->check(CLI::IsMember({"fallback", "external"}));
  exec->add_flag("--keep-going", exec_opt.keep_going, "Continue after a failed command");
  exec->add_option("--save", save_path, "Write the resulting scene document");
  exec->add_option("--export", export_dir, "Export the resulting scene to a directory");

  // export
  auto* exp = app.add_subcommand("export", "Export a saved scene");
  std::string scene_file, out_dir;
  exp->add_option("--scene", scene_file, "Scene document")->required();
  exp->add_option("--out", out_dir, "Output directory")->required();

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Synthetic training data");
  dataset->require_subcommand(1);
  auto* gen = dataset->add_subcommand("gen", "Generate raw samples");
  GenerationSpec spec;
  std::string scene_cx = "few", command_cx = "medium", required_action, gen_out, gen_backend = "template";
  double corruption = 0.0;
  gen->add_option("--n", spec.n_samples, "Number of raw samples")->check(CLI::PositiveNumber);
  gen->add_option("--samples-per-trial", spec.samples_per_trial)->check(CLI::PositiveNumber);
  gen->add_option("--scene-complexity", scene_cx)->check(CLI::IsMember({"none", "few", "some", "many"}));
  gen->add_option("--command-complexity", command_cx)->check(CLI::IsMember({"simple", "medium", "complex"}));
  gen->add_option("--seed", spec.seed);
  gen->add_option("--required-action", required_action);
  gen->add_option("--backend", gen_backend, "template or external")->check(CLI::IsMember({"template", "external"}));
  gen->add_option("--corruption", corruption, "Template corruption rate")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", gen_out, "Raw samples JSONL")->required();

  auto* val = dataset->add_subcommand("validate", "Run the validation pipeline");
  std::string val_in, val_out, val_review, val_report, validator_kind = "grammar";
  val->add_option("--in", val_in, "Raw samples JSONL")->required()->check(CLI::ExistingFile);
  val->add_option("--out", val_out, "Accepted samples JSONL")->required();
  val->add_option("--review", val_review, "Samples held for manual review");
  val->add_option("--report", val_report, "Metrics JSON");
  val->add_option("--validator", validator_kind)->check(CLI::IsMember({"grammar", "external"}));

  auto* met = dataset->add_subcommand("metrics", "Print the metrics table");
  std::vector<std::string> met_reports, met_rates;
  met->add_option("--report", met_reports, "Metrics JSON written by validate");
  met->add_option("--rates", met_rates, "label=json,format,unique,meaning (fractions)");

  // eval
  auto* eval = app.add_subcommand("eval", "Strict accuracy of predictions against gold");
  std::string pred_file, gold_file;
  bool eval_json = false;
  eval->add_option("--pred", pred_file, "Predictions JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", gold_file, "Gold JSONL")->required()->check(CLI::ExistingFile);
  eval->add_flag("--json", eval_json, "Print JSON");

  // demo
  auto* demo = app.add_subcommand("demo", "Build and export a bundled scene");
  std::string demo_name, demo_out, demo_save;
  demo->add_option("name", demo_name)->required()->check(CLI::IsMember({"nist-lobby", "wireless-lab"}));
  demo->add_option("--out", demo_out, "Export directory (default ./<name>)");
  demo->add_option("--save", demo_save, "Write the scene document");

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Manage replay fixtures");
  fixture->require_subcommand(1);
  auto* fadd = fixture->add_subcommand("add", "Store a chat reply for a command");
  std::string fx_command, fx_reply, fx_reply_file, fx_scene, fx_dir;
  fadd->add_option("--command", fx_command)->required();
  auto* reply_opt = fadd->add_option("--reply", fx_reply);
  fadd->add_option("--reply-file", fx_reply_file)->excludes(reply_opt);
  fadd->add_option("--scene", fx_scene, "Scene document the command runs against");
  fadd->add_option("--dir", fx_dir)->required();
  auto* frec = fixture->add_subcommand("record", "Record grammar replies for every command of a script");
  std::string fr_script, fr_dir;
  frec->add_option("--script", fr_script)->required()->check(CLI::ExistingFile);
  frec->add_option("--dir", fr_dir)->required();

  auto* fcorpus = fixture->add_subcommand("corpus", "Record the gold reply of every golden corpus entry");
  std::string fc_corpus, fc_dir;
  fcorpus->add_option("--corpus", fc_corpus)->required()->check(CLI::ExistingFile);
  fcorpus->add_option("--dir", fc_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*serve) {
      ServiceConfig c = cli_config(config_file);
      if (port >= 0) c.port = port;
      if (!host.empty()) c.host = host;
      if (!mode.empty()) c.mode = *outbound_mode_from_string(mode);
      auto b = make_backends(c);
      ApiService service(b.library, b.external);
      const int bound = service.start(c.host, c.port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << c.host << ":" << bound << " (mode " << to_string(c.mode) << ")"
                << std::endl;
      service.wait();
      g_service = nullptr;
      return kOk;
    }

    if (*exec) {
      Session s{make_backends(cli_config(config_file)), Scene()};
      const int rc = run_commands(s, script_lines(read_file(script)), exec_opt);
      if (!save_path.empty()) write_file(save_path, s.scene.save().dump(2) + "\n");
      if (!export_dir.empty() && rc == kOk) print_export(export_scene(s.scene, export_dir), export_dir);
      return rc;
    }

    if (*exp) {
      const auto doc = nlohmann::json::parse(read_file(scene_file), nullptr, false);
      if (doc.is_discarded()) fail(kParse, scene_file + " is not valid JSON");
      const Scene scene = Scene::load(doc);
      print_export(export_scene(scene, out_dir), out_dir);
      return kOk;
    }

    if (*demo) {
      Session s{make_backends(cli_config(config_file)), Scene()};
      const std::string text = demo_name == "nist-lobby" ? demos::kNistLobby : demos::kWirelessLab;
      ExecOptions opt;
      opt.quiet = true;
      const int rc = run_commands(s, script_lines(text), opt);
      if (rc != kOk) return rc;
      if (!demo_save.empty()) write_file(demo_save, s.scene.save().dump(2) + "\n");
      const fs::path out = demo_out.empty() ? fs::path(demo_name) : fs::path(demo_out);
      print_export(export_scene(s.scene, out), out);
      return kOk;
    }

    if (*gen) {
      spec.scene_complexity = *scene_complexity_from_string(scene_cx);
      spec.command_complexity = *command_complexity_from_string(command_cx);
      if (!required_action.empty()) {
        spec.required_action = action_type_from_string(required_action);
        if (!spec.required_action) fail(kUsage, "unknown action type " + required_action);
      }
      std::shared_ptr<const ChatBackend> backend;
      std::string generator_id = "template";
      if (gen_backend == "template") {
        backend = std::make_shared<TemplateGenerator>(corruption);
      } else {
        const ServiceConfig c = cli_config(config_file);
        auto fixtures = std::make_shared<const FixtureStore>(c.fixtures_dir);
        backend = std::make_shared<HttpChatBackend>(
            EndpointConfig{c.chat_url, c.chat_model, std::chrono::milliseconds(c.timeout_ms)},
            OutboundClient("chat", c.mode, fixtures));
        generator_id = c.chat_model;
      }
      const auto result = generate(spec, *backend, generator_id);
      std::string out;
      for (const auto& r : result.samples) {
        out += nlohmann::json{{"text", r.text}, {"generator", r.generator_id}, {"trial", r.trial}, {"index", r.index}}
                   .dump() +
               "\n";
      }
      write_file(gen_out, out);
      for (const auto& e : result.errors) std::cerr << e << "\n";
      std::cout << result.samples.size() << " raw samples written to " << gen_out << "\n";
      return result.samples.empty() && !result.errors.empty() ? kBackend : kOk;
    }

    if (*val) {
      const auto raw = raw_from_jsonl(val_in);
      std::unique_ptr<SemanticValidator> validator;
      if (validator_kind == "grammar") {
        validator = std::make_unique<GrammarSemanticValidator>();
      } else {
        const ServiceConfig c = cli_config(config_file);
        auto fixtures = std::make_shared<const FixtureStore>(c.fixtures_dir);
        validator = std::make_unique<ChatSemanticValidator>(std::make_shared<HttpChatBackend>(
            EndpointConfig{c.chat_url, c.chat_model, std::chrono::milliseconds(c.timeout_ms)},
            OutboundClient("validator", c.mode, fixtures)));
      }
      const auto outcome = run_validation(raw, *validator);
      std::string accepted, review;
      for (const auto& s : outcome.accepted) accepted += to_json(s).dump() + "\n";
      for (const auto& s : outcome.review) review += to_json(s).dump() + "\n";
      write_file(val_out, accepted);
      if (!val_review.empty()) write_file(val_review, review);
      const std::string label = raw.empty() || raw.front().generator_id.empty() ? "samples" : raw.front().generator_id;
      if (!val_report.empty()) {
        auto j = to_json(outcome.report);
        j["label"] = label;
        write_file(val_report, j.dump(2) + "\n");
      }
      std::cout << format_metrics_table({{label, outcome.report}});
      std::cout << outcome.accepted.size() << " accepted, " << outcome.review.size() << " for review, "
                << outcome.rejections.size() << " rejected\n";
      return kOk;
    }

    if (*met) {
      if (met_reports.empty() && met_rates.empty()) fail(kUsage, "give --report or --rates");
      std::vector<std::pair<std::string, MetricsReport>> rows;
      for (const auto& f : met_reports) {
        const auto j = nlohmann::json::parse(read_file(f), nullptr, false);
        if (j.is_discarded() || !j.contains("counts")) fail(kParse, f + " is not a metrics report");
        const auto& c = j["counts"];
        auto r = MetricsReport::from_counts(c.value("raw", std::size_t{0}), c.value("json_valid", std::size_t{0}),
                                            c.value("format_valid", std::size_t{0}), c.value("unique", std::size_t{0}),
                                            c.value("meaning_matched", std::size_t{0}));
        rows.emplace_back(j.value("label", fs::path(f).stem().string()), r);
      }
      for (const auto& spec_text : met_rates) {
        const auto eq = spec_text.find('=');
        if (eq == std::string::npos) fail(kUsage, "--rates needs label=j,f,u,m");
        std::vector<double> v;
        std::stringstream ss(spec_text.substr(eq + 1));
        std::string part;
        while (std::getline(ss, part, ',')) {
          try {
            v.push_back(std::stod(part));
          } catch (const std::exception&) {
            fail(kUsage, "bad rate '" + part + "'");
          }
        }
        if (v.size() != 4) fail(kUsage, "--rates needs four values");
        rows.emplace_back(spec_text.substr(0, eq), MetricsReport::from_rates(v[0], v[1], v[2], v[3]));
      }
      std::cout << format_metrics_table(rows);
      return kOk;
    }

    if (*eval) {
      std::vector<std::string> pred;
      for (const auto& j : read_jsonl(pred_file)) pred.push_back(j.is_string() ? j.get<std::string>() : j.dump());
      std::vector<ActionList> gold;
      for (const auto& j : read_jsonl(gold_file)) {
        const auto& actions = j.is_object() && j.contains("actions") ? j["actions"] : j;
        gold.push_back(parse_actions_structural(actions));
      }
      const auto report = eval_accuracy(pred, gold);
      std::cout << (eval_json ? to_json(report).dump(2) + "\n" : format_accuracy(report));
      return kOk;
    }

    if (*fadd) {
      Scene scene;
      if (!fx_scene.empty()) {
        const auto doc = nlohmann::json::parse(read_file(fx_scene), nullptr, false);
        if (doc.is_discarded()) fail(kParse, fx_scene + " is not valid JSON");
        scene = Scene::load(doc);
      }
      const std::string reply = fx_reply_file.empty() ? fx_reply : read_file(fx_reply_file);
      if (reply.empty()) fail(kUsage, "give --reply or --reply-file");
      const std::string prompt = build_prompt(scene.snapshot(), fx_command);
      const FixtureStore store(fx_dir);
      const std::string hash = FixtureStore::request_hash("chat", prompt);
      store.put({hash, prompt, reply, ""});
      std::cout << hash << "\n";
      return kOk;
    }

    if (*frec) {
      auto backends = make_backends(cli_config(config_file));
      Scene scene;
      const FixtureStore store(fr_dir);
      for (const auto& command : script_lines(read_file(fr_script))) {
        const auto snap = scene.snapshot();
        const auto actions = fallback_parse(snap, command);
        const std::string prompt = build_prompt(snap, command);
        const std::string hash = FixtureStore::request_hash("chat", prompt);
        store.put({hash, prompt, "```json\n" + serialize(actions, 2) + "\n```", ""});
        std::cout << hash << "  " << command << "\n";
        scene.apply_actions(resolve(snap, actions, *backends.library), *backends.library);
      }
      return kOk;
    }
    if (*fcorpus) {
      auto backends = make_backends(cli_config(config_file));
      const FixtureStore store(fc_dir);
      std::size_t n = 0;
      for (const auto& entry : read_jsonl(fc_corpus)) {
        Session s{backends, Scene()};
        ExecOptions quiet;
        quiet.quiet = true;
        if (run_commands(s, entry.value("setup", std::vector<std::string>{}), quiet) != kOk) {
          fail(kParse, "setup failed for corpus entry " + std::to_string(n));
        }
        const std::string command = entry.at("command");
        const std::string prompt = build_prompt(s.scene.snapshot(), command);
        const std::string hash = FixtureStore::request_hash("chat", prompt);
        const std::string actions = entry.at("actions").dump(2);
        std::string reply;
        switch (n++ % 3) {
          case 0: reply = "```json\n" + actions + "\n```"; break;
          case 1: reply = "Here is the action list for your command:\n\n```json\n" + actions + "\n```\n"; break;
          default: reply = "Sure. " + entry.at("actions").dump() + " This places the objects as requested."; break;
        }
        store.put({hash, prompt, reply, ""});
        std::cout << hash << "  " << command << "\n";
      }
      return kOk;
    }
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]" << (e.stage().empty() ? "" : " stage " + e.stage()) << ": " << e.what()
              << (e.detail().empty() ? "" : " (" + e.detail() + ")") << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
