#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "moira/knowledge_base.h"
#include "moira/service.h"

namespace moira {

struct CliOptions {
  std::filesystem::path data_dir;  // defaults for anything not given below
  std::vector<std::filesystem::path> models;
  std::filesystem::path rules;
  std::filesystem::path templates;
  std::filesystem::path catalogue;
  std::string format = "text";  // text | json
  std::filesystem::path kb_out;
  std::filesystem::path input;  // empty or "-": stdin
  // repl
  std::string user = "observer";
  std::string role = "patrol";
  std::string area;
  // serve
  std::string listen = "127.0.0.1:8080";
  int threads = 2;
};

// Data directory compiled into the binary.
std::filesystem::path default_data_dir();

// Loads CE model files in order; errors carry "file:line:col: ".
KnowledgeBase load_model_files(const std::vector<std::filesystem::path>& paths);
ServiceConfig service_config(const CliOptions& options);

// Exit codes: 0 ok, 1 bad input files, 2 usage.
int cmd_interpret(const CliOptions& options, std::istream& in, std::ostream& out,
                  std::ostream& err);
// CE facts on `in`; prints every inferred fact with its because-statement.
int cmd_rules(const CliOptions& options, std::istream& in, std::ostream& out,
              std::ostream& err);
int cmd_repl(const CliOptions& options, std::istream& in, std::ostream& out,
             std::ostream& err);
int cmd_serve(const CliOptions& options, std::ostream& out, std::ostream& err);

// One message as the terminal shows it.
std::string render_message(const Message& m);

}  // namespace moira
