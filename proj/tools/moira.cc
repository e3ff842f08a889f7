#include <iostream>

#include <CLI11.hpp>

#include "moira/cli.h"

int main(int argc, char** argv) {
  moira::CliOptions o;
  CLI::App app{"Moira: controlled-English reporting agent"};
  app.require_subcommand(1);
  std::vector<std::string> models;
  std::string data, rules, templates, catalogue, kb_out;
  app.add_option("--data", data, "data directory for defaults");
  app.add_option("--model", models, "CE model file (repeatable)");
  app.add_option("--rules", rules, "fusion rules file");
  app.add_option("--templates", templates, "gist templates file");
  app.add_option("--catalogue", catalogue, "asset catalogue (CE)");
  app.add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--kb-out", kb_out, "persist the knowledge base here");

  std::string input;
  auto* interpret = app.add_subcommand("interpret", "interpret one submission per line");
  interpret->add_option("input", input, "input file (default stdin)");
  auto* rules_cmd = app.add_subcommand("rules", "assert CE facts and run the rules");
  rules_cmd->add_option("input", input, "CE file (default stdin)");
  auto* repl = app.add_subcommand("repl", "terminal conversation with Moira");
  repl->add_option("--user", o.user, "user name");
  repl->add_option("--role", o.role, "patrol, analyst, commander or restricted");
  repl->add_option("--area", o.area, "spatial area reports come from");
  auto* serve = app.add_subcommand("serve", "HTTP and WebSocket service");
  serve->add_option("--listen", o.listen, "host:port");
  serve->add_option("--threads", o.threads, "I/O threads")->check(CLI::Range(1, 64));

  CLI11_PARSE(app, argc, argv);
  o.data_dir = data;
  for (const auto& m : models) o.models.emplace_back(m);
  o.rules = rules;
  o.templates = templates;
  o.catalogue = catalogue;
  o.kb_out = kb_out;
  o.input = input;

  if (*interpret) return moira::cmd_interpret(o, std::cin, std::cout, std::cerr);
  if (*rules_cmd) return moira::cmd_rules(o, std::cin, std::cout, std::cerr);
  if (*repl) return moira::cmd_repl(o, std::cin, std::cout, std::cerr);
  return moira::cmd_serve(o, std::cout, std::cerr);
}
