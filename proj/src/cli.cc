#include "moira/cli.h"

#include <fstream>
#include <iostream>
#include <sstream>

#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/fusion.h"
#include "moira/persistence.h"
#include "moira/run_report.h"
#include "moira/server.h"
#include "moira/text.h"

#ifndef MOIRA_DATA_DIR
#define MOIRA_DATA_DIR "data"
#endif

namespace moira {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path data_dir(const CliOptions& o) {
  return o.data_dir.empty() ? default_data_dir() : o.data_dir;
}

std::vector<std::filesystem::path> model_paths(const CliOptions& o) {
  if (!o.models.empty()) return o.models;
  return default_config(data_dir(o)).models;
}

// Runs `body` with the input stream the options name.
template <typename F>
int with_input(const CliOptions& o, std::istream& in, std::ostream& err, F body) {
  if (o.input.empty() || o.input == "-") return body(in);
  std::ifstream file(o.input, std::ios::binary);
  if (!file) {
    err << "error: cannot read " << o.input.string() << "\n";
    return 1;
  }
  return body(file);
}

InterpreterOptions interpreter_options() {
  InterpreterOptions io;
  io.excluded_concepts = ProtocolConfig{}.excluded_concepts;
  return io;
}

void indent(std::ostream& out, const std::string& text, const std::string& pad) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << pad << line << "\n";
}

}  // namespace

std::filesystem::path default_data_dir() { return MOIRA_DATA_DIR; }

KnowledgeBase load_model_files(const std::vector<std::filesystem::path>& paths) {
  KnowledgeBase kb;
  for (const auto& p : paths) {
    std::string text = slurp(p);
    try {
      load_ce(kb, text, Told{p.filename().string(), "", ""});
    } catch (const std::exception& e) {
      throw std::runtime_error(p.string() + ":" + e.what());
    }
  }
  return kb;
}

ServiceConfig service_config(const CliOptions& o) {
  ServiceConfig c = default_config(data_dir(o));
  c.models = model_paths(o);
  if (!o.rules.empty()) c.rules = o.rules;
  if (!o.templates.empty()) c.templates = o.templates;
  if (!o.catalogue.empty()) c.catalogue = o.catalogue;
  c.kb_path = o.kb_out;
  c.listen = o.listen;
  return c;
}

int cmd_interpret(const CliOptions& o, std::istream& in, std::ostream& out,
                  std::ostream& err) {
  if (o.format != "text" && o.format != "json") {
    err << "error: --format must be text or json\n";
    return 2;
  }
  std::vector<std::filesystem::path> paths = model_paths(o);
  if (!o.catalogue.empty()) paths.push_back(o.catalogue);
  KnowledgeBase kb;
  try {
    kb = load_model_files(paths);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return with_input(o, in, err, [&](std::istream& s) {
    RunReport report = run_interpret(kb, s, interpreter_options());
    if (o.format == "json")
      out << to_json(report).dump(2) << "\n";
    else
      out << render_text(report);
    return 0;
  });
}

int cmd_rules(const CliOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
  if (o.format != "text" && o.format != "json") {
    err << "error: --format must be text or json\n";
    return 2;
  }
  KnowledgeBase kb;
  std::vector<Rule> rules;
  try {
    kb = load_model_files(model_paths(o));
    auto rules_path = o.rules.empty() ? default_config(data_dir(o)).rules : o.rules;
    rules = parse_rules(slurp(rules_path));
    validate_rules(rules, kb.model());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return with_input(o, in, err, [&](std::istream& s) {
    std::ostringstream buf;
    buf << s.rdbuf();
    RunResult result;
    try {
      load_ce(kb, buf.str(), Told{"input", "", ""});
      result = run_rules(kb, rules);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
    nlohmann::json facts = nlohmann::json::array();
    for (const auto& id : result.new_fact_ids) {
      const Fact* f = kb.find_fact(id);
      if (!f) continue;
      std::string ce = render_statement(statement_for_fact(kb, *f, false), RenderStyle::kSingleLine);
      Rationale r = rationale(kb, id);
      if (o.format == "json") {
        facts.push_back({{"fact", id}, {"rule", r.rule}, {"ce", ce},
                         {"premises", r.premises}, {"because", r.text}});
      } else {
        out << id << " (" << r.rule << ")\n  " << ce << "\n";
        indent(out, r.text, "    ");
      }
    }
    if (o.format == "json") {
      out << nlohmann::json{{"rounds", result.rounds},
                            {"capped", result.capped},
                            {"facts", facts}}
                 .dump(2)
          << "\n";
    } else {
      out << result.new_fact_ids.size() << " inferred facts in " << result.rounds
          << " rounds" << (result.capped ? " (capped)" : "") << "\n";
    }
    if (!result.diagnostic.empty()) err << "warning: " << result.diagnostic << "\n";
    if (!o.kb_out.empty()) persist_file(kb, o.kb_out);
    return 0;
  });
}

std::string render_message(const Message& m) {
  std::ostringstream out;
  out << m.sender << " -> " << join(m.audience, ", ") << ": " << to_string(m.kind) << " ["
      << m.id << " in " << m.conversation << "]\n";
  const auto& b = m.body;
  if (b.gist) out << "  gist: " << b.gist->text << "\n";
  if (!b.text.empty() && (!b.gist || b.gist->text != b.text)) {
    out << "  text:\n";
    indent(out, b.text, "    ");
  }
  if (b.score) out << "  score: " << *b.score << "\n";
  if (!b.unmatched.empty()) out << "  unmatched: " << join(b.unmatched, " ") << "\n";
  if (!b.missing.empty()) out << "  missing: " << join(b.missing, ", ") << "\n";
  if (!b.ref.empty()) out << "  ref: " << b.ref << "\n";
  if (!b.error.empty()) out << "  error: " << b.error << "\n";
  if (!b.ce.empty()) {
    out << "  ce:\n";
    indent(out, b.ce, "    ");
  }
  return out.str();
}

namespace {

constexpr std::string_view kReplHelp =
    "commands:\n"
    "  <text>             submit a report\n"
    "  accept             accept the pending CE (or an asset assignment)\n"
    "  correct <text>     correct the pending interpretation, or decline an assignment\n"
    "  edit <ce>          replace the pending CE\n"
    "  ask <query>        ask, e.g. ask ?s is a suspect sighting\n"
    "  tell <ce>          tell CE facts\n"
    "  why <id>           rationale for a fact or instance\n"
    "  expand <gist>      full CE behind a gist\n"
    "  score              session score\n"
    "  quit               leave (persists the KB with --kb-out)\n";

}  // namespace

int cmd_repl(const CliOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
  ServiceConfig config = service_config(o);
  config.kb_path.clear();
  config.observer_roles.insert(o.role);
  std::unique_ptr<Service> service;
  Session session;
  try {
    service = std::make_unique<Service>(config);
    session = service->create_session(o.user, o.role, "terminal", o.area);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  out << "moira repl, session " << session.id << " as " << session.user << " (" << session.role
      << "); type help for commands\n";
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    std::string cmd(trim(line));
    if (cmd.empty()) continue;
    std::string word = cmd.substr(0, cmd.find(' '));
    std::string rest = cmd.size() > word.size() ? std::string(trim(cmd.substr(word.size()))) : "";
    std::string w = fold(word);
    if (w == "quit" || w == "exit") break;
    if (w == "help") {
      out << kReplHelp;
      continue;
    }
    if (w == "score") {
      out << "score: " << service->session(session.id)->score << "\n";
      continue;
    }
    Post p;
    if (w == "accept") {
      p.kind = MessageKind::kConfirmAccept;
    } else if (w == "correct") {
      p.kind = MessageKind::kConfirmCorrect;
      p.body.text = rest;
    } else if (w == "edit") {
      p.kind = MessageKind::kConfirmCorrect;
      p.body.ce = rest;
    } else if (w == "ask") {
      p.kind = MessageKind::kAsk;
      p.body.text = rest;
    } else if (w == "tell") {
      p.kind = MessageKind::kTell;
      p.body.ce = rest;
    } else if (w == "why") {
      p.kind = MessageKind::kWhy;
      p.body.ref = rest;
    } else if (w == "expand") {
      p.kind = MessageKind::kExpandRequest;
      p.body.ref = rest;
    } else {
      p.kind = MessageKind::kNlInput;
      p.body.text = cmd;
    }
    try {
      for (const auto& m : service->post(session.id, p)) {
        if (m.sender == session.user) continue;
        out << render_message(m);
      }
    } catch (const std::exception& e) {
      out << "error: " << e.what() << "\n";
    }
  }
  if (!o.kb_out.empty()) {
    try {
      persist_file(service->kb_snapshot(), o.kb_out);
      out << "knowledge base written to " << o.kb_out.string() << "\n";
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_serve(const CliOptions& o, std::ostream& out, std::ostream& err) {
  auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) {
    err << "error: --listen must be host:port\n";
    return 2;
  }
  std::string host = o.listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.listen.substr(colon + 1));
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) {
    err << "error: bad port in --listen\n";
    return 2;
  }
  try {
    Service service(service_config(o));
    Server server(service, host, static_cast<unsigned short>(port), o.threads);
    server.start();
    out << "listening on " << host << ":" << server.port() << std::endl;
    server.wait(true);
    if (!o.kb_out.empty()) service.save();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace moira
