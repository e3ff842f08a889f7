#include "fixtures.h"

#include <fstream>
#include <memory>
#include <sstream>

#include "moira/assertion.h"
#include "moira/text.h"

#ifndef MOIRA_DATA_DIR
#define MOIRA_DATA_DIR "data"
#endif

namespace moira::testing {

std::filesystem::path data_dir() { return MOIRA_DATA_DIR; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

KnowledgeBase model_kb() {
  KnowledgeBase kb;
  for (const char* f : {"models/core.ce", "models/tasking.ce"})
    load_ce(kb, read_file(data_dir() / f), Told{f, "", ""});
  return kb;
}

KnowledgeBase full_kb() {
  KnowledgeBase kb = model_kb();
  load_ce(kb, read_file(data_dir() / "catalogue/assets.ce"), Told{"catalogue", "", ""});
  return kb;
}

std::vector<Rule> fusion_rules() {
  return parse_rules(read_file(data_dir() / "rules/fusion.rules"));
}

std::vector<GistTemplate> gist_templates() {
  return parse_templates(read_file(data_dir() / "templates/gists.tpl"));
}

std::unique_ptr<Service> scenario_service(ServiceConfig config) {
  KnowledgeBase kb = full_kb();
  load_ce(kb, kIntel, Told{"intel db", "", ""});
  kb.bump_counter("v", 47);
  if (config.transitions.empty())
    config.transitions = data_dir() / "protocol/transitions.txt";
  auto svc = std::make_unique<Service>(std::move(kb), fusion_rules(), gist_templates(),
                                       std::move(config));
  auto tick = std::make_shared<int>(0);
  svc->set_clock([tick] {
    int t = (*tick)++;
    char buf[32];
    std::snprintf(buf, sizeof buf, "2014-05-02T10:%02d:%02dZ", t / 60 % 60, t % 60);
    return std::string(buf);
  });
  return svc;
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

}  // namespace moira::testing
