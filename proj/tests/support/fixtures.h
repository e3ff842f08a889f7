#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moira/fusion.h"
#include "moira/gist.h"
#include "moira/knowledge_base.h"
#include "moira/service.h"

namespace moira::testing {

std::filesystem::path data_dir();
std::string read_file(const std::filesystem::path& path);

// core.ce + tasking.ce
KnowledgeBase model_kb();
// model_kb() + the asset catalogue
KnowledgeBase full_kb();
std::vector<Rule> fusion_rules();
std::vector<GistTemplate> gist_templates();

// Intel on p1 from the reporting scenario.
inline constexpr const char* kIntel =
    "there is a person named p1 that is known as 'John Smith' and is a suspect. "
    "the person p1 has DEF456 as linked vehicle registration.";
inline constexpr const char* kSpotReport =
    "Suspicious vehicle heading south: black saloon with license plate DEF456";

// Service over full_kb() with the intel loaded, fresh ids continuing after
// v47, and a counting clock.
std::unique_ptr<Service> scenario_service(ServiceConfig config = {});

// Non-blank lines of a file.
std::vector<std::string> lines_of(const std::filesystem::path& path);

}  // namespace moira::testing
