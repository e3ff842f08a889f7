#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moira/ce_ast.h"
#include "moira/knowledge_base.h"

namespace moira {

enum class Priority { kLow, kMedium, kHigh };

std::string_view to_string(Priority p);
std::optional<Priority> parse_priority(std::string_view text);

struct Task {
  std::string id;
  std::string capability;
  std::string detectable;
  std::string sought;  // instance id, may be empty
  std::string sought_concept;
  std::string area;
  Priority priority = Priority::kMedium;
  std::string trigger;
  bool flagged = false;  // needs human completion (no known area)

  bool operator==(const Task&) const = default;
};

inline constexpr std::string_view kUnknownArea = "unknown";

// Task for a suspect-sighting trigger: id "TS_" + trigger, capability
// localize, detectable thing mapped from the target's concept, area from the
// latest "is located in" fact on the target (else on the trigger).
Task build_task(const KnowledgeBase& kb, std::string_view trigger_id);

// The task listing ("there is a task named ... that requires ...").
CeStatement task_statement(const Task& task);
// "the task T is triggered by the <concept> <trigger>."
CeStatement trigger_statement(const KnowledgeBase& kb, const Task& task);
// "the task T is assigned to the asset A."
CeStatement assignment_statement(const Task& task, std::string_view asset_id);

struct Asset {
  std::string id;
  std::string label;  // asset type, e.g. "MALE UAV with EO camera"
  std::vector<std::string> capabilities;
  std::vector<std::string> detectables;
  std::vector<std::string> areas;
  bool available = true;
  int quality = 0;
  double retasking_cost = 0;
  std::string tasked_with;

  bool operator==(const Asset&) const = default;
};

// Instances of `asset` in the KB.
std::vector<Asset> assets_from_kb(const KnowledgeBase& kb);

bool areas_overlap(const KnowledgeBase& kb, std::string_view a,
                   std::string_view b);
bool asset_qualifies(const KnowledgeBase& kb, const Task& task,
                     const Asset& asset);
// Total order: quality desc, retasking cost asc, id asc.
bool asset_ranks_before(const Asset& a, const Asset& b);

// Thread-safe catalogue; assignment is atomic across conversations.
class AssetCatalogue {
 public:
  AssetCatalogue() = default;
  explicit AssetCatalogue(std::vector<Asset> assets);

  void load(std::vector<Asset> assets);
  std::vector<Asset> snapshot() const;
  std::optional<Asset> find(std::string_view id) const;
  // Qualifying available assets, best first.
  std::vector<Asset> match(const KnowledgeBase& kb, const Task& task) const;
  // Marks the asset tasked if it is still available.
  bool try_assign(std::string_view asset_id, std::string_view task_id);
  void release(std::string_view asset_id);
  // Returns the task the asset was serving (now dropped), if any.
  std::string set_available(std::string_view asset_id, bool available);

 private:
  mutable std::mutex mu_;
  std::vector<Asset> assets_;
};

std::vector<Asset> match_assets(const KnowledgeBase& kb, const Task& task,
                                const std::vector<Asset>& catalogue);

enum class TaskingMode { kAuto, kAuthorize };

struct TaskingConfig {
  std::map<Priority, TaskingMode> modes = {{Priority::kLow, TaskingMode::kAuthorize},
                                           {Priority::kMedium, TaskingMode::kAuthorize},
                                           {Priority::kHigh, TaskingMode::kAuto}};
  TaskingMode mode_for(Priority p) const;
};

}  // namespace moira
