#include "moira/tasking.h"

#include <algorithm>
#include <cstdlib>

#include "moira/text.h"

namespace moira {
namespace {

std::vector<std::string> objects(const KnowledgeBase& kb, const std::string& id,
                                 const std::string& property) {
  FactPattern fp;
  fp.subject = id;
  fp.property = property;
  std::vector<std::string> out;
  for (const auto& f : kb.query(fp)) out.push_back(f.object.text);
  return out;
}

std::string first_object(const KnowledgeBase& kb, const std::string& id,
                         const std::string& property) {
  auto all = objects(kb, id, property);
  return all.empty() ? std::string() : all.front();
}

std::string latest_area(const KnowledgeBase& kb, const std::string& id) {
  auto all = objects(kb, id, "is located in");
  return all.empty() ? std::string() : all.back();
}

bool contains_folded(const std::vector<std::string>& list, std::string_view x) {
  return std::any_of(list.begin(), list.end(),
                     [&](const std::string& s) { return fold(s) == fold(x); });
}

}  // namespace

std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::kLow: return "Low";
    case Priority::kMedium: return "Medium";
    case Priority::kHigh: return "High";
  }
  return "Medium";
}

std::optional<Priority> parse_priority(std::string_view text) {
  std::string f = fold(text);
  if (f == "low") return Priority::kLow;
  if (f == "medium") return Priority::kMedium;
  if (f == "high") return Priority::kHigh;
  return std::nullopt;
}

Task build_task(const KnowledgeBase& kb, std::string_view trigger_id) {
  const Instance* trigger = kb.find_instance(trigger_id);
  if (!trigger) throw ModelError("unknown trigger '" + std::string(trigger_id) + "'");
  Task t;
  t.trigger = trigger->id;
  t.id = "TS_" + trigger->id;
  t.capability = "localize";
  t.sought = first_object(kb, trigger->id, "target vehicle");
  if (const Instance* target = kb.find_instance(t.sought)) {
    t.sought_concept = target->concept_name;
    // Most specific detectable thing whose target concept covers the target.
    auto types = kb.types_of(target->id);
    for (const Instance* d : kb.instances()) {
      if (!kb.instance_has_type(d->id, "detectable thing")) continue;
      std::string mapped = first_object(kb, d->id, "target concept");
      if (mapped.empty()) continue;
      bool fits = std::any_of(types.begin(), types.end(), [&](const auto& ty) {
        return kb.model().is_subtype(ty, mapped);
      });
      if (fits && t.detectable.empty()) t.detectable = d->id;
    }
    t.area = latest_area(kb, target->id);
  }
  if (t.area.empty()) t.area = latest_area(kb, trigger->id);
  if (t.area.empty()) {
    t.area = std::string(kUnknownArea);
    t.flagged = true;
  }
  if (t.detectable.empty()) t.flagged = true;
  bool suspect = !objects(kb, trigger->id, "suspect candidate").empty();
  t.priority = suspect ? Priority::kHigh : Priority::kMedium;
  return t;
}

CeStatement task_statement(const Task& task) {
  NewInstance n{"task", task.id, {}};
  n.clauses.push_back(PropertyClause{
      "requires", InstanceRef{"intelligence capability", task.capability},
      PropertyForm::kVerb});
  if (!task.detectable.empty())
    n.clauses.push_back(PropertyClause{
        "is looking for", InstanceRef{"detectable thing", task.detectable},
        PropertyForm::kVerb});
  if (!task.sought.empty())
    n.clauses.push_back(PropertyClause{
        "is seeking instance", InstanceRef{task.sought_concept, task.sought},
        PropertyForm::kVerb});
  if (!task.flagged || task.area != kUnknownArea)
    n.clauses.push_back(PropertyClause{
        "operates in", InstanceRef{"spatial area", task.area},
        PropertyForm::kVerb});
  n.clauses.push_back(PropertyClause{
      "is ranked with",
      InstanceRef{"task priority", std::string(to_string(task.priority))},
      PropertyForm::kVerb});
  return CeStatement{std::move(n)};
}

CeStatement trigger_statement(const KnowledgeBase& kb, const Task& task) {
  const Instance* trig = kb.find_instance(task.trigger);
  std::string concept_name = trig ? trig->concept_name : std::string("thing");
  return CeStatement{InstanceFacts{
      "task", task.id,
      {PropertyClause{"is triggered by", InstanceRef{concept_name, task.trigger},
                      PropertyForm::kVerb}}}};
}

CeStatement assignment_statement(const Task& task, std::string_view asset_id) {
  return CeStatement{InstanceFacts{
      "task", task.id,
      {PropertyClause{"is assigned to",
                      InstanceRef{"asset", std::string(asset_id)},
                      PropertyForm::kVerb}}}};
}

std::vector<Asset> assets_from_kb(const KnowledgeBase& kb) {
  std::vector<Asset> out;
  for (const Instance* inst : kb.instances()) {
    if (!kb.instance_has_type(inst->id, "asset")) continue;
    Asset a;
    a.id = inst->id;
    a.label = inst->label.empty() ? inst->id : inst->label;
    a.capabilities = objects(kb, inst->id, "provides");
    a.detectables = objects(kb, inst->id, "can detect");
    a.areas = objects(kb, inst->id, "covers");
    a.quality = std::atoi(first_object(kb, inst->id, "quality").c_str());
    a.retasking_cost =
        std::strtod(first_object(kb, inst->id, "retasking cost").c_str(), nullptr);
    std::string availability = fold(first_object(kb, inst->id, "availability"));
    a.available = availability.empty() || availability == "available";
    out.push_back(std::move(a));
  }
  return out;
}

bool areas_overlap(const KnowledgeBase& kb, std::string_view a,
                   std::string_view b) {
  if (fold(a) == fold(b)) return true;
  for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
    FactPattern fp;
    fp.subject = std::string(x);
    fp.property = "is adjacent to";
    fp.object = std::string(y);
    if (!kb.query(fp).empty()) return true;
  }
  return false;
}

bool asset_qualifies(const KnowledgeBase& kb, const Task& task,
                     const Asset& asset) {
  if (!asset.available) return false;
  if (!contains_folded(asset.capabilities, task.capability)) return false;
  if (!contains_folded(asset.detectables, task.detectable)) return false;
  return std::any_of(asset.areas.begin(), asset.areas.end(),
                     [&](const std::string& area) {
                       return areas_overlap(kb, area, task.area);
                     });
}

bool asset_ranks_before(const Asset& a, const Asset& b) {
  if (a.quality != b.quality) return a.quality > b.quality;
  if (a.retasking_cost != b.retasking_cost)
    return a.retasking_cost < b.retasking_cost;
  return a.id < b.id;
}

std::vector<Asset> match_assets(const KnowledgeBase& kb, const Task& task,
                                const std::vector<Asset>& catalogue) {
  std::vector<Asset> out;
  for (const auto& a : catalogue) {
    if (asset_qualifies(kb, task, a)) out.push_back(a);
  }
  std::sort(out.begin(), out.end(), asset_ranks_before);
  return out;
}

AssetCatalogue::AssetCatalogue(std::vector<Asset> assets)
    : assets_(std::move(assets)) {}

void AssetCatalogue::load(std::vector<Asset> assets) {
  std::lock_guard<std::mutex> lock(mu_);
  assets_ = std::move(assets);
}

std::vector<Asset> AssetCatalogue::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return assets_;
}

std::optional<Asset> AssetCatalogue::find(std::string_view id) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& a : assets_) {
    if (fold(a.id) == fold(id)) return a;
  }
  return std::nullopt;
}

std::vector<Asset> AssetCatalogue::match(const KnowledgeBase& kb,
                                         const Task& task) const {
  return match_assets(kb, task, snapshot());
}

bool AssetCatalogue::try_assign(std::string_view asset_id,
                                std::string_view task_id) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& a : assets_) {
    if (fold(a.id) != fold(asset_id)) continue;
    if (!a.available) return false;
    a.available = false;
    a.tasked_with = std::string(task_id);
    return true;
  }
  return false;
}

void AssetCatalogue::release(std::string_view asset_id) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& a : assets_) {
    if (fold(a.id) == fold(asset_id)) {
      a.available = true;
      a.tasked_with.clear();
    }
  }
}

std::string AssetCatalogue::set_available(std::string_view asset_id,
                                          bool available) {
  std::lock_guard<std::mutex> lock(mu_);
  std::string dropped;
  for (auto& a : assets_) {
    if (fold(a.id) != fold(asset_id)) continue;
    dropped = a.tasked_with;
    a.tasked_with.clear();
    a.available = available;
  }
  return dropped;
}

TaskingMode TaskingConfig::mode_for(Priority p) const {
  auto it = modes.find(p);
  return it == modes.end() ? TaskingMode::kAuthorize : it->second;
}

}  // namespace moira
