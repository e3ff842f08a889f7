#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "moira/ce_ast.h"
#include "moira/knowledge_base.h"

namespace moira {

class GistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GistContext {
  std::string role;              // e.g. patrol, analyst
  std::string device = "phone";  // "glass" selects icon segments
  std::string purpose;           // confirm, notify, lookout, authorize

  bool operator==(const GistContext&) const = default;
};

struct GistSegment {
  std::string icon;  // symbolic key, e.g. "uav", "car"
  std::string caption;

  bool operator==(const GistSegment&) const = default;
};

struct GistDescriptor {
  std::string text;
  std::vector<GistSegment> segments;
  std::vector<std::string> source_ids;  // heads of the gisted statements
  std::string template_name;            // empty for the CE fallback

  bool operator==(const GistDescriptor&) const = default;
};

// Pattern text with {a/b} slots (follow property a, then b), {?a/b}
// presence tests that print nothing, and [ ... ] groups that vanish when a
// slot inside them is empty.
struct GistTemplate {
  std::string name;
  std::string trigger;  // concept
  std::string purpose;  // empty matches any purpose
  std::string pattern;
  std::vector<std::string> optional;  // slots that may render empty
  std::vector<std::pair<std::string, std::string>> segments;  // icon, pattern
  std::map<std::string, std::vector<std::string>> withhold;   // role -> slots
};

// Blocks of "template <name>" followed by trigger:, purpose:, pattern:,
// optional: (comma separated), segment: <icon> <pattern>, withhold: <role>
// <slot>. `--` comments.
std::vector<GistTemplate> parse_templates(std::string_view text);
// Trigger concepts resolve and every slot's first property is declared.
// Instances can carry several types, so domains are not checked.
void validate_templates(const std::vector<GistTemplate>& templates,
                        const Model& model);

// Never fails: with no applicable template the text is the canonical CE.
GistDescriptor gist(const KnowledgeBase& kb,
                    std::span<const CeStatement> statements,
                    const std::vector<GistTemplate>& templates,
                    const GistContext& context);

// Gists keep a back-reference to the exact CE they were rendered from.
class GistStore {
 public:
  struct Entry {
    std::string id;
    GistDescriptor descriptor;
    std::string ce_text;
    std::vector<CeStatement> statements;
  };

  std::string put(GistDescriptor descriptor,
                  std::vector<CeStatement> statements);
  std::optional<Entry> find(std::string_view id) const;
  // Throws GistError for unknown ids.
  Entry expand(std::string_view id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
  long next_ = 0;
};

}  // namespace moira
