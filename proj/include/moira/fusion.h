#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "moira/ce_ast.h"
#include "moira/knowledge_base.h"

namespace moira {

class RuleError : public std::runtime_error {
 public:
  RuleError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// ?v (variable), v48 (constant), 'North Road' (quoted constant) or
// SS_?v (template: constant text with embedded variables).
struct RuleTerm {
  enum class Kind { kVariable, kConstant, kTemplate };
  Kind kind = Kind::kConstant;
  std::string text;

  bool operator==(const RuleTerm&) const = default;
};

struct RulePattern {
  enum class Kind { kIsA, kProperty, kNewInstance };
  Kind kind = Kind::kProperty;
  RuleTerm subject;
  std::string property;  // kProperty
  PropertyForm form = PropertyForm::kHasAs;
  RuleTerm object;            // kProperty
  std::string concept_name;   // kIsA, kNewInstance

  bool operator==(const RulePattern&) const = default;
};

struct Rule {
  std::string name;
  int priority = 0;
  std::vector<RulePattern> conditions;
  std::vector<RulePattern> productions;

  bool operator==(const Rule&) const = default;
};

// Block syntax:
//   rule <name>
//   priority <n>            (optional)
//   if:
//     ?p is a suspect
//     ?p has ?r as linked vehicle registration
//   then:
//     there is a suspect sighting named SS_?v
//     SS_?v has ?v as target vehicle
// Verb-form patterns read "<term> <property words> <term>". `--` comments.
std::vector<Rule> parse_rules(std::string_view text);
// One pattern line; verb-form property names are resolved against `model`
// when given.
RulePattern parse_pattern(std::string_view line, int line_no = 0);
std::string render_pattern(const RulePattern& pattern);
std::string render_rules(const std::vector<Rule>& rules);

// Concepts and property names resolve; production variables are bound by
// conditions; productions never use "is a" on a literal.
void validate_rules(const std::vector<Rule>& rules, const Model& model);

using Bindings = std::map<std::string, Term>;

struct Solution {
  Bindings bindings;
  std::vector<std::string> premises;  // fact ids, condition order, distinct
};

// Every way to satisfy all patterns against the KB. "X is a C" holds
// through an "is a" fact (preferred, becomes a premise) or X's primary
// concept (no premise).
std::vector<Solution> solve(const KnowledgeBase& kb,
                            const std::vector<RulePattern>& conditions);

struct RunResult {
  std::vector<std::string> new_fact_ids;
  std::vector<std::string> new_instance_ids;
  int rounds = 0;
  bool capped = false;
  std::string diagnostic;
};

// Semi-naive forward chaining to fixpoint. Rules run in priority order
// (higher first, then file order); the fixpoint does not depend on it.
RunResult run_rules(KnowledgeBase& kb, const std::vector<Rule>& rules,
                    int max_rounds = 64);

// Re-derives an inferred fact from its recorded rule and premises.
bool audit_fact(const KnowledgeBase& kb, const std::vector<Rule>& rules,
                const Fact& fact);

struct Rationale {
  std::string conclusion;  // fact id
  std::string rule;        // empty for told facts
  std::vector<std::string> premises;
  CeStatement because;
  std::string text;
};

// Inferred: because-statement over the premises, each subject introduced on
// first mention. Told: because-statement citing source and time.
Rationale rationale(const KnowledgeBase& kb, std::string_view fact_id);

// Fact-pattern subscriptions. Existing matches are delivered on subscribe;
// later ones after each commit, in subscription order.
class SubscriptionHub {
 public:
  using Callback = std::function<void(const std::vector<Fact>&)>;

  int subscribe(const KnowledgeBase& kb, const FactPattern& pattern,
                Callback callback);
  void unsubscribe(int id);
  void publish(const KnowledgeBase& kb,
               const std::vector<std::string>& new_fact_ids);
  std::size_t size() const;

 private:
  struct Entry {
    int id;
    FactPattern pattern;
    Callback callback;
  };
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
  int next_id_ = 1;
};

}  // namespace moira
