#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moira/interpreter.h"
#include "moira/knowledge_base.h"

namespace moira {

struct ReportRow {
  std::string input;
  std::string ce;
  int score = 0;
  std::vector<std::string> unmatched;
  long phrases = 0;
  long sentences = 0;
  long clauses = 0;
  long words = 0;

  bool operator==(const ReportRow&) const = default;
};

// One line of the summary table. Mean is kept in hundredths (rounded half
// up) and the median doubled, so both print exactly.
struct Statistic {
  std::string name;
  long max = 0;
  long min = 0;
  long mean_hundredths = 0;
  long median_doubled = 0;

  std::string mean_text() const;
  std::string median_text() const;
  bool operator==(const Statistic&) const = default;
};

inline constexpr std::string_view kStatisticNames[] = {"Phrases", "Sentences", "Clauses",
                                                       "Words", "Score"};

Statistic summarise(std::string_view name, std::vector<long> values);

struct RunReport {
  std::vector<ReportRow> rows;

  // Empty when there are no rows.
  std::vector<Statistic> statistics() const;
  bool operator==(const RunReport&) const = default;
};

// Each non-blank line is one submission. Every row is interpreted against
// `kb` in order; only its id counters advance.
RunReport run_interpret(KnowledgeBase& kb, std::istream& input,
                        const InterpreterOptions& options = {});
ReportRow report_row(std::string_view input, const Interpretation& interpretation);

std::string render_text(const RunReport& report);
nlohmann::json to_json(const RunReport& report);
// Rejects reports whose statistics do not match their rows.
RunReport report_from_json(const nlohmann::json& j);

}  // namespace moira
