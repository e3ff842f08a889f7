#include "moira/run_report.h"

#include <algorithm>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "moira/ce_parser.h"
#include "moira/text.h"

namespace moira {

std::string Statistic::mean_text() const {
  std::string sign = mean_hundredths < 0 ? "-" : "";
  long v = mean_hundredths < 0 ? -mean_hundredths : mean_hundredths;
  std::string frac = std::to_string(v % 100);
  if (frac.size() < 2) frac = "0" + frac;
  return sign + std::to_string(v / 100) + "." + frac;
}

std::string Statistic::median_text() const {
  if (median_doubled % 2 == 0) return std::to_string(median_doubled / 2);
  std::string sign = median_doubled < 0 ? "-" : "";
  long v = median_doubled < 0 ? -median_doubled : median_doubled;
  return sign + std::to_string(v / 2) + ".5";
}

Statistic summarise(std::string_view name, std::vector<long> values) {
  Statistic s;
  s.name = std::string(name);
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  long n = static_cast<long>(values.size());
  long sum = 0;
  for (long v : values) sum += v;
  // round(100 * sum / n), half away from zero.
  long num = 200 * sum + (sum >= 0 ? n : -n);
  s.mean_hundredths = num / (2 * n);
  std::size_t mid = values.size() / 2;
  s.median_doubled = values.size() % 2 ? 2 * values[mid] : values[mid - 1] + values[mid];
  return s;
}

std::vector<Statistic> RunReport::statistics() const {
  if (rows.empty()) return {};
  std::vector<long> p, se, c, w, sc;
  for (const auto& r : rows) {
    p.push_back(r.phrases);
    se.push_back(r.sentences);
    c.push_back(r.clauses);
    w.push_back(r.words);
    sc.push_back(r.score);
  }
  return {summarise(kStatisticNames[0], p), summarise(kStatisticNames[1], se),
          summarise(kStatisticNames[2], c), summarise(kStatisticNames[3], w),
          summarise(kStatisticNames[4], sc)};
}

ReportRow report_row(std::string_view input, const Interpretation& in) {
  ReportRow r;
  r.input = std::string(input);
  r.ce = render_statements(in.statements, RenderStyle::kMultiLine);
  r.score = in.score;
  for (const auto& u : in.unmatched_words) r.unmatched.push_back(u.text);
  r.phrases = static_cast<long>(in.input.phrase_count());
  r.sentences = static_cast<long>(in.input.sentence_count());
  r.clauses = static_cast<long>(in.input.clause_count());
  r.words = static_cast<long>(in.input.word_count());
  return r;
}

RunReport run_interpret(KnowledgeBase& kb, std::istream& input,
                        const InterpreterOptions& options) {
  RunReport report;
  std::string line;
  while (std::getline(input, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    report.rows.push_back(report_row(line, interpret(line, kb, options)));
  }
  return report;
}

std::string render_text(const RunReport& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    out << "# " << i + 1 << "\n";
    out << "input: " << r.input << "\n";
    out << "score: " << r.score << "\n";
    out << "unmatched: " << (r.unmatched.empty() ? "-" : join(r.unmatched, " ")) << "\n";
    out << "ce:\n";
    std::istringstream ce(r.ce);
    std::string l;
    bool any = false;
    while (std::getline(ce, l)) {
      out << "  " << l << "\n";
      any = true;
    }
    if (!any) out << "  -\n";
    out << "\n";
  }
  auto stats = report.statistics();
  if (stats.empty()) {
    out << "statistics: undefined (no inputs)\n";
    return out.str();
  }
  out << "statistics over " << report.rows.size() << " inputs\n";
  auto pad = [](std::string s, std::size_t width, bool left) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
  };
  out << pad("", 10, true) << pad("max", 6, false) << pad("min", 6, false)
      << pad("mean", 9, false) << pad("median", 8, false) << "\n";
  for (const auto& s : stats) {
    out << pad(s.name, 10, true) << pad(std::to_string(s.max), 6, false)
        << pad(std::to_string(s.min), 6, false) << pad(s.mean_text(), 9, false)
        << pad(s.median_text(), 8, false) << "\n";
  }
  return out.str();
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"input", r.input},
                    {"ce", r.ce},
                    {"score", r.score},
                    {"unmatched", r.unmatched},
                    {"phrases", r.phrases},
                    {"sentences", r.sentences},
                    {"clauses", r.clauses},
                    {"words", r.words}});
  }
  nlohmann::json stats = nullptr;
  auto all = report.statistics();
  if (!all.empty()) {
    stats = nlohmann::json::array();
    for (const auto& s : all) {
      stats.push_back({{"name", s.name},
                       {"max", s.max},
                       {"min", s.min},
                       {"mean", s.mean_text()},
                       {"median", s.median_text()}});
    }
  }
  return {{"rows", rows}, {"statistics", stats}};
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport report;
  for (const auto& r : j.at("rows")) {
    ReportRow row;
    row.input = r.at("input").get<std::string>();
    row.ce = r.at("ce").get<std::string>();
    row.score = r.at("score").get<int>();
    row.unmatched = r.at("unmatched").get<std::vector<std::string>>();
    row.phrases = r.at("phrases").get<long>();
    row.sentences = r.at("sentences").get<long>();
    row.clauses = r.at("clauses").get<long>();
    row.words = r.at("words").get<long>();
    report.rows.push_back(std::move(row));
  }
  if (to_json(report).at("statistics") != j.at("statistics"))
    throw std::invalid_argument("statistics do not match the rows");
  return report;
}

}  // namespace moira
