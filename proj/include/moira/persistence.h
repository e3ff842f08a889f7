#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "moira/knowledge_base.h"

namespace moira {

class PersistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical CE: model declarations, one "there is a C named X." per
// instance, synonyms, then one sentence per fact. Ids, labels, descriptions
// and provenance ride in `--@ {json}` pragmas; id counters in a header.
std::string persist(const KnowledgeBase& kb);

// Inverse of persist. All-or-nothing; errors carry "line:col: ".
KnowledgeBase restore(std::string_view text);

// Writes through a temporary file and renames.
void persist_file(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase restore_file(const std::filesystem::path& path);

}  // namespace moira
