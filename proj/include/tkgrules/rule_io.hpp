#pragma once

#include <filesystem>
#include <iosfwd>

#include "tkgrules/rule.hpp"

namespace tkgr {

class Vocabulary;

inline constexpr int kRuleFormatVersion = 1;

// One JSON object per line. The first line is a header
//   {"format":"tkgrules","version":1,"num_rules":N,"num_entities":...,...}
// followed by N rule records
//   {"type":"xy","head_relation":3,"body_relation":7,"params":{...},
//    "static_conf":0.2,"support":120,"positives":31,"rule":"..."}.
// Doubles are written in shortest round-trip form, so parse(write(rs)) == rs.
// `vocab` only feeds the human-readable "rule" field.
void write_rules(std::ostream& out, const RuleSet& rules, const Vocabulary* vocab = nullptr);
void save_rules(const std::filesystem::path& path, const RuleSet& rules, const Vocabulary* vocab = nullptr);

// Throws DataError naming the line on malformed records, a version mismatch,
// or a record count that disagrees with the header.
RuleSet read_rules(std::istream& in);
RuleSet load_rules(const std::filesystem::path& path);

}  // namespace tkgr
