#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "morphnoise/types.hpp"

namespace morphnoise {

struct ParseError : Error {
  ParseError(std::string file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file(std::move(file)), line(line) {}
  std::string file;
  int line;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Pairs file: TSV `source \t target \t slot`, slot a non-negative integer.
std::vector<InflectionPair> parse_pairs_text(std::string_view text, std::string_view language = "und",
                                             std::string_view filename = "<string>");
std::vector<InflectionPair> parse_pairs(const std::filesystem::path& path, std::string_view language = "und");
std::string serialize_pairs(const std::vector<InflectionPair>& pairs);

// UniMorph-style table: TSV `lemma \t form \t MSD` with ";"-joined tags.
std::vector<EvalInstance> parse_unimorph_text(std::string_view text, std::string_view language = "und",
                                              std::string_view filename = "<string>");
std::vector<EvalInstance> parse_unimorph(const std::filesystem::path& path, std::string_view language = "und");
std::string serialize_unimorph(const std::vector<EvalInstance>& rows);

// Analyses file: TSV `surface \t lemma1<t1><t2>;lemma2<t1>...`. An empty
// second field marks the surface unanalyzable. Duplicate surfaces merge.
std::map<std::string, AnalysisSet> parse_analyses_text(std::string_view text, std::string_view language = "und",
                                                       std::string_view filename = "<string>");
std::map<std::string, AnalysisSet> parse_analyses(const std::filesystem::path& path,
                                                  std::string_view language = "und");
std::string serialize_analyses(const std::map<std::string, AnalysisSet>& analyses);

// One token per line; blank lines ignored; deduplicated; NFC-normalized.
std::set<std::string> parse_wordlist_text(std::string_view text, std::string_view filename = "<string>");
std::set<std::string> parse_lexicon(const std::filesystem::path& path);
std::set<std::string> parse_valid_pos(const std::filesystem::path& path);
std::string serialize_wordlist(const std::set<std::string>& words);

}  // namespace morphnoise
