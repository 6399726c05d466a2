#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "morphnoise/types.hpp"

namespace morphnoise {

// Set-conditioned tag rewrite, applied at most once per MSD. A rule fires
// when every if_present tag is in the bundle and no if_absent tag is.
struct RewriteRule {
  std::set<std::string> if_present;
  std::set<std::string> if_absent;
  std::set<std::string> add;
  std::set<std::string> remove;
};

// Translates analyzer tags one at a time into UniMorph tags, then applies
// ordered rewrite rules. An analyzer tag may expand to several UniMorph tags
// or to none (dropped).
class TagMap {
 public:
  TagMap() = default;
  TagMap(std::map<std::string, std::vector<std::string>> entries, std::vector<RewriteRule> rewrites);

  // Tag-map file: TSV `analyzer_tag \t um_tag1[,um_tag2...]` (empty second
  // field drops the tag). Rewrite file: one JSON object per line with keys
  // if_present/if_absent/add/remove.
  static TagMap parse(std::string_view tagmap_tsv, std::string_view rewrites_jsonl,
                      std::string_view filename = "<string>");
  static TagMap load(const std::filesystem::path& tagmap_path, const std::filesystem::path& rewrites_path);
  static TagMap load(const std::filesystem::path& tagmap_path);  // no rewrites

  std::string serialize_entries() const;
  std::string serialize_rewrites() const;

  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }
  const std::vector<RewriteRule>& rewrites() const { return rewrites_; }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
  std::vector<RewriteRule> rewrites_;
};

// An analysis whose tags could not all be translated; carries the first
// offending tag. This is a value, not a failure: such forms get filtered.
struct Unmappable {
  std::string tag;
};

using MapResult = std::variant<Msd, Unmappable>;

bool is_mapped(const MapResult& r);
const Msd& mapped_msd(const MapResult& r);

// Translates every analyzer tag, concatenates, applies rewrites in order,
// and canonicalizes. The first analyzer tag must translate to a non-empty
// sequence whose first element becomes the POS.
MapResult map_analysis(const Analysis& analysis, const TagMap& tagmap);

struct MappedSet {
  std::vector<Msd> msds;  // sorted, unique
  int unmappable_count = 0;
};

MappedSet map_analysis_set(const AnalysisSet& as, const TagMap& tagmap);

}  // namespace morphnoise
