#include "morphnoise/tagmap.hpp"

#include <algorithm>

#include "morphnoise/corpus.hpp"
#include "nlohmann/json.hpp"

namespace morphnoise {

using json = nlohmann::ordered_json;

TagMap::TagMap(std::map<std::string, std::vector<std::string>> entries, std::vector<RewriteRule> rewrites)
    : entries_(std::move(entries)), rewrites_(std::move(rewrites)) {
  for (const auto& [tag, ums] : entries_) {
    for (const auto& um : ums) {
      if (um.find(';') != std::string::npos)
        throw Error("tag map entry '" + tag + "' maps to a tag containing ';': '" + um + "'");
    }
  }
  for (const auto& r : rewrites_) {
    for (const auto& t : r.add) {
      if (r.remove.count(t)) throw Error("rewrite rule adds and removes the same tag '" + t + "'");
    }
  }
}

TagMap TagMap::parse(std::string_view tagmap_tsv, std::string_view rewrites_jsonl, std::string_view filename) {
  std::map<std::string, std::vector<std::string>> entries;
  const std::string file(filename);
  int lineno = 0;
  for (const auto& raw : split(tagmap_tsv, '\n')) {
    ++lineno;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError(file, lineno, "expected 2 tab-separated fields");
    if (fields[0].empty()) throw ParseError(file, lineno, "empty analyzer tag");
    std::vector<std::string> ums;
    if (!fields[1].empty()) {
      for (auto& t : split(fields[1], ',')) {
        if (t.empty()) throw ParseError(file, lineno, "empty UniMorph tag");
        ums.push_back(std::move(t));
      }
    }
    entries[fields[0]] = std::move(ums);
  }

  std::vector<RewriteRule> rewrites;
  lineno = 0;
  for (const auto& raw : split(rewrites_jsonl, '\n')) {
    ++lineno;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(file, lineno, std::string("bad rewrite rule JSON: ") + e.what());
    }
    RewriteRule r;
    auto read_set = [&](const char* key) {
      std::set<std::string> s;
      if (j.contains(key)) {
        for (const auto& v : j.at(key)) s.insert(v.get<std::string>());
      }
      return s;
    };
    r.if_present = read_set("if_present");
    r.if_absent = read_set("if_absent");
    r.add = read_set("add");
    r.remove = read_set("remove");
    rewrites.push_back(std::move(r));
  }
  return TagMap(std::move(entries), std::move(rewrites));
}

TagMap TagMap::load(const std::filesystem::path& tagmap_path, const std::filesystem::path& rewrites_path) {
  return parse(read_file(tagmap_path), read_file(rewrites_path), tagmap_path.string());
}

TagMap TagMap::load(const std::filesystem::path& tagmap_path) {
  return parse(read_file(tagmap_path), "", tagmap_path.string());
}

std::string TagMap::serialize_entries() const {
  std::string out;
  for (const auto& [tag, ums] : entries_) {
    out += tag;
    out += '\t';
    bool first = true;
    for (const auto& um : ums) {
      if (!first) out += ',';
      first = false;
      out += um;
    }
    out += '\n';
  }
  return out;
}

std::string TagMap::serialize_rewrites() const {
  std::string out;
  for (const auto& r : rewrites_) {
    json j;
    j["if_present"] = r.if_present;
    j["if_absent"] = r.if_absent;
    j["add"] = r.add;
    j["remove"] = r.remove;
    out += j.dump();
    out += '\n';
  }
  return out;
}

bool is_mapped(const MapResult& r) { return std::holds_alternative<Msd>(r); }

const Msd& mapped_msd(const MapResult& r) { return std::get<Msd>(r); }

MapResult map_analysis(const Analysis& analysis, const TagMap& tagmap) {
  if (analysis.tags.empty()) throw Error("analysis has no tags");
  const auto& entries = tagmap.entries();

  std::string pos;
  std::vector<std::string> features;
  bool first_tag = true;
  for (const auto& tag : analysis.tags) {
    auto it = entries.find(tag);
    if (it == entries.end()) return Unmappable{tag};
    const auto& ums = it->second;
    if (first_tag) {
      // The analyzer POS tag must yield the MSD's POS; a drop here leaves no
      // grammatical category to anchor the bundle.
      if (ums.empty()) return Unmappable{tag};
      pos = ums.front();
      features.insert(features.end(), ums.begin() + 1, ums.end());
      first_tag = false;
    } else {
      features.insert(features.end(), ums.begin(), ums.end());
    }
  }

  // Rewrites see the full bundle (POS included) but only edit features.
  for (const auto& rule : tagmap.rewrites()) {
    auto present = [&](const std::string& t) {
      return t == pos || std::find(features.begin(), features.end(), t) != features.end();
    };
    bool fires = std::all_of(rule.if_present.begin(), rule.if_present.end(), present) &&
                 std::none_of(rule.if_absent.begin(), rule.if_absent.end(), present);
    if (!fires) continue;
    for (const auto& t : rule.remove)
      features.erase(std::remove(features.begin(), features.end(), t), features.end());
    for (const auto& t : rule.add) {
      if (std::find(features.begin(), features.end(), t) == features.end()) features.push_back(t);
    }
  }

  return Msd(std::move(pos), std::move(features));
}

MappedSet map_analysis_set(const AnalysisSet& as, const TagMap& tagmap) {
  MappedSet out;
  for (const auto& a : as.analyses) {
    MapResult r = map_analysis(a, tagmap);
    if (is_mapped(r)) {
      out.msds.push_back(std::get<Msd>(std::move(r)));
    } else {
      ++out.unmappable_count;
    }
  }
  std::sort(out.msds.begin(), out.msds.end());
  out.msds.erase(std::unique(out.msds.begin(), out.msds.end()), out.msds.end());
  return out;
}

}  // namespace morphnoise
