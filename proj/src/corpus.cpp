#include "morphnoise/corpus.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace morphnoise {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

namespace {

// Calls fn(line_number, line) for each non-empty line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++lineno;
    std::string_view line = strip_cr(text.substr(start, end - start));
    if (!line.empty()) fn(lineno, line);
    if (end == text.size()) break;
    start = end + 1;
  }
}

std::int64_t parse_slot(std::string_view field, const std::string& file, int lineno) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(file, lineno, "slot is not an integer: '" + std::string(field) + "'");
  if (v < 0) throw ParseError(file, lineno, "slot must be non-negative");
  return v;
}

}  // namespace

std::vector<InflectionPair> parse_pairs_text(std::string_view text, std::string_view language,
                                             std::string_view filename) {
  std::vector<InflectionPair> out;
  const std::string file(filename);
  for_each_line(text, [&](int lineno, std::string_view line) {
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(file, lineno, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    InflectionPair p;
    try {
      p.source = WordForm::make(fields[0], language);
      p.target = WordForm::make(fields[1], language);
    } catch (const Error& e) {
      throw ParseError(file, lineno, e.what());
    }
    p.slot = parse_slot(fields[2], file, lineno);
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<InflectionPair> parse_pairs(const std::filesystem::path& path, std::string_view language) {
  return parse_pairs_text(read_file(path), language, path.string());
}

std::string serialize_pairs(const std::vector<InflectionPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += p.source.surface;
    out += '\t';
    out += p.target.surface;
    out += '\t';
    out += std::to_string(p.slot);
    out += '\n';
  }
  return out;
}

std::vector<EvalInstance> parse_unimorph_text(std::string_view text, std::string_view language,
                                              std::string_view filename) {
  std::vector<EvalInstance> out;
  const std::string file(filename);
  for_each_line(text, [&](int lineno, std::string_view line) {
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(file, lineno, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    EvalInstance e;
    try {
      e.lemma = WordForm::make(fields[0], language);
      e.target = WordForm::make(fields[1], language);
      e.msd = Msd::parse(fields[2]);
    } catch (const Error& err) {
      throw ParseError(file, lineno, err.what());
    }
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<EvalInstance> parse_unimorph(const std::filesystem::path& path, std::string_view language) {
  return parse_unimorph_text(read_file(path), language, path.string());
}

std::string serialize_unimorph(const std::vector<EvalInstance>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.lemma.surface;
    out += '\t';
    out += r.target.surface;
    out += '\t';
    out += r.msd.canonical();
    out += '\n';
  }
  return out;
}

namespace {

Analysis parse_analysis_item(std::string_view item, std::string_view language, const std::string& file, int lineno) {
  const std::size_t first = item.find('<');
  if (first == std::string_view::npos || first == 0)
    throw ParseError(file, lineno, "analysis item must match lemma(<tag>)+: '" + std::string(item) + "'");
  Analysis a;
  try {
    a.lemma = WordForm::make(item.substr(0, first), language);
  } catch (const Error& e) {
    throw ParseError(file, lineno, e.what());
  }
  std::size_t pos = first;
  while (pos < item.size()) {
    if (item[pos] != '<') throw ParseError(file, lineno, "expected '<' in analysis item: '" + std::string(item) + "'");
    const std::size_t close = item.find('>', pos);
    if (close == std::string_view::npos || close == pos + 1)
      throw ParseError(file, lineno, "malformed tag in analysis item: '" + std::string(item) + "'");
    a.tags.emplace_back(item.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  if (a.tags.empty()) throw ParseError(file, lineno, "analysis item has no tags: '" + std::string(item) + "'");
  return a;
}

}  // namespace

std::map<std::string, AnalysisSet> parse_analyses_text(std::string_view text, std::string_view language,
                                                       std::string_view filename) {
  std::map<std::string, AnalysisSet> out;
  const std::string file(filename);
  for_each_line(text, [&](int lineno, std::string_view line) {
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError(file, lineno, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    WordForm surface;
    try {
      surface = WordForm::make(fields[0], language);
    } catch (const Error& e) {
      throw ParseError(file, lineno, e.what());
    }
    auto [it, inserted] = out.try_emplace(surface.surface, AnalysisSet{surface, {}});
    if (!fields[1].empty()) {
      for (const auto& item : split(fields[1], ';')) {
        if (item.empty()) throw ParseError(file, lineno, "empty analysis item");
        it->second.insert(parse_analysis_item(item, language, file, lineno));
      }
    }
  });
  return out;
}

std::map<std::string, AnalysisSet> parse_analyses(const std::filesystem::path& path, std::string_view language) {
  return parse_analyses_text(read_file(path), language, path.string());
}

std::string serialize_analyses(const std::map<std::string, AnalysisSet>& analyses) {
  std::string out;
  for (const auto& [surface, as] : analyses) {
    out += surface;
    out += '\t';
    bool first = true;
    for (const auto& a : as.analyses) {
      if (!first) out += ';';
      first = false;
      out += a.lemma.surface;
      for (const auto& t : a.tags) {
        out += '<';
        out += t;
        out += '>';
      }
    }
    out += '\n';
  }
  return out;
}

std::set<std::string> parse_wordlist_text(std::string_view text, std::string_view filename) {
  std::set<std::string> out;
  const std::string file(filename);
  for_each_line(text, [&](int lineno, std::string_view line) {
    if (has_tab_or_newline(line)) throw ParseError(file, lineno, "token contains tab");
    out.insert(nfc(line));
  });
  return out;
}

std::set<std::string> parse_lexicon(const std::filesystem::path& path) {
  return parse_wordlist_text(read_file(path), path.string());
}

std::set<std::string> parse_valid_pos(const std::filesystem::path& path) {
  return parse_wordlist_text(read_file(path), path.string());
}

std::string serialize_wordlist(const std::set<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    out += w;
    out += '\n';
  }
  return out;
}

}  // namespace morphnoise
