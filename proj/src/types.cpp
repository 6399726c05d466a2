#include "morphnoise/types.hpp"

#include <algorithm>
#include <array>

namespace morphnoise {

WordForm WordForm::make(std::string_view surface, std::string_view language) {
  if (surface.empty()) throw Error("word form must be non-empty");
  if (has_tab_or_newline(surface)) throw Error("word form contains tab or newline: '" + std::string(surface) + "'");
  return WordForm{nfc(surface), std::string(language)};
}

namespace {

struct DimEntry {
  std::string_view tag;
  int rank;
};

// Canonical dimension order: POS (implicit, first), mood, finiteness, tense,
// aspect, voice, case, gender, person, number, definiteness, comparison,
// everything else. Matches the rendering conventions of UniMorph data
// (e.g. V;IND;PRS;2;PL, N;ACC;PL).
constexpr std::array<DimEntry, 66> kDims{{
    {"IND", 0},  {"SBJV", 0}, {"IMP", 0},  {"COND", 0}, {"OPT", 0},  {"POT", 0},  {"JUS", 0},
    {"FIN", 1},  {"NFIN", 1},
    {"PRS", 2},  {"PST", 2},  {"FUT", 2},  {"NPST", 2}, {"NFUT", 2},
    {"IPFV", 3}, {"PFV", 3},  {"PROG", 3}, {"PRF", 3},  {"HAB", 3},
    {"ACT", 4},  {"PASS", 4}, {"MID", 4},  {"ANTIP", 4},
    {"NOM", 5},  {"ACC", 5},  {"DAT", 5},  {"GEN", 5},  {"INS", 5},  {"LOC", 5},  {"VOC", 5},
    {"ABL", 5},  {"ERG", 5},  {"ABS", 5},  {"ESS", 5},  {"COM", 5},  {"PRT", 5},  {"ALL", 5},
    {"ILL", 5},  {"ELA", 5},  {"INE", 5},  {"ADE", 5},  {"TRANS", 5},
    {"MASC", 6}, {"FEM", 6},  {"NEUT", 6}, {"ANIM", 6}, {"INAN", 6}, {"HUM", 6},  {"NHUM", 6},
    {"1", 7},    {"2", 7},    {"3", 7},    {"4", 7},
    {"SG", 8},   {"PL", 8},   {"DU", 8},   {"PAUC", 8}, {"GRPL", 8},
    {"DEF", 9},  {"INDF", 9}, {"NDEF", 9},
    {"CMPR", 10}, {"SPRL", 10}, {"EQTV", 10},
    {"LGSPEC1", 11}, {"LGSPEC2", 11},
}};

}  // namespace

int msd_dimension_rank(std::string_view tag) {
  for (const auto& d : kDims) {
    if (d.tag == tag) return d.rank;
  }
  return 12;
}

Msd::Msd(std::string pos, std::vector<std::string> features) : pos_(std::move(pos)) {
  if (pos_.empty()) throw Error("MSD requires a POS tag");
  std::stable_sort(features.begin(), features.end(), [](const std::string& a, const std::string& b) {
    const int ra = msd_dimension_rank(a), rb = msd_dimension_rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });
  features.erase(std::unique(features.begin(), features.end()), features.end());
  features_ = std::move(features);
  canonical_ = pos_;
  for (const auto& f : features_) {
    canonical_ += ';';
    canonical_ += f;
  }
}

Msd Msd::parse(std::string_view text) {
  std::vector<std::string> parts = split(text, ';');
  for (const auto& p : parts) {
    if (p.empty()) throw Error("malformed MSD '" + std::string(text) + "': empty tag");
  }
  if (parts.empty()) throw Error("empty MSD");
  std::string pos = parts.front();
  parts.erase(parts.begin());
  return Msd(std::move(pos), std::move(parts));
}

std::vector<std::string> Msd::tags() const {
  std::vector<std::string> out;
  out.reserve(features_.size() + 1);
  out.push_back(pos_);
  out.insert(out.end(), features_.begin(), features_.end());
  return out;
}

void AnalysisSet::insert(Analysis a) {
  auto it = std::lower_bound(analyses.begin(), analyses.end(), a);
  if (it == analyses.end() || *it != a) analyses.insert(it, std::move(a));
}

namespace {
constexpr std::array<std::string_view, 5> kFlagNames{"LEX", "POS", "POS_PAIR", "PDGM", "SLOT"};
constexpr std::array<std::string_view, 3> kReasonNames{"UNANNOTATABLE", "UNMAPPABLE", "UNMATCHED_SLOT"};
}  // namespace

std::string_view noise_flag_name(NoiseFlag f) { return kFlagNames[static_cast<int>(f)]; }

std::optional<NoiseFlag> noise_flag_from_name(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kFlagNames[i] == name) return static_cast<NoiseFlag>(i);
  }
  return std::nullopt;
}

int FlagSet::count() const {
  int n = 0;
  for (int i = 0; i < 5; ++i) {
    if (bits_ & (1u << i)) ++n;
  }
  return n;
}

NoiseFlag FlagSet::primary() const {
  for (int i = 0; i < 5; ++i) {
    if (bits_ & (1u << i)) return static_cast<NoiseFlag>(i);
  }
  throw Error("primary() on empty flag set");
}

std::string FlagSet::to_string(char sep) const {
  std::string out;
  for (int i = 0; i < 5; ++i) {
    if (bits_ & (1u << i)) {
      if (!out.empty()) out += sep;
      out += kFlagNames[i];
    }
  }
  return out;
}

FlagSet FlagSet::from_string(std::string_view text) {
  FlagSet fs;
  if (text.empty()) return fs;
  const char sep = text.find(',') != std::string_view::npos ? ',' : '+';
  for (const auto& part : split(text, sep)) {
    auto f = noise_flag_from_name(part);
    if (!f) throw Error("unknown noise flag '" + part + "'");
    fs.set(*f);
  }
  return fs;
}

std::string_view filter_reason_name(FilterReason r) { return kReasonNames[static_cast<int>(r)]; }

std::optional<FilterReason> filter_reason_from_name(std::string_view name) {
  for (int i = 0; i < 3; ++i) {
    if (kReasonNames[i] == name) return static_cast<FilterReason>(i);
  }
  return std::nullopt;
}

AnnotationResult AnnotationResult::noisy(FlagSet f) {
  if (f.empty()) throw Error("noisy annotation requires at least one flag");
  AnnotationResult r;
  r.status = Status::Noisy;
  r.flags = f;
  return r;
}

AnnotationResult AnnotationResult::filtered(FilterReason reason) {
  AnnotationResult r;
  r.status = Status::Filtered;
  r.reason = reason;
  return r;
}

std::string AnnotationResult::status_string() const {
  switch (status) {
    case Status::Correct:
      return "correct";
    case Status::Noisy:
      return "noisy";
    case Status::Filtered:
      return "filtered:" + std::string(filter_reason_name(*reason));
  }
  return "";
}

AnnotationResult AnnotationResult::from_strings(std::string_view status, std::string_view flags) {
  if (status == "correct") return correct();
  if (status == "noisy") return noisy(FlagSet::from_string(flags));
  if (status.starts_with("filtered:")) {
    auto r = filter_reason_from_name(status.substr(9));
    if (!r) throw Error("unknown filter reason in '" + std::string(status) + "'");
    return filtered(*r);
  }
  throw Error("unknown annotation status '" + std::string(status) + "'");
}

}  // namespace morphnoise
