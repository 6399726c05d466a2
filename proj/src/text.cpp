#include "morphnoise/text.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <utility>

namespace morphnoise {

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    int len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) throw Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (int k = 1; k < len; ++k) {
      const unsigned char b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw Error("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < kMin[len]) throw Error("overlong UTF-8 encoding at offset " + std::to_string(i));
    if (cp >= 0xD800 && cp <= 0xDFFF) throw Error("surrogate code point at offset " + std::to_string(i));
    if (cp > 0x10FFFF) throw Error("code point out of range at offset " + std::to_string(i));
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) out += utf8_encode(c);
  return out;
}

namespace {

// base + combining mark -> precomposed. Covers Latin-1 Supplement,
// the common Latin Extended-A pairs, and Cyrillic Ё/Й with variants.
struct Composition {
  char32_t base;
  char32_t mark;
  char32_t composed;
};

constexpr char32_t kGrave = 0x0300, kAcute = 0x0301, kCirc = 0x0302, kTilde = 0x0303,
                   kMacron = 0x0304, kBreve = 0x0306, kDot = 0x0307, kDiaer = 0x0308,
                   kRing = 0x030A, kDblAcute = 0x030B, kCaron = 0x030C, kCedilla = 0x0327,
                   kOgonek = 0x0328;

constexpr Composition kCompositions[] = {
    {U'A', kGrave, 0x00C0},   {U'A', kAcute, 0x00C1},   {U'A', kCirc, 0x00C2},
    {U'A', kTilde, 0x00C3},   {U'A', kDiaer, 0x00C4},   {U'A', kRing, 0x00C5},
    {U'C', kCedilla, 0x00C7}, {U'E', kGrave, 0x00C8},   {U'E', kAcute, 0x00C9},
    {U'E', kCirc, 0x00CA},    {U'E', kDiaer, 0x00CB},   {U'I', kGrave, 0x00CC},
    {U'I', kAcute, 0x00CD},   {U'I', kCirc, 0x00CE},    {U'I', kDiaer, 0x00CF},
    {U'N', kTilde, 0x00D1},   {U'O', kGrave, 0x00D2},   {U'O', kAcute, 0x00D3},
    {U'O', kCirc, 0x00D4},    {U'O', kTilde, 0x00D5},   {U'O', kDiaer, 0x00D6},
    {U'U', kGrave, 0x00D9},   {U'U', kAcute, 0x00DA},   {U'U', kCirc, 0x00DB},
    {U'U', kDiaer, 0x00DC},   {U'Y', kAcute, 0x00DD},
    {U'a', kGrave, 0x00E0},   {U'a', kAcute, 0x00E1},   {U'a', kCirc, 0x00E2},
    {U'a', kTilde, 0x00E3},   {U'a', kDiaer, 0x00E4},   {U'a', kRing, 0x00E5},
    {U'c', kCedilla, 0x00E7}, {U'e', kGrave, 0x00E8},   {U'e', kAcute, 0x00E9},
    {U'e', kCirc, 0x00EA},    {U'e', kDiaer, 0x00EB},   {U'i', kGrave, 0x00EC},
    {U'i', kAcute, 0x00ED},   {U'i', kCirc, 0x00EE},    {U'i', kDiaer, 0x00EF},
    {U'n', kTilde, 0x00F1},   {U'o', kGrave, 0x00F2},   {U'o', kAcute, 0x00F3},
    {U'o', kCirc, 0x00F4},    {U'o', kTilde, 0x00F5},   {U'o', kDiaer, 0x00F6},
    {U'u', kGrave, 0x00F9},   {U'u', kAcute, 0x00FA},   {U'u', kCirc, 0x00FB},
    {U'u', kDiaer, 0x00FC},   {U'y', kAcute, 0x00FD},   {U'y', kDiaer, 0x00FF},
    {U'A', kMacron, 0x0100},  {U'a', kMacron, 0x0101},  {U'A', kBreve, 0x0102},
    {U'a', kBreve, 0x0103},   {U'A', kOgonek, 0x0104},  {U'a', kOgonek, 0x0105},
    {U'C', kAcute, 0x0106},   {U'c', kAcute, 0x0107},   {U'C', kCaron, 0x010C},
    {U'c', kCaron, 0x010D},   {U'D', kCaron, 0x010E},   {U'd', kCaron, 0x010F},
    {U'E', kMacron, 0x0112},  {U'e', kMacron, 0x0113},  {U'E', kDot, 0x0116},
    {U'e', kDot, 0x0117},     {U'E', kOgonek, 0x0118},  {U'e', kOgonek, 0x0119},
    {U'E', kCaron, 0x011A},   {U'e', kCaron, 0x011B},   {U'G', kBreve, 0x011E},
    {U'g', kBreve, 0x011F},   {U'I', kMacron, 0x012A},  {U'i', kMacron, 0x012B},
    {U'I', kOgonek, 0x012E},  {U'i', kOgonek, 0x012F},  {U'N', kAcute, 0x0143},
    {U'n', kAcute, 0x0144},   {U'N', kCaron, 0x0147},   {U'n', kCaron, 0x0148},
    {U'O', kMacron, 0x014C},  {U'o', kMacron, 0x014D},  {U'O', kDblAcute, 0x0150},
    {U'o', kDblAcute, 0x0151},{U'R', kAcute, 0x0154},   {U'r', kAcute, 0x0155},
    {U'R', kCaron, 0x0158},   {U'r', kCaron, 0x0159},   {U'S', kAcute, 0x015A},
    {U's', kAcute, 0x015B},   {U'S', kCedilla, 0x015E}, {U's', kCedilla, 0x015F},
    {U'S', kCaron, 0x0160},   {U's', kCaron, 0x0161},   {U'T', kCaron, 0x0164},
    {U't', kCaron, 0x0165},   {U'U', kMacron, 0x016A},  {U'u', kMacron, 0x016B},
    {U'U', kRing, 0x016E},    {U'u', kRing, 0x016F},    {U'U', kDblAcute, 0x0170},
    {U'u', kDblAcute, 0x0171},{U'U', kOgonek, 0x0172},  {U'u', kOgonek, 0x0173},
    {U'Y', kDiaer, 0x0178},   {U'Z', kAcute, 0x0179},   {U'z', kAcute, 0x017A},
    {U'Z', kDot, 0x017B},     {U'z', kDot, 0x017C},     {U'Z', kCaron, 0x017D},
    {U'z', kCaron, 0x017E},
    // Cyrillic
    {0x0415, kGrave, 0x0400}, {0x0415, kDiaer, 0x0401}, {0x0418, kGrave, 0x040D},
    {0x0418, kBreve, 0x0419}, {0x0423, kBreve, 0x040E},
    {0x0435, kGrave, 0x0450}, {0x0435, kDiaer, 0x0451}, {0x0438, kGrave, 0x045D},
    {0x0438, kBreve, 0x0439}, {0x0443, kBreve, 0x045E},
};

int combining_class(char32_t c) {
  if (c == kCedilla || c == kOgonek) return 202;
  if (c >= 0x0300 && c <= 0x0315) return 230;
  if (c >= 0x0316 && c <= 0x0319) return 220;
  if (c >= 0x031A && c <= 0x0336) return 230;  // approximate; unused marks pass through
  return 0;
}

const std::map<char32_t, std::pair<char32_t, char32_t>>& decompose_table() {
  static const auto* t = [] {
    auto* m = new std::map<char32_t, std::pair<char32_t, char32_t>>();
    for (const auto& c : kCompositions) (*m)[c.composed] = {c.base, c.mark};
    return m;
  }();
  return *t;
}

const std::map<std::pair<char32_t, char32_t>, char32_t>& compose_table() {
  static const auto* t = [] {
    auto* m = new std::map<std::pair<char32_t, char32_t>, char32_t>();
    for (const auto& c : kCompositions) (*m)[{c.base, c.mark}] = c.composed;
    return m;
  }();
  return *t;
}

}  // namespace

std::string nfc(std::string_view s) {
  std::u32string pts = utf8_decode(s);

  // Decompose (recursively; table depth is 1 so a single pass suffices).
  std::u32string dec;
  dec.reserve(pts.size() + 4);
  const auto& dt = decompose_table();
  for (char32_t c : pts) {
    auto it = dt.find(c);
    if (it == dt.end()) {
      dec.push_back(c);
    } else {
      dec.push_back(it->second.first);
      dec.push_back(it->second.second);
    }
  }

  // Canonical ordering: stable sort of each combining-mark run by class.
  for (std::size_t i = 0; i < dec.size();) {
    if (combining_class(dec[i]) == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < dec.size() && combining_class(dec[j]) != 0) ++j;
    std::stable_sort(dec.begin() + i, dec.begin() + j,
                     [](char32_t a, char32_t b) { return combining_class(a) < combining_class(b); });
    i = j;
  }

  // Compose: pair each starter with following marks unless blocked by a mark
  // of the same or higher class.
  const auto& ct = compose_table();
  std::u32string out;
  out.reserve(dec.size());
  std::size_t i = 0;
  while (i < dec.size()) {
    if (combining_class(dec[i]) != 0) {
      out.push_back(dec[i]);
      ++i;
      continue;
    }
    char32_t starter = dec[i];
    std::vector<char32_t> pending;
    int last_class = 0;
    std::size_t j = i + 1;
    for (; j < dec.size(); ++j) {
      const int cc = combining_class(dec[j]);
      if (cc == 0) break;
      if (cc > last_class) {
        auto it = ct.find({starter, dec[j]});
        if (it != ct.end()) {
          starter = it->second;
          continue;
        }
      }
      pending.push_back(dec[j]);
      last_class = cc;
    }
    out.push_back(starter);
    out.insert(out.end(), pending.begin(), pending.end());
    i = j;
  }
  return utf8_encode(out);
}

std::string fold_case(std::string_view s) {
  std::u32string pts = utf8_decode(s);
  for (char32_t& c : pts) {
    if (c >= U'A' && c <= U'Z') {
      c += 0x20;
    } else if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) {
      c += 0x20;  // Latin-1 capitals
    } else if (c >= 0x0100 && c <= 0x017D) {
      // Latin Extended-A alternates upper/lower except 0x0130/0x0131.
      if (c == 0x0130) {
        c = U'i';
      } else if (c >= 0x0139 && c <= 0x0148) {
        if (c % 2 == 1) c += 1;
      } else if (c >= 0x014A) {
        if (c % 2 == 0) c += 1;
      } else if (c % 2 == 0) {
        c += 1;
      }
    } else if (c >= 0x0410 && c <= 0x042F) {
      c += 0x20;  // Cyrillic capitals
    } else if (c >= 0x0400 && c <= 0x040F) {
      c += 0x50;  // Cyrillic Ё etc.
    }
  }
  return utf8_encode(pts);
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == delim) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool has_tab_or_newline(std::string_view s) {
  return s.find_first_of("\t\n\r") != std::string_view::npos;
}

}  // namespace morphnoise
