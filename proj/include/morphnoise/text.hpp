#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace morphnoise {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// UTF-8 codec. Decoding rejects malformed sequences, overlong encodings and
// surrogate code points.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(char32_t c);

// Canonical composition (NFC) over a curated table covering Latin and
// Cyrillic precomposed characters; code points outside the table pass
// through untouched. Idempotent.
std::string nfc(std::string_view s);

// Simple one-to-one lowercasing (ASCII, Latin-1, Latin Extended-A, Cyrillic).
std::string fold_case(std::string_view s);

// Splits on a delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view s, char delim);

// Strips a trailing '\r' (files may be CRLF).
std::string_view strip_cr(std::string_view line);

bool has_tab_or_newline(std::string_view s);

}  // namespace morphnoise
