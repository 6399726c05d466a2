#include "doctest.h"
#include "morphnoise/rng.hpp"
#include "morphnoise/text.hpp"

using namespace morphnoise;

TEST_CASE("utf8 round trip") {
  const std::string s = "tr\xC3\xA4gt \xD0\xB9\xD0\xBE";  // trägt йо
  CHECK(utf8_encode(utf8_decode(s)) == s);
  CHECK(utf8_decode("abc").size() == 3);
  CHECK_THROWS_AS(utf8_decode("\xFF"), Error);
  CHECK_THROWS_AS(utf8_decode("\xC3"), Error);          // truncated
  CHECK_THROWS_AS(utf8_decode("\xC0\xAF"), Error);      // overlong
  CHECK_THROWS_AS(utf8_decode("\xED\xA0\x80"), Error);  // surrogate
}

TEST_CASE("nfc composes combining sequences") {
  // a + combining diaeresis -> ä
  CHECK(nfc("a\xCC\x88") == "\xC3\xA4");
  // already composed stays put
  CHECK(nfc("\xC3\xA4") == "\xC3\xA4");
  // Cyrillic и + breve -> й
  CHECK(nfc("\xD0\xB8\xCC\x86") == "\xD0\xB9");
  // uncovered code points pass through
  CHECK(nfc("abc") == "abc");
  CHECK(nfc("\xC3\x9F") == "\xC3\x9F");  // ß has no decomposition
}

TEST_CASE("nfc idempotence on random mixed strings") {
  Rng rng(42);
  const std::vector<std::string> pieces = {
      "a", "b", "tr", "\xC3\xA4", "\xC3\xB6", "\xC3\xBC", "a\xCC\x88", "o\xCC\x88",
      "\xD0\xB9", "\xD0\xB8\xCC\x86", "e\xCC\x81", "\xC5\xA1", "s\xCC\x8C", "x\xCC\x88\xCC\x81",
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const int n = 1 + static_cast<int>(rng.index(8));
    for (int i = 0; i < n; ++i) s += pieces[rng.index(pieces.size())];
    const std::string once = nfc(s);
    CHECK(nfc(once) == once);
  }
}

TEST_CASE("fold_case covers latin and cyrillic") {
  CHECK(fold_case("Warp") == "warp");
  CHECK(fold_case("\xC3\x84hnlich") == "\xC3\xA4hnlich");  // Ähnlich
  CHECK(fold_case("\xD0\x99\xD0\x9E") == "\xD0\xB9\xD0\xBE");
}

TEST_CASE("split keeps empty fields") {
  auto f = split("a\t\tb", '\t');
  REQUIRE(f.size() == 3);
  CHECK(f[1].empty());
  CHECK(split("", '\t').size() == 1);
}
