#include <gtest/gtest.h>

#include "ta_gate/text.hpp"

using namespace ta_gate::text;

TEST(Text, NormalizeNewlines) {
  EXPECT_EQ(normalize_newlines("a\r\nb\rc\n"), "a\nb\nc\n");
  EXPECT_EQ(normalize_newlines(""), "");
}

TEST(Text, SplitLinesDropsTrailingEmpty) {
  auto lines = split_lines("a\n\nb\n");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], "");
  EXPECT_EQ(split_lines("x").size(), 1u);
  EXPECT_TRUE(split_lines("").empty());
}

TEST(Text, CaseHelpers) {
  EXPECT_TRUE(starts_with_icase("Main Issues (if...)", "main issues"));
  EXPECT_TRUE(contains_icase("Is the function CORRECT according", "correct according"));
  EXPECT_FALSE(starts_with_icase("Mai", "main"));
}

TEST(Text, DecodeUtf8) {
  EXPECT_EQ(decode_utf8("a\xc3\xa9\xe2\x82\xac"), (std::u32string{U'a', U'é', U'€'}));
  // invalid byte kept as one unit
  EXPECT_EQ(decode_utf8("\xff").size(), 1u);
}

TEST(Text, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Text, Identifier) {
  EXPECT_TRUE(contains_identifier("x = rle(s)", "rle"));
  EXPECT_FALSE(contains_identifier("x = rle2(s)", "rle"));
}

TEST(Text, CsvRoundTrip) {
  std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", ""};
  std::vector<std::string> escaped;
  for (auto& f : fields) escaped.push_back(csv_escape(f));
  EXPECT_EQ(parse_csv_line(join(escaped, ",")), fields);
}
