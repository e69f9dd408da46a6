/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/


#include "vdc/csv.hpp"
#include "vdc/error.hpp"
#include "vdc/unicode.hpp"
#include "vdc/xml.hpp"
#include <gtest/gtest.h>
#include <random>


using namespace vdc;

TEST(Tokenize, Examples)
{
    EXPECT_EQ(unicode::tokenize("Marcus Aurelius"), (std::vector<std::string>{ "marcus", "aurelius" }));
    EXPECT_TRUE(unicode::tokenize("").empty());
    EXPECT_EQ(unicode::tokenize("P.Oxy. 12,1432"), (std::vector<std::string>{ "p", "oxy", "12", "1432" }));
    EXPECT_EQ(unicode::tokenize("--über--ÖL"), (std::vector<std::string>{ "über", "öl" }));
}

TEST(Tokenize, GreekAgainstFoldingTable)
{
    /* Greek letters and their simple case folds. */
    const std::pair<const char*, const char*> table[] = {
        { "Λ", "λ" }, { "Ο", "ο" }, { "Γ", "γ" }, { "Σ", "σ" }, { "Ά", "ά" }, { "Ω", "ω" }, { "ς", "σ" },
    };
    for (auto [upper, lower] : table) EXPECT_EQ(unicode::fold(upper), lower) << upper;
    EXPECT_EQ(unicode::tokenize("ΛΌΓΟΣ"), unicode::tokenize("λόγος"));
}

TEST(Tokenize, NfcBeforeSplitting)
{
    /* "Länge" with a combining diaeresis is one token equal to the precomposed form. */
    EXPECT_EQ(unicode::tokenize("La\xcc\x88nge"), unicode::tokenize("L\xc3\xa4nge"));
}

TEST(Unicode, Utf8Validation)
{
    EXPECT_TRUE(unicode::is_valid_utf8("plain"));
    EXPECT_TRUE(unicode::is_valid_utf8("Λόγος"));
    EXPECT_FALSE(unicode::is_valid_utf8("\xff"));
    EXPECT_FALSE(unicode::is_valid_utf8("\xc3"));
    EXPECT_FALSE(unicode::is_valid_utf8("\xed\xa0\x80")); // surrogate
}

TEST(Unicode, FoldedContains)
{
    EXPECT_TRUE(unicode::folded_contains("Quittung über Weizen", "ÜBER"));
    EXPECT_TRUE(unicode::folded_contains("abc", ""));
    EXPECT_FALSE(unicode::folded_contains("abc", "abd"));
}

TEST(Csv, ParseQuotedMultilineCrlf)
{
    const auto r = csv::parse("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\n\"multi\nline\",\n\n");
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[1], (std::vector<std::string>{ "x,1", "he said \"hi\"" }));
    EXPECT_EQ(r[2], (std::vector<std::string>{ "multi\nline", "" }));
}

TEST(Csv, MalformedReportsLine)
{
    try {
        csv::parse("a,b\n1,2\n\"open,3\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line, 3u);
    }
    EXPECT_THROW(csv::parse("a,b\n\"x\"y,1\n"), ParseError);
}

TEST(CsvProperty, FormatParseRoundTrip)
{
    std::mt19937_64 rng(3);
    const std::string alphabet = "ab ,\"\n\rzä";
    for (int i = 0; i != 500; ++i) {
        std::vector<std::vector<std::string>> records;
        const std::size_t n = 1 + rng() % 4, width = 1 + rng() % 4;
        std::string text;
        for (std::size_t r = 0; r != n; ++r) {
            std::vector<std::string> rec;
            for (std::size_t c = 0; c != width; ++c) {
                std::string f;
                for (std::size_t k = rng() % 5; k; --k) f += alphabet[rng() % alphabet.size()];
                rec.push_back(f);
            }
            /* A single empty field formats as a blank line, which readers skip. */
            if (width == 1 and rec[0].empty()) rec[0] = "x";
            text += csv::format_record(rec);
            records.push_back(rec);
        }
        ASSERT_EQ(csv::parse(text), records);
    }
}

TEST(Xml, ParsesSubset)
{
    const auto root = xml::parse("<?xml version=\"1.0\"?>\n<!-- c --><doc id=\"a&amp;b\"><t>x<![CDATA[<y>]]>&#65;&#x42;</t></doc>");
    EXPECT_EQ(root->name, "doc");
    EXPECT_EQ(*root->attribute("id"), "a&b");
    EXPECT_EQ(root->text_content(), "x<y>AB");
}

TEST(Xml, RejectsMalformed)
{
    EXPECT_THROW(xml::parse("<doc><a></doc>"), ParseError);
    EXPECT_THROW(xml::parse("<doc>"), ParseError);
    EXPECT_THROW(xml::parse("<!DOCTYPE x><doc/>"), ParseError);
    EXPECT_THROW(xml::parse("<doc a='1' a='2'/>"), ParseError);
    EXPECT_THROW(xml::parse("<doc/><doc/>"), ParseError);
    EXPECT_THROW(xml::parse("<doc>&bogus;</doc>"), ParseError);
}

TEST(Xml, CollapseWhitespace)
{
    EXPECT_EQ(xml::collapse_whitespace("  a \n\t b  "), "a b");
    EXPECT_EQ(xml::collapse_whitespace(" \n "), "");
}
