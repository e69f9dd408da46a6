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


#include "query_generator.hpp"
#include "test_support.hpp"
#include "vdc/error.hpp"
#include "vdc/query.hpp"
#include "vdc/unicode.hpp"
#include <gtest/gtest.h>
#include <algorithm>
#include <cctype>
#include <map>
#include <random>


using namespace vdc;
using namespace vdc::test;

TEST(QueryProperty, ExecutorMatchesReferenceAndPushdownIsTransparent)
{
    FixtureCatalogue fc;
    const auto snap = fc.snapshot();
    QueryGenerator gen(20240, fixture_relations(snap));
    PlanOptions off;
    off.pushdown = false;
    std::size_t checked = 0, nonempty = 0, joins = 0;
    while (checked < 1200) {
        const auto g = gen.next();
        SCOPED_TRACE(g.text);
        QueryAst ast;
        ASSERT_NO_THROW(ast = parse_query(g.text));
        ResultSet expected;
        ASSERT_NO_THROW(expected = reference_eval(ast, snap));
        const ResultSet on = execute_plan(plan_query(ast, snap));
        const ResultSet no = execute_plan(plan_query(ast, snap, off));
        ASSERT_EQ(on.rows, expected.rows);
        ASSERT_EQ(on, expected);
        ASSERT_EQ(format_csv(on), format_csv(no));
        ASSERT_EQ(warning_text(on), warning_text(no));
        ++checked;
        nonempty += not on.rows.empty();
        joins += not g.swapped.empty();
    }
    /* Guard against a generator that only produces trivial or empty queries. */
    EXPECT_GT(nonempty, checked / 3);
    EXPECT_GT(joins, checked / 4);
}

TEST(QueryProperty, JoinOperandSymmetry)
{
    FixtureCatalogue fc;
    const auto snap = fc.snapshot();
    QueryGenerator gen(777, fixture_relations(snap));
    std::size_t checked = 0;
    while (checked < 200) {
        const auto g = gen.next();
        if (g.swapped.empty()) continue;
        SCOPED_TRACE(g.text);
        /* LIMIT picks a prefix of the canonical order, which is the same for both forms. */
        EXPECT_EQ(snap.query(g.text).rows, snap.query(g.swapped).rows);
        ++checked;
    }
}

TEST(QueryProperty, ContainsMatchesNaiveFoldedSearch)
{
    FixtureCatalogue fc;
    const auto snap = fc.snapshot();
    const auto all = snap.query("SELECT id, title FROM volterra_texts");
    std::mt19937_64 rng(99);
    for (int i = 0; i != 200; ++i) {
        const std::string &title = all.rows[rng() % all.rows.size()][1].as_text();
        const auto words = unicode::tokenize(title);
        std::string needle = words.empty() ? "a" : words[rng() % words.size()];
        if (needle.size() > 2 and rng() % 2) needle = needle.substr(1, needle.size() - 2);
        std::vector<Row> expected;
        const std::string folded_needle = unicode::fold(unicode::nfc(needle));
        for (const auto &r : all.rows)
            if (unicode::fold(unicode::nfc(r[1].as_text())).find(folded_needle) != std::string::npos) expected.push_back(r);
        EXPECT_EQ(snap.query("SELECT id, title FROM volterra_texts WHERE title CONTAINS " + quote(needle)).rows, expected) << needle;
    }
}

TEST(QueryProperty, SmallTablesWithThreeWayJoins)
{
    TempDir d;
    Catalogue cat(d / "c.vdc");
    std::mt19937_64 rng(4);
    for (const char *id : { "a", "b", "c" }) {
        std::string csv = "k,g,word,when\n";
        const char *words[] = { "Alpha", "beta", "GAMMA", "", "delta epsilon" };
        const char *dates[] = { "0100", "0100-05", "ca. 0150", "0120/0170", "", "nonsense" };
        for (int r = 0, n = static_cast<int>(rng() % 30); r != n; ++r)
            csv += std::to_string(r) + "," + (rng() % 8 ? std::to_string(rng() % 5) : "") + "," + words[rng() % 5] + ","
                   + dates[rng() % 6] + "\n";
        write_table(d / id, "t", "k : int\ng : int\nword : text\nwhen : date_text\n", csv);
        cat.register_source({ id, SourceKind::Tabular, d / id, AccessMode::Live });
        write_file(d / (std::string(id) + ".view"), std::string("view v") + id + "\nfrom " + id + ".t\ncoerce when date\nend\n");
        cat.define_view(d / (std::string(id) + ".view"));
    }
    const auto snap = cat.snapshot();
    PlanOptions off;
    off.pushdown = false;
    std::uniform_int_distribution<int> small(0, 4);
    const char *rels[] = { "va", "vb", "vc", "a.t", "b.t" };
    for (int i = 0; i != 300; ++i) {
        std::string q = std::string("SELECT x.k, z.word FROM ") + rels[rng() % 5] + " x JOIN " + rels[rng() % 5] + " y ON x.g = y.g JOIN "
                        + rels[rng() % 5] + " z ON y.k = z.k";
        if (rng() % 2) q += " WHERE z.word CONTAINS 'a' AND x.k > " + std::to_string(small(rng));
        SCOPED_TRACE(q);
        const auto ast = parse_query(q);
        PlanOptions hash;
        hash.nested_loop_threshold = 0;
        const auto expected = reference_eval(ast, snap);
        ASSERT_EQ(execute_plan(plan_query(ast, snap)), expected);
        ASSERT_EQ(execute_plan(plan_query(ast, snap, hash)), expected);
        ASSERT_EQ(execute_plan(plan_query(ast, snap, off)), expected);
    }
    /* Coerced date warnings appear when the date column is used. */
    const auto dated = snap.query("SELECT k, when FROM va");
    EXPECT_EQ(dated, reference_eval(parse_query("SELECT k, when FROM va"), snap));
}
