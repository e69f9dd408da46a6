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


#include "test_support.hpp"
#include "vdc/error.hpp"
#include "vdc/textindex.hpp"
#include "vdc/unicode.hpp"
#include <algorithm>
#include <gtest/gtest.h>
#include <map>
#include <random>
#include <set>


using namespace vdc;
using namespace vdc::test;

namespace {

Document doc(std::string id, std::string body, std::vector<std::pair<std::string, std::string>> fields = {},
             std::optional<GeoPoint> geo = std::nullopt)
{
    return { id, { "s", "t", id }, std::move(fields), std::move(body), geo };
}

/** Hand-built corpus of random words from a small vocabulary, so terms repeat across documents. */
std::vector<Document> random_corpus(std::mt19937_64 &rng, std::size_t n)
{
    static const char *words[] = { "receipt", "Brief", "letter", "λόγος", "ΛΌΓΟΣ", "wheat", "Weizen", "oil", "öl", "ÖL",
                                   "Oxy", "12", "1432", "sale", "lease", "Marcus", "aurelius", "ca.", "loan", "tax" };
    std::vector<Document> out;
    for (std::size_t i = 0; i != n; ++i) {
        std::string body, title;
        for (std::size_t k = rng() % 12; k; --k) body += std::string(words[rng() % 20]) + (rng() % 4 ? " " : ", ");
        for (std::size_t k = rng() % 4; k; --k) title += std::string(words[rng() % 20]) + "-";
        std::optional<GeoPoint> geo;
        if (rng() % 3) geo = GeoPoint{ static_cast<double>(rng() % 181) - 90, static_cast<double>(rng() % 361) - 180 };
        out.push_back(doc("d" + std::to_string(1000 + i), body, title.empty() ? decltype(Document::fields){} : decltype(Document::fields){ { "title", title } }, geo));
    }
    return out;
}

/** Naive searcher: tokenizes every document on each query.  Returns doc id → summed term frequency for documents
 * where every term occurs in one of `fields`. */
std::map<std::string, std::uint64_t> naive_scores(const std::vector<Document> &docs, const std::vector<std::string> &terms,
                                                  const std::vector<std::string> &fields)
{
    const std::set<std::string> distinct(terms.begin(), terms.end());
    std::map<std::string, std::uint64_t> out;
    for (const auto &d : docs) {
        std::vector<std::string> tokens;
        for (const auto &f : fields) {
            const std::string *text = f == "body" ? &d.body : d.field(f);
            if (not text) continue;
            for (auto &t : unicode::tokenize(*text)) tokens.push_back(std::move(t));
        }
        std::uint64_t score = 0;
        bool all = true;
        for (const auto &t : distinct) {
            const auto n = static_cast<std::uint64_t>(std::count(tokens.begin(), tokens.end(), t));
            all = all and n;
            score += n;
        }
        if (all) out[d.doc_id] = score;
    }
    return out;
}

std::set<std::string> naive_search(const std::vector<Document> &docs, const std::vector<std::string> &terms, const std::string &field)
{
    std::set<std::string> out;
    for (const auto &[id, score] : naive_scores(docs, terms, { field })) out.insert(id);
    return out;
}

}

TEST(Recipe, ParseExample)
{
    const auto r = parse_recipe("# hgv\nrecipe hgv\nfrom hgv.papyri\nid \"HGV Nummer\"\nfield title = Titel\nbody Titel\n"
                                "body \"Inhaltsübersicht\"\ngeo Breite \"Länge\"\nindex body\nindex title\nend\n");
    EXPECT_EQ(r.name, "hgv");
    EXPECT_EQ(r.from, (RelationName{ "hgv", "papyri" }));
    EXPECT_EQ(r.id_column, "HGV Nummer");
    EXPECT_EQ(r.body_columns, (std::vector<std::string>{ "Titel", "Inhaltsübersicht" }));
    EXPECT_EQ(r.geo, (std::pair<std::string, std::string>{ "Breite", "Länge" }));
    EXPECT_EQ(r.indexed_fields(), (std::vector<std::string>{ "body", "title" }));
    EXPECT_EQ(parse_recipe(format_recipe(r)), r);
}

TEST(Recipe, DefaultIndexIsBody)
{
    const auto r = parse_recipe("recipe r\nfrom s.t\nid k\nbody text\nend");
    EXPECT_EQ(r.indexed_fields(), std::vector<std::string>{ "body" });
}

TEST(Recipe, Errors)
{
    for (const char *text : { "recipe r\nfrom s.t\nid k\nbody b\n", "recipe r\nfrom s.t\nbody b\nend\n", "recipe r\nfrom s.t\nid k\nend\n",
                              "recipe r\nfrom s.t\nid k\nbody b\nindex nope\nend\n", "recipe r\nfrom s.t\nid k\nbody b\nfrob x\nend\n",
                              "recipe r\nid k\nbody b\nend\n" })
        EXPECT_THROW(parse_recipe(text), ParseError) << text;
    const TableSchema schema{ "t", { { "k", ColumnKind::Int }, { "b", ColumnKind::Text } } };
    EXPECT_NO_THROW(validate_recipe(parse_recipe("recipe r\nfrom s.t\nid k\nbody b\nend"), schema));
    EXPECT_THROW(validate_recipe(parse_recipe("recipe r\nfrom s.t\nid x\nbody b\nend"), schema), IngestError);
    EXPECT_THROW(validate_recipe(parse_recipe("recipe r\nfrom s.t\nid k\nbody zz\nend"), schema), IngestError);
}

TEST(Ingest, XmlCorpusOneDocPerFile)
{
    TempDir d;
    for (const char *id : { "a", "b", "c" })
        write_file(d / "x" / (std::string(id) + ".xml"),
                   std::string("<doc id=\"") + id + "\"><meta><title>t</title></meta><text>body " + id + "</text></doc>");
    auto src = open_source({ "x", SourceKind::XmlCorpus, d / "x", AccessMode::Live });
    const auto r = ingest_documents(*src, parse_recipe("recipe r\nfrom x.docs\nid id\nbody body\nend"));
    ASSERT_EQ(r.documents.size(), 3u);
    EXPECT_EQ(r.documents[1].body, "body b");
    EXPECT_EQ(r.documents[1].ref, (ItemRef{ "x", "docs", "b" }));
}

TEST(Ingest, BodyJoinGeoAndWarnings)
{
    TempDir d;
    write_table(d / "s", "t", "k : int\na : text\nb : text\nlat : text\nlon : text\n",
                "k,a,b,lat,lon\n1,x,y,29.5,30.25\n2,,z,91.0,10\n3,p,,n. a.,5\n4,q,r,,\n");
    auto src = open_source({ "s", SourceKind::Tabular, d / "s", AccessMode::Live });
    const auto r = ingest_documents(*src, parse_recipe("recipe r\nfrom s.t\nid k\nfield first = a\nbody a\nbody b\ngeo lat lon\nend"));
    ASSERT_EQ(r.documents.size(), 4u);
    EXPECT_EQ(r.documents[0].body, "x y");
    EXPECT_EQ(r.documents[0].geo, (GeoPoint{ 29.5, 30.25 }));
    EXPECT_EQ(r.documents[1].body, "z");
    EXPECT_FALSE(r.documents[1].geo);
    EXPECT_FALSE(r.documents[2].geo);
    EXPECT_FALSE(r.documents[3].geo);
    EXPECT_EQ(r.documents[1].field("first"), nullptr);
    EXPECT_EQ(*r.documents[0].field("first"), "x");
    /* Out-of-range and non-numeric coordinates warn; absent ones do not. */
    EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(Ingest, DuplicateIdNamesBothItems)
{
    TempDir d;
    write_table(d / "s", "t", "k : text\nb : text\n", "k,b\nr1,x\nr2,y\nr1,z\n");
    auto src = open_source({ "s", SourceKind::Tabular, d / "s", AccessMode::Live });
    try {
        ingest_documents(*src, parse_recipe("recipe r\nfrom s.t\nid k\nbody b\nend"));
        FAIL();
    } catch (const IngestError &e) {
        EXPECT_NE(std::string(e.what()).find("s/t/r1"), std::string::npos) << e.what();
    }
    EXPECT_THROW(ingest_documents(*src, parse_recipe("recipe r\nfrom s.t\nid missing\nbody b\nend")), IngestError);
}

TEST(BuildIndex, CountsTermFrequency)
{
    const auto idx = build_index({ doc("only", "a b a") }, { "body" });
    const auto &body = idx.fields.at("body");
    EXPECT_EQ(body.at("a"), (std::vector<Posting>{ { 0, 2 } }));
    EXPECT_EQ(body.at("b"), (std::vector<Posting>{ { 0, 1 } }));
    EXPECT_EQ(body.size(), 2u);
}

TEST(BuildIndex, EmptyHasValidHeader)
{
    const auto idx = build_index({}, { "body" });
    const std::string bytes = write_index(idx);
    EXPECT_TRUE(bytes.starts_with("VDCIDX 1\n")) << bytes;
    EXPECT_EQ(read_index(bytes), idx);
}

TEST(BuildIndex, OrdinalsByAscendingDocId)
{
    const auto idx = build_index({ doc("b", "x"), doc("a", "x"), doc("c", "y") }, { "body" });
    ASSERT_EQ(idx.docs.size(), 3u);
    EXPECT_EQ(idx.docs[0].doc_id, "a");
    EXPECT_EQ(idx.fields.at("body").at("x"), (std::vector<Posting>{ { 0, 1 }, { 1, 1 } }));
    EXPECT_EQ(idx.find("c")->ref.item_id, "c");
    EXPECT_EQ(idx.find("zz"), nullptr);
    EXPECT_THROW(build_index({ doc("a", "x"), doc("a", "y") }, { "body" }), IngestError);
}

TEST(BuildIndex, PermutedInputGivesIdenticalBytesProperty)
{
    std::mt19937_64 rng(31);
    for (int round = 0; round != 30; ++round) {
        auto docs = random_corpus(rng, 1 + rng() % 40);
        const std::string first = write_index(build_index(docs, { "body", "title" }));
        std::shuffle(docs.begin(), docs.end(), rng);
        ASSERT_EQ(write_index(build_index(docs, { "body", "title" })), first);
        ASSERT_EQ(write_index(build_index(docs, { "title", "body" })), first);
    }
}

TEST(BuildIndex, CompletenessProperty)
{
    std::mt19937_64 rng(32);
    for (int round = 0; round != 30; ++round) {
        const auto docs = random_corpus(rng, rng() % 30);
        const auto idx = build_index(docs, { "body", "title" });
        for (const std::string field : { "body", "title" }) {
            std::size_t tokens = 0, tf = 0;
            for (const auto &d : docs) {
                const std::string *text = field == "body" ? &d.body : d.field(field);
                if (text) tokens += unicode::tokenize(*text).size();
            }
            if (auto it = idx.fields.find(field); it != idx.fields.end())
                for (const auto &[term, postings] : it->second) {
                    for (std::size_t i = 0; i != postings.size(); ++i) {
                        ASSERT_GE(postings[i].tf, 1u);
                        if (i) {
                            ASSERT_LT(postings[i - 1].ordinal, postings[i].ordinal);
                        }
                    }
                    for (const auto &p : postings) tf += p.tf;
                }
            EXPECT_EQ(tf, tokens) << field;
        }
    }
}

TEST(IndexFile, RoundTripAndEscapes)
{
    const auto idx = build_index({ doc("a\tb", "x"), doc("s;c\\d", "y", { { "title", "semi;colon\ttab\\slash\nline" } }, GeoPoint{ -12.5, 170.125 }) },
                                 { "body", "title" });
    const std::string bytes = write_index(idx);
    const auto back = read_index(bytes);
    EXPECT_EQ(back, idx);
    EXPECT_EQ(write_index(back), bytes);
    EXPECT_EQ(*back.find("s;c\\d")->geo, (GeoPoint{ -12.5, 170.125 }));
}

TEST(IndexFile, FileRoundTrip)
{
    TempDir d;
    std::mt19937_64 rng(1);
    const auto idx = build_index(random_corpus(rng, 50), { "body" });
    write_index(idx, d / "i.idx");
    EXPECT_EQ(read_index_file(d / "i.idx"), idx);
    EXPECT_EQ(read_file(d / "i.idx"), write_index(idx));
}

TEST(IndexFile, Corruption)
{
    const std::string good = write_index(build_index({ doc("a", "x y"), doc("b", "y z") }, { "body" }));
    EXPECT_NO_THROW(read_index(good));
    EXPECT_THROW(read_index(good.substr(0, good.size() - 4)), IndexFormatError);
    EXPECT_THROW(read_index(good.substr(0, good.size() / 2)), IndexFormatError);
    std::string version = good;
    version.replace(0, 8, "VDCIDX 2");
    EXPECT_THROW(read_index(version), IndexFormatError);
    EXPECT_THROW(read_index("hello\n"), IndexFormatError);
    EXPECT_THROW(read_index(""), IndexFormatError);
    /* Swap two term lines so the terms are out of code-point order. */
    std::string swapped = good;
    const auto x = swapped.find("\nx\t"), z = swapped.find("\nz\t");
    ASSERT_NE(x, std::string::npos);
    ASSERT_NE(z, std::string::npos);
    swapped[x + 1] = 'z';
    swapped[z + 1] = 'x';
    EXPECT_THROW(read_index(swapped), IndexFormatError);
    std::string ordinal = good;
    const auto pos = ordinal.find("\ny\t0:1,1:1");
    ASSERT_NE(pos, std::string::npos) << good;
    ordinal.replace(pos, 10, "\ny\t1:1,0:1");
    EXPECT_THROW(read_index(ordinal), IndexFormatError);
    std::string bad_tf = good;
    bad_tf.replace(good.find("\nx\t0:1"), 6, "\nx\t0:0");
    EXPECT_THROW(read_index(bad_tf), IndexFormatError);
}

TEST(Search, Examples)
{
    const auto idx = build_index({ doc("a", "receipt wheat receipt"), doc("b", "letter"), doc("c", "receipt oil") }, { "body" });
    EXPECT_EQ(search(idx, SearchQuery::keywords("letter")), (std::vector<SearchHit>{ { "b", { "s", "t", "b" }, 1 } }));
    EXPECT_TRUE(search(idx, SearchQuery::keywords("letter oil")).empty());
    EXPECT_TRUE(search(idx, SearchQuery::keywords("unknown")).empty());
    const auto hits = search(idx, SearchQuery::keywords("RECEIPT"));
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].doc_id, "a");
    EXPECT_EQ(hits[0].score, 2u);
    auto limited = SearchQuery::keywords("receipt");
    limited.limit = 1;
    EXPECT_EQ(search(idx, limited).size(), 1u);
    /* Repeated query terms count once. */
    EXPECT_EQ(search(idx, SearchQuery::keywords("receipt receipt"))[0].score, 2u);
}

TEST(Search, FieldRestriction)
{
    const auto idx = build_index({ doc("a", "tax", { { "title", "loan" } }), doc("b", "loan", { { "title", "tax" } }) }, { "body", "title" });
    auto q = SearchQuery::keywords("loan");
    q.field = "title";
    EXPECT_EQ(search(idx, q).size(), 1u);
    EXPECT_EQ(search(idx, q)[0].doc_id, "a");
    q.field = "unindexed";
    EXPECT_TRUE(search(idx, q).empty());
}

TEST(Search, UsageErrors)
{
    const auto idx = build_index({ doc("a", "x") }, { "body" });
    EXPECT_THROW(search(idx, SearchQuery{}), UsageError);
    SearchQuery inverted;
    inverted.bbox = BoundingBox{ 10, 0, 0, 10 };
    EXPECT_THROW(search(idx, inverted), UsageError);
    EXPECT_THROW(parse_bbox("1,2,3"), UsageError);
    EXPECT_THROW(parse_bbox("1,2,3,x"), UsageError);
    EXPECT_THROW(parse_bbox("0,0,95,10"), UsageError);
    const auto b = parse_bbox("29,30.5,31,32");
    EXPECT_EQ(b.min_lat, 29);
    EXPECT_EQ(b.min_lon, 30.5);
}

TEST(Search, BboxBoundaryInclusiveProperty)
{
    std::mt19937_64 rng(33);
    const auto docs = random_corpus(rng, 300);
    const auto idx = build_index(docs, { "body" });
    for (int i = 0; i != 200; ++i) {
        const double a = static_cast<double>(rng() % 181) - 90, b = static_cast<double>(rng() % 181) - 90;
        const double c = static_cast<double>(rng() % 361) - 180, d = static_cast<double>(rng() % 361) - 180;
        SearchQuery q;
        q.bbox = BoundingBox{ std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d) };
        if (rng() % 2) q.terms = { "receipt" };
        std::set<std::string> expected;
        const auto with_term = naive_search(docs, q.terms, "body");
        for (const auto &doc : docs)
            if (doc.geo and doc.geo->lat >= q.bbox->min_lat and doc.geo->lat <= q.bbox->max_lat and doc.geo->lon >= q.bbox->min_lon
                and doc.geo->lon <= q.bbox->max_lon and (q.terms.empty() or with_term.count(doc.doc_id)))
                expected.insert(doc.doc_id);
        std::set<std::string> got;
        for (const auto &h : search(idx, q)) got.insert(h.doc_id);
        ASSERT_EQ(got, expected);
    }
    /* A point exactly on the box edge is inside. */
    const auto edge = build_index({ doc("e", "x", {}, GeoPoint{ 10, 20 }) }, { "body" });
    SearchQuery q;
    q.bbox = BoundingBox{ 10, 20, 10, 20 };
    EXPECT_EQ(search(edge, q).size(), 1u);
}

TEST(Search, MatchesNaiveOracleProperty)
{
    std::mt19937_64 rng(34);
    std::size_t checked = 0, nonempty = 0;
    for (int corpus = 0; corpus != 10; ++corpus) {
        const auto docs = random_corpus(rng, 20 + rng() % 80);
        const auto idx = build_index(docs, { "body", "title" });
        std::vector<std::string> vocabulary;
        for (const auto &[term, postings] : idx.fields.at("body")) vocabulary.push_back(term);
        vocabulary.push_back("absent");
        for (int i = 0; i != 60; ++i) {
            std::vector<std::string> terms;
            for (std::size_t k = 1 + rng() % 3; k; --k) terms.push_back(vocabulary[rng() % vocabulary.size()]);
            const std::string field = rng() % 4 ? "body" : "title";
            SearchQuery q;
            q.terms = terms;
            if (field != "body" or rng() % 2) q.field = field;
            const auto hits = search(idx, q);
            std::map<std::string, std::uint64_t> got;
            for (std::size_t h = 0; h != hits.size(); ++h) {
                got[hits[h].doc_id] = hits[h].score;
                /* Ranking is a strict total order. */
                if (h) {
                    ASSERT_TRUE(hits[h - 1].score > hits[h].score or (hits[h - 1].score == hits[h].score and hits[h - 1].doc_id < hits[h].doc_id));
                }
            }
            const auto fields = q.field ? std::vector<std::string>{ *q.field } : std::vector<std::string>{ "body", "title" };
            ASSERT_EQ(got, naive_scores(docs, terms, fields));
            ++checked;
            nonempty += not got.empty();
        }
    }
    EXPECT_GE(checked, 500u);
    EXPECT_GT(nonempty, checked / 4);
}

TEST(Search, FixtureReceiptMatchesNaiveScan)
{
    const fs::path fx = desk_fixture();
    std::vector<Document> all;
    for (const char *id : { "hgv", "volterra", "iaph" }) {
        const bool xml = std::string(id) == "iaph";
        auto src = open_source({ id, xml ? SourceKind::XmlCorpus : SourceKind::Tabular, fx / id, AccessMode::Live });
        auto r = ingest_documents(*src, parse_recipe(read_file(fx / "recipes" / (std::string(id) + ".recipe"))));
        for (auto &d : r.documents) {
            d.doc_id = std::string(id) + ":" + d.doc_id;
            all.push_back(std::move(d));
        }
    }
    const auto idx = build_index(all, { "body" });
    for (const char *term : { "receipt", "letter", "decree", "wheat" }) {
        std::set<std::string> got;
        auto q = SearchQuery::keywords(term);
        q.field = "body";
        for (const auto &h : search(idx, q)) got.insert(h.doc_id);
        EXPECT_EQ(got, naive_search(all, { term }, "body")) << term;
    }
}

TEST(VirtualCollection, AddDeduplicates)
{
    VirtualCollection c{ "mine", {} };
    const ItemRef r1{ "a", "t", "1" }, r2{ "a", "t", "2" };
    EXPECT_EQ(c.add({ r1, r2, r1 }), 2u);
    EXPECT_EQ(c.refs, (std::vector<ItemRef>{ r1, r2 }));
    EXPECT_EQ(c.add({ r2 }), 0u);
}
