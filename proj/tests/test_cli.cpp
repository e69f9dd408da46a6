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
#include "vdc/cli.hpp"
#include "vdc/csv.hpp"
#include <gtest/gtest.h>
#include <regex>


using namespace vdc;
using namespace vdc::test;

namespace {

struct Outcome
{
    int code;
    std::string out, err;
};

/** Runs the CLI against one catalogue file. */
class Cli
{
    public:
    TempDir dir;
    fs::path catalogue = dir / "catalogue.vdc";

    Outcome operator()(std::vector<std::string> args) const {
        args.insert(args.begin(), { "--catalogue", catalogue.string() });
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return { code, out.str(), err.str() };
    }

    /** Registers the desk fixture the same way an operator would from the shell. */
    void register_fixture(const std::string &iaph_mode = "vault") const {
        const fs::path fx = desk_fixture();
        ok({ "source", "add", "hgv", "--kind", "tabular", "--path", (fx / "hgv").string(), "--mode", "vault" });
        ok({ "source", "add", "volterra", "--kind", "tabular", "--path", (fx / "volterra").string(), "--mode", "vault" });
        ok({ "source", "add", "iaph", "--kind", "xml", "--path", (fx / "iaph").string(), "--mode", iaph_mode });
        ok({ "xlate", "add", "de_en", (fx / "translations" / "de_en.csv").string() });
        ok({ "view", "define", (fx / "views" / "papyri_en.view").string() });
        ok({ "view", "define", (fx / "views" / "volterra_texts.view").string() });
        if (iaph_mode != "index-only") ok({ "view", "define", (fx / "views" / "iaph_docs.view").string() });
    }

    Outcome ok(std::vector<std::string> args) const {
        Outcome r = (*this)(args);
        EXPECT_EQ(r.code, 0) << r.err;
        return r;
    }
};

std::vector<std::vector<std::string>> records(const std::string &csv_text) { return csv::parse(csv_text); }

std::string first_iaph_id()
{
    std::vector<std::string> ids;
    for (const auto &e : fs::directory_iterator(desk_fixture() / "iaph")) ids.push_back(e.path().stem().string());
    std::sort(ids.begin(), ids.end());
    return ids.front();
}

}

TEST(Cli, HelpAndUsageErrors)
{
    Cli cli;
    const auto help = cli({ "--help" });
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("Usage"), std::string::npos);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({ "frobnicate" }).code, 1);
    EXPECT_EQ(cli({ "source", "add", "x", "--kind", "csv", "--path", "/tmp", "--mode", "vault" }).code, 1);
    EXPECT_EQ(cli({ "query" }).code, 1);
    const auto bad_fmt = cli({ "query", "SELECT * FROM t", "--format", "xml" });
    EXPECT_EQ(bad_fmt.code, 1);
    EXPECT_TRUE(bad_fmt.out.empty());
    EXPECT_FALSE(bad_fmt.err.empty());
}

TEST(Cli, QueryLimitOne)
{
    Cli cli;
    cli.register_fixture();
    const auto r = cli.ok({ "query", "SELECT * FROM papyri LIMIT 1", "--format", "csv" });
    const auto rec = records(r.out);
    ASSERT_EQ(rec.size(), 2u);
    EXPECT_EQ(rec[0][0], "HGV Nummer");
    EXPECT_EQ(rec[0].size(), rec[1].size());
}

TEST(Cli, SyntaxErrorIsDataError)
{
    Cli cli;
    cli.register_fixture();
    const auto r = cli({ "query", "SELECT FROM" });
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(r.out.empty());
    EXPECT_NE(r.err.find("offset 7"), std::string::npos) << r.err;
}

TEST(Cli, PlanErrorIsDataError)
{
    Cli cli;
    cli.register_fixture();
    EXPECT_EQ(cli({ "query", "SELECT nope FROM papyri_en" }).code, 2);
    EXPECT_EQ(cli({ "query", "SELECT * FROM nowhere" }).code, 2);
}

TEST(Cli, SourceAndViewListings)
{
    Cli cli;
    cli.register_fixture();
    const auto src = records(cli.ok({ "source", "list" }).out);
    ASSERT_EQ(src.size(), 4u);
    EXPECT_EQ(src[0], (std::vector<std::string>{ "id", "kind", "mode", "sealed", "path" }));
    EXPECT_EQ(src[1][0], "hgv");
    EXPECT_EQ(src[2][1], "xml");
    const auto views = records(cli.ok({ "view", "list" }).out);
    bool saw_category = false;
    for (const auto &v : views) saw_category = saw_category or (v[0] == "papyri_en" and v[1] == "category");
    EXPECT_TRUE(saw_category);
    /* A source a view depends on stays registered. */
    EXPECT_EQ(cli({ "source", "remove", "volterra" }).code, 2);
    cli.ok({ "source", "add", "spare", "--kind", "tabular", "--path", (desk_fixture() / "hgv").string(), "--mode", "live" });
    cli.ok({ "source", "remove", "spare" });
    EXPECT_EQ(cli({ "source", "remove", "spare" }).code, 2);
    EXPECT_EQ(records(cli.ok({ "source", "list" }).out).size(), 4u);
}

TEST(Cli, JsonAndCsvAgree)
{
    Cli cli;
    cli.register_fixture();
    const std::string q = "SELECT hgv_id, category FROM papyri_en WHERE category = 'receipt'";
    const auto csv_rows = records(cli.ok({ "query", q }).out);
    const auto json = cli.ok({ "query", q, "--format", "json" }).out;
    std::size_t lines = std::count(json.begin(), json.end(), '\n');
    EXPECT_EQ(lines + 1, csv_rows.size());
    EXPECT_GT(lines, 0u);
    EXPECT_EQ(json.substr(0, json.find('\n')), "{\"hgv_id\":" + csv_rows[1][0] + ",\"category\":\"receipt\"}");
}

TEST(Cli, NoPushdownIsByteIdentical)
{
    Cli cli;
    cli.register_fixture();
    for (const std::string q : {
             "SELECT * FROM papyri_en WHERE category = 'letter'",
             "SELECT hgv_id, findspot FROM papyri_en WHERE lines > 20 AND findspot = 'Theben'",
             "SELECT v.id, i.id FROM volterra_texts v JOIN iaph_docs i ON v.person = i.person WHERE DATE_NEAR(v.date, i.date, 5)",
             "SELECT id, title FROM iaph_docs WHERE title CONTAINS 'son' LIMIT 7",
             "SELECT * FROM papyri_en",
         }) {
        const auto on = cli({ "query", q }), off = cli({ "query", q, "--no-pushdown" });
        EXPECT_EQ(on.code, 0) << q << on.err;
        EXPECT_EQ(on.out, off.out) << q;
        EXPECT_EQ(on.err, off.err) << q;
        const auto jon = cli({ "query", q, "--format", "json" }), joff = cli({ "query", q, "--format", "json", "--no-pushdown" });
        EXPECT_EQ(jon.out, joff.out) << q;
    }
}

TEST(Cli, ExplainShowsPushdown)
{
    Cli cli;
    cli.register_fixture();
    const std::string q = "SELECT title FROM papyri_en WHERE findspot = 'Theben'";
    const auto on = cli.ok({ "query", q, "--explain" }).out;
    const auto off = cli.ok({ "query", q, "--explain", "--no-pushdown" }).out;
    EXPECT_NE(on.find("pushed"), std::string::npos) << on;
    EXPECT_NE(on.find("Fundort"), std::string::npos) << on;
    EXPECT_NE(on, off);
    EXPECT_NE(off.find("Filter"), std::string::npos) << off;
}

TEST(Cli, WarningsGoToErrorStream)
{
    Cli cli;
    cli.register_fixture();
    const auto r = cli.ok({ "query", "SELECT hgv_id, date FROM papyri_en" });
    EXPECT_NE(r.err.find("warning: "), std::string::npos);
    EXPECT_EQ(r.out.find("warning"), std::string::npos);
    const OverlapManifest m = OverlapManifest::parse(read_file(desk_fixture() / "manifest.csv"));
    const auto lines = std::count(r.err.begin(), r.err.end(), '\n');
    EXPECT_EQ(static_cast<std::size_t>(lines), *m.count("hgv_bad_dates"));
    EXPECT_EQ(records(r.out).size() - 1 + static_cast<std::size_t>(lines), 500u);
}

TEST(Cli, CsvOutputIsARegistrableSource)
{
    Cli cli;
    cli.register_fixture();
    const std::string q = "SELECT hgv_id, title, date, category FROM papyri_en WHERE lines > 10";
    const auto first = cli.ok({ "query", q });
    /* Write the output plus a sidecar derived from the header and register it. */
    TempDir out;
    const auto rec = records(first.out);
    ASSERT_GT(rec.size(), 1u);
    std::string sidecar;
    for (const auto &name : rec[0]) {
        const char *kind = name == "hgv_id" ? "int" : name == "date" ? "date_text" : "text";
        sidecar += name + " : " + kind + "\n";
    }
    write_table(out / "res", "result", sidecar, first.out);
    cli.ok({ "source", "add", "res", "--kind", "tabular", "--path", (out / "res").string(), "--mode", "live" });
    const auto again = cli.ok({ "query", "SELECT hgv_id, title, date, category FROM res.result" });
    EXPECT_EQ(records(again.out).size(), rec.size());
    const auto sorted = [](std::vector<std::vector<std::string>> r) {
        std::sort(r.begin() + 1, r.end());
        return r;
    };
    EXPECT_EQ(sorted(records(again.out)), sorted(rec));
}

TEST(Cli, IngestIndexSearch)
{
    Cli cli;
    cli.register_fixture();
    const fs::path fx = desk_fixture();
    const auto ing = cli.ok({ "ingest", "volterra", "--recipe", (fx / "recipes" / "volterra.recipe").string() });
    const auto docs = records(ing.out);
    EXPECT_EQ(docs[0], (std::vector<std::string>{ "doc_id", "ref", "fields" }));
    EXPECT_EQ(docs.size(), 501u);
    const auto built = cli.ok({ "index", "build", "all", "--recipe", (fx / "recipes" / "hgv.recipe").string(), "--recipe",
                                (fx / "recipes" / "volterra.recipe").string(), "--recipe", (fx / "recipes" / "iaph.recipe").string() });
    EXPECT_EQ(built.out, "indexed 1500 documents into 'all'\n");
    const auto hits = records(cli.ok({ "search", "all", "receipt", "--limit", "5" }).out);
    EXPECT_EQ(hits[0], (std::vector<std::string>{ "doc_id", "ref", "score" }));
    ASSERT_GT(hits.size(), 1u);
    EXPECT_LE(hits.size(), 6u);
    for (std::size_t i = 2; i < hits.size(); ++i) EXPECT_GE(std::stol(hits[i - 1][2]), std::stol(hits[i][2]));
    const auto field = records(cli.ok({ "search", "all", "receipt", "--field", "title" }).out);
    EXPECT_LE(field.size(), records(cli.ok({ "search", "all", "receipt" }).out).size());
    EXPECT_EQ(cli({ "search", "all", "x", "--bbox", "1,2,3" }).code, 1);
    EXPECT_EQ(cli({ "search", "nothing", "x" }).code, 2);
    EXPECT_EQ(cli({ "search", "all", "x", "--limit", "0" }).code, 1);
}

TEST(Cli, IndexOnlyFetchDeniedSearchWorks)
{
    Cli cli;
    cli.register_fixture("index-only");
    const fs::path fx = desk_fixture();
    cli.ok({ "index", "build", "insc", "--recipe", (fx / "recipes" / "iaph.recipe").string() });
    const std::string ref = "iaph/docs/" + first_iaph_id();
    const auto denied = cli({ "fetch", ref });
    EXPECT_EQ(denied.code, 3);
    EXPECT_TRUE(denied.out.empty());
    EXPECT_NE(denied.err.find("AccessDenied"), std::string::npos);
    EXPECT_EQ(cli({ "query", "SELECT * FROM iaph.docs" }).code, 3);
    EXPECT_EQ(cli({ "ingest", "iaph", "--recipe", (fx / "recipes" / "iaph.recipe").string() }).code, 3);
    const auto hits = cli.ok({ "search", "insc", "son" });
    EXPECT_GT(records(hits.out).size(), 1u);
}

TEST(Cli, FetchVaultRecord)
{
    Cli cli;
    cli.register_fixture();
    const std::string ref = "iaph/docs/" + first_iaph_id();
    const auto rec = records(cli.ok({ "fetch", ref }).out);
    ASSERT_EQ(rec.size(), 2u);
    EXPECT_EQ(rec[1][0], first_iaph_id());
    EXPECT_EQ(cli({ "fetch", "iaph/docs/none" }).code, 2);
    EXPECT_EQ(cli({ "fetch", "not-a-ref" }).code, 2);
}

TEST(Cli, CollectionResolveMarksDeniedFields)
{
    Cli cli;
    cli.register_fixture("index-only");
    const fs::path fx = desk_fixture();
    cli.ok({ "config", "--manifest-fields", "title,findspot" });
    cli.ok({ "index", "build", "insc", "--recipe", (fx / "recipes" / "iaph.recipe").string() });
    const std::string iaph_ref = "iaph/docs/" + first_iaph_id();
    const auto hgv_first = records(read_file(fx / "hgv" / "papyri.csv"))[1][0];
    const std::string hgv_ref = "hgv/papyri/" + hgv_first;
    const auto upd = cli.ok({ "coll", "update", "mine", "--add", iaph_ref, "--add", hgv_ref });
    EXPECT_EQ(upd.out, "collection 'mine': 2 added, 2 total\n");
    EXPECT_EQ(cli.ok({ "coll", "update", "mine", "--add", hgv_ref }).out, "collection 'mine': 0 added, 2 total\n");
    const auto res = records(cli.ok({ "coll", "resolve", "mine" }).out);
    ASSERT_EQ(res.size(), 3u);
    std::map<std::string, std::vector<std::string>> by_ref;
    for (std::size_t i = 1; i != res.size(); ++i) by_ref[res[i][0]] = res[i];
    EXPECT_EQ(by_ref[iaph_ref][1], "stub");
    EXPECT_NE(by_ref[iaph_ref][3].find("record=-"), std::string::npos);
    EXPECT_NE(by_ref[iaph_ref][3].find("title="), std::string::npos);
    EXPECT_EQ(by_ref[iaph_ref][3].find("body="), std::string::npos);
    EXPECT_EQ(by_ref[hgv_ref][1], "record");
    EXPECT_NE(by_ref[hgv_ref][3].find("HGV Nummer=" + hgv_first), std::string::npos);
    EXPECT_EQ(cli({ "coll", "resolve", "absent" }).code, 2);
}

TEST(Cli, LockedCatalogueFailsFast)
{
    Cli cli;
    cli.register_fixture();
    auto held = Catalogue::open_locked(cli.catalogue, false);
    const auto r = cli({ "xlate", "add", "other", (desk_fixture() / "translations" / "de_en.csv").string() });
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Locked"), std::string::npos) << r.err;
    /* Readers are not blocked. */
    cli.ok({ "query", "SELECT * FROM papyri LIMIT 1" });
}

TEST(Cli, FixturesGenerateAndVerify)
{
    Cli cli;
    TempDir d;
    const auto gen = cli.ok({ "fixtures", "generate", "--seed", "42", "--scale", "desk", "--out", (d / "fx").string() });
    EXPECT_NE(gen.out.find("12 near homonym pairs"), std::string::npos) << gen.out;
    EXPECT_EQ(read_file(d / "fx" / "manifest.csv"), read_file(desk_fixture() / "manifest.csv"));
    const auto ver = cli.ok({ "fixtures", "verify", (d / "fx").string() });
    EXPECT_TRUE(ver.err.empty());
    EXPECT_EQ(cli({ "fixtures", "generate", "--out", (d / "fx").string() }).code, 1);
    EXPECT_EQ(cli({ "fixtures", "generate", "--scale", "huge", "--out", (d / "other").string() }).code, 1);

    /* Drop one iaph document that a planted pair depends on. */
    const OverlapManifest m = OverlapManifest::parse(read_file(d / "fx" / "manifest.csv"));
    const auto near = m.of_class("homonym_near");
    fs::remove(d / "fx" / "iaph" / (ItemRef::parse(near[0].ref_b).item_id + ".xml"));
    const auto bad = cli({ "fixtures", "verify", (d / "fx").string() });
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("mismatch: "), std::string::npos);
}

TEST(Cli, CatalogueFromEnvironment)
{
    TempDir d;
    const fs::path cat = d / "env.vdc";
    ::setenv("VDC_CATALOGUE", cat.c_str(), 1);
    std::ostringstream out, err;
    const int code = cli::run({ "xlate", "add", "de_en", (desk_fixture() / "translations" / "de_en.csv").string() }, out, err);
    ::unsetenv("VDC_CATALOGUE");
    EXPECT_EQ(code, 0) << err.str();
    EXPECT_TRUE(fs::exists(cat));
    EXPECT_TRUE(Catalogue::open(cat)->snapshot().translation("de_en"));
}

TEST(Cli, HomonymQueryMatchesManifest)
{
    Cli cli;
    cli.register_fixture();
    const auto r = cli.ok({ "query",
                            "SELECT v.id, i.id FROM volterra_texts v JOIN iaph_docs i ON v.person = i.person "
                            "WHERE DATE_NEAR(v.date, i.date, 5)" });
    std::set<std::pair<std::string, std::string>> got;
    const auto rec = records(r.out);
    for (std::size_t i = 1; i != rec.size(); ++i) got.emplace(rec[i][0], rec[i][1]);
    std::set<std::pair<std::string, std::string>> want;
    const OverlapManifest m = OverlapManifest::parse(read_file(desk_fixture() / "manifest.csv"));
    for (const auto &e : m.of_class("homonym_near")) want.emplace(ItemRef::parse(e.ref_a).item_id, ItemRef::parse(e.ref_b).item_id);
    EXPECT_EQ(got, want);
}
