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
#include "vdc/csv.hpp"
#include "vdc/error.hpp"
#include <gtest/gtest.h>
#include <map>
#include <regex>


using namespace vdc;
using namespace vdc::test;

namespace {

std::map<std::string, std::string> tree_bytes(const fs::path &root)
{
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    return out;
}

std::vector<std::vector<std::string>> csv_records(const fs::path &p) { return csv::parse(read_file(p)); }

std::size_t column(const std::vector<std::string> &header, const std::string &name)
{
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

}

TEST(Fixtures, Sizes)
{
    EXPECT_EQ(fixture_sizes(FixtureScale::Desk).hgv, 500u);
    EXPECT_EQ(fixture_sizes(FixtureScale::Paper).hgv, 55000u);
    EXPECT_EQ(parse_fixture_scale("paper"), FixtureScale::Paper);
    EXPECT_FALSE(parse_fixture_scale("huge"));
    const OverlapManifest m = OverlapManifest::parse(read_file(desk_fixture() / "manifest.csv"));
    EXPECT_EQ(m.count("hgv_rows"), 500u);
    EXPECT_EQ(m.count("volterra_rows"), 500u);
    EXPECT_EQ(m.count("iaph_docs"), 500u);
    EXPECT_EQ(m.of_class("homonym_near").size(), fixture_sizes(FixtureScale::Desk).homonyms_near);
    EXPECT_EQ(m.of_class("homonym_far").size(), fixture_sizes(FixtureScale::Desk).homonyms_far);
    EXPECT_EQ(csv_records(desk_fixture() / "hgv" / "papyri.csv").size(), 501u);
}

TEST(Fixtures, SameSeedIsByteIdentical)
{
    TempDir d;
    generate_fixtures({ 42, FixtureScale::Desk, d / "again" });
    EXPECT_EQ(tree_bytes(d / "again"), tree_bytes(desk_fixture()));
}

TEST(Fixtures, DifferentSeedDiffers)
{
    TempDir d;
    generate_fixtures({ 43, FixtureScale::Desk, d / "other" });
    const auto a = tree_bytes(desk_fixture()), b = tree_bytes(d / "other");
    EXPECT_NE(a.at("hgv/papyri.csv"), b.at("hgv/papyri.csv"));
    EXPECT_NE(a.at("manifest.csv"), b.at("manifest.csv"));
    /* Static parts of the tree are seed independent. */
    EXPECT_EQ(a.at("translations/de_en.csv"), b.at("translations/de_en.csv"));
    EXPECT_EQ(a.at("views/papyri_en.view"), b.at("views/papyri_en.view"));
}

TEST(Fixtures, VerifyPassesForManySeeds)
{
    for (std::uint64_t seed : std::initializer_list<std::uint64_t>{ 1, 2, 3, 7, 42, 99, 1000, 31337, 123456789, 18446744073709551615ull }) {
        TempDir d;
        generate_fixtures({ seed, FixtureScale::Desk, d / "fx" });
        const auto r = verify_manifest(d / "fx");
        EXPECT_TRUE(r.ok) << seed << ": " << r.summary;
        EXPECT_TRUE(r.problems.empty());
    }
}

TEST(Fixtures, VerifyDetectsCorruptedDate)
{
    TempDir d;
    generate_fixtures({ 42, FixtureScale::Desk, d / "fx" });
    const OverlapManifest m = OverlapManifest::parse(read_file(d / "fx" / "manifest.csv"));
    const auto near = m.of_class("homonym_near");
    ASSERT_FALSE(near.empty());
    /* Push the iaph date of one planted near pair far away. */
    const std::string doc_id = near[0].ref_b.substr(near[0].ref_b.rfind('/') + 1);
    const fs::path file = d / "fx" / "iaph" / (doc_id + ".xml");
    std::string xml = read_file(file);
    xml = std::regex_replace(xml, std::regex("notBefore=\"[^\"]*\""), "notBefore=\"1900\"");
    xml = std::regex_replace(xml, std::regex("notAfter=\"[^\"]*\""), "notAfter=\"1901\"");
    write_file(file, xml);
    const auto r = verify_manifest(d / "fx");
    EXPECT_FALSE(r.ok);
    ASSERT_FALSE(r.problems.empty());
    bool mentions = false;
    for (const auto &p : r.problems) mentions = mentions or p.find(near[0].key) != std::string::npos;
    EXPECT_TRUE(mentions) << r.summary;
}

TEST(Fixtures, VerifyEmptyDirectory)
{
    TempDir d;
    fs::create_directories(d / "empty");
    const auto r = verify_manifest(d / "empty");
    EXPECT_FALSE(r.ok);
    EXPECT_NE(r.summary.find("no fixture"), std::string::npos) << r.summary;
    EXPECT_FALSE(verify_manifest(d / "missing").ok);
}

TEST(Fixtures, NonEmptyOutputIsUsageError)
{
    TempDir d;
    write_file(d / "busy" / "file.txt", "x");
    EXPECT_THROW(generate_fixtures({ 1, FixtureScale::Desk, d / "busy" }), UsageError);
    EXPECT_EQ(read_file(d / "busy" / "file.txt"), "x");
}

TEST(Fixtures, SidecarsParseAndHaveGermanColumns)
{
    const fs::path fx = desk_fixture();
    const auto hgv = parse_sidecar("papyri", read_file(fx / "hgv" / "papyri.schema"));
    for (const char *c : { "HGV Nummer", "Titel", "Fundort", "Datierung", "Kategorie", "Länge" }) EXPECT_TRUE(hgv.find(c)) << c;
    EXPECT_TRUE(hgv.columns[*hgv.find("Datierung")].date_text);
    const auto vol = parse_sidecar("legal_texts", read_file(fx / "volterra" / "legal_texts.schema"));
    for (const char *c : { "id", "person", "category", "date" }) EXPECT_TRUE(vol.find(c)) << c;
    EXPECT_TRUE(vol.columns[*vol.find("date")].date_text);
}

TEST(Fixtures, HgvDatesCoverEveryShape)
{
    const auto records = csv_records(desk_fixture() / "hgv" / "papyri.csv");
    const std::size_t col = column(records[0], "Datierung");
    std::map<std::string, std::size_t> shapes;
    for (std::size_t i = 1; i != records.size(); ++i) {
        const std::string &t = records[i][col];
        const auto d = try_parse_uncertain_date(t);
        std::string shape;
        if (t.empty()) shape = "empty";
        else if (not d) shape = "unparseable";
        else if (t.starts_with("ca. ")) shape = "circa";
        else if (d->width_days() == 0) shape = "day";
        else if (t.find('/') == std::string::npos and t.find('-', 1) != std::string::npos) shape = "month";
        else if (t.find('/') == std::string::npos) shape = "year";
        else if (std::regex_match(t, std::regex(R"((\d+)/(\d+))"))) {
            const long a = std::stol(t.substr(0, t.find('/'))), b = std::stol(t.substr(t.find('/') + 1));
            shape = b - a == 49 ? "span50" : b - a == 99 ? "span100" : "span";
        } else shape = "other-span";
        ++shapes[shape];
    }
    for (const char *s : { "empty", "unparseable", "circa", "day", "month", "year", "span50", "span100" }) EXPECT_GT(shapes[s], 0u) << s;
    const OverlapManifest m = OverlapManifest::parse(read_file(desk_fixture() / "manifest.csv"));
    EXPECT_EQ(shapes["unparseable"], m.count("hgv_bad_dates"));
    EXPECT_EQ(shapes["empty"], m.count("hgv_undated"));
}

TEST(Fixtures, HomonymGapsMatchFiles)
{
    const fs::path fx = desk_fixture();
    const auto vol = csv_records(fx / "volterra" / "legal_texts.csv");
    const std::size_t id_col = column(vol[0], "id"), date_col = column(vol[0], "date"), person_col = column(vol[0], "person");
    const OverlapManifest m = OverlapManifest::parse(read_file(fx / "manifest.csv"));
    for (const char *cls : { "homonym_near", "homonym_far" }) {
        for (const auto &e : m.of_class(cls)) {
            const std::string vid = ItemRef::parse(e.ref_a).item_id, iid = ItemRef::parse(e.ref_b).item_id;
            const auto row = std::find_if(vol.begin() + 1, vol.end(), [&](const auto &r) { return r[id_col] == vid; });
            ASSERT_NE(row, vol.end()) << vid;
            EXPECT_EQ((*row)[person_col], e.key);
            const CorpusDoc doc = parse_xml_doc(read_file(fx / "iaph" / (iid + ".xml")));
            EXPECT_NE(doc.field("persons")->find(e.key), std::string::npos);
            const auto gap = date_gap_days(parse_uncertain_date((*row)[date_col]), parse_uncertain_date(*doc.field("not_before")));
            EXPECT_EQ(std::to_string((gap + 364) / 365), e.value) << e.key;
            if (std::string(cls) == "homonym_near") EXPECT_LE(gap, 5 * 365);
            else EXPECT_GT(gap, 5 * 365);
        }
    }
}

TEST(Fixtures, SharedTalliesMatchTranslatedCounts)
{
    const fs::path fx = desk_fixture();
    const auto hgv = csv_records(fx / "hgv" / "papyri.csv");
    const auto table = load_translation_table("de_en", fx / "translations" / "de_en.csv");
    const std::size_t kat = column(hgv[0], "Kategorie");
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 1; i != hgv.size(); ++i)
        if (not hgv[i][kat].empty()) ++counts[translate_term(table, hgv[i][kat])];
    const OverlapManifest m = OverlapManifest::parse(read_file(fx / "manifest.csv"));
    const auto shared = m.of_class("shared_category");
    ASSERT_FALSE(shared.empty());
    for (const auto &e : shared) {
        const auto pos = e.value.find("hgv=");
        if (pos == std::string::npos) continue;
        EXPECT_EQ(std::stoul(e.value.substr(pos + 4)), counts[e.key]) << e.key;
    }
}

TEST(Fixtures, ManifestCsvRoundTrip)
{
    const std::string text = read_file(desk_fixture() / "manifest.csv");
    EXPECT_EQ(OverlapManifest::parse(text).to_csv(), text);
    EXPECT_THROW(OverlapManifest::parse("wrong,header\n"), Error);
}

TEST(Fixtures, RegisterAllModes)
{
    for (AccessMode mode : { AccessMode::Vault, AccessMode::Live, AccessMode::IndexOnly }) {
        FixtureCatalogue fc(mode);
        const auto snap = fc.snapshot();
        EXPECT_EQ(snap.source_ids(), (std::vector<std::string>{ "hgv", "iaph", "volterra" }));
        EXPECT_TRUE(snap.translation("de_en"));
        EXPECT_EQ(snap.view_names().size(), mode == AccessMode::IndexOnly ? 0u : 3u);
    }
}
