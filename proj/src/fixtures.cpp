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


#include "vdc/fixtures.hpp"

#include "vdc/csv.hpp"
#include "vdc/datacentre.hpp"
#include "vdc/error.hpp"
#include "vdc/mediation.hpp"
#include "vdc/textindex.hpp"
#include "vdc/unicode.hpp"
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>


namespace vdc {

namespace fs = std::filesystem;

namespace {

/*----- Pseudorandom source ------------------------------------------------------------------------------------------*/

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/** `std::mt19937_64` with portable range reduction (the standard distributions are implementation defined). */
class Rng
{
    std::mt19937_64 eng_;

    public:
    Rng(std::uint64_t seed, std::uint64_t stream) : eng_(splitmix64(seed ^ splitmix64(stream))) { }

    /** Uniform in [0, n). */
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t x;
        do x = eng_(); while (x < threshold);
        return x % n;
    }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool percent(int p) { return below(100) < static_cast<std::uint64_t>(p); }

    std::string_view pick(std::span<const std::string_view> pool) { return pool[below(pool.size())]; }
};

enum Stream : std::uint64_t { kHgv = 1, kVolterra = 2, kIaph = 3, kPlant = 4 };


/*----- Vocabulary ---------------------------------------------------------------------------------------------------*/

constexpr std::string_view kEditions[] = { "P.Oxy.", "P.Tebt.", "BGU", "P.Lond.", "SB", "P.Mich.", "P.Ryl.",
                                           "P.Giss.", "P.Fay.", "P.Cair.Zen.", "O.Berl.", "P.Köln" };
constexpr std::string_view kHgvPlaces[] = { "Oxyrhynchos", "Arsinoites", "Hermupolis", "Alexandria", "Theben",
                                            "Karanis", "Tebtynis", "Philadelphia", "Soknopaiu Nesos",
                                            "Herakleopolis", "Memphis", "Ephesos" };
constexpr std::string_view kHgvCategories[] = { "Brief", "Quittung", "Vertrag", "Erlass", "Ehrung", "Liste",
                                                "Ostrakon" };
constexpr std::string_view kGermanWords[] = {
    "Quittung", "über", "Weizen", "Gerste", "Steuer", "Pacht", "Darlehen", "Brief", "an", "den", "Strategen",
    "Zahlung", "Öl", "Wein", "Land", "Haus", "Verkauf", "Sklavin", "Esel", "Kamel", "Dorf", "Beschwerde",
    "Eingabe", "Grüße", "Familie", "Sohn", "Tochter", "Mutter", "Vater", "Schiff", "Getreide", "Lieferung",
    "Bürgschaft", "Artaben", "Drachmen", "Ehrung", "Erlass", "Präfekten", "Kaiser", "Vertrag", "Liste", "Namen" };
constexpr std::string_view kUnparseableGerman[] = { "unbekannt", "3. Jh. v. Chr.", "Regierung des Augustus",
                                                    "spätrömisch", "ptolemäisch?" };

constexpr std::string_view kLatinActs[] = { "Lex", "Edictum", "Epistula", "Decretum", "Titulus", "Contractus",
                                            "Rescriptum", "Senatus consultum" };
constexpr std::string_view kLatinTopics[] = { "de aquis", "de finibus", "de mercatu", "de collegiis",
                                              "de sepulcris", "de tributis", "de agris", "de viis", "de thermis",
                                              "de frumento" };
constexpr std::string_view kVolterraPlaces[] = { "Volaterrae", "Roma", "Pisae", "Luna", "Alexandria", "Ephesos",
                                                 "Arretium", "Populonia", "Aphrodisias" };
constexpr std::string_view kVolterraCategories[] = { "letter", "decree", "contract", "edict", "dedication",
                                                     "receipt", "epitaph", "honour" };
constexpr std::string_view kStatuses[] = { "complete", "fragmentary", "restored" };
constexpr std::string_view kSourceTypes[] = { "inscription", "papyrus", "tablet", "codex" };
constexpr std::string_view kEnglishWords[] = {
    "receipt", "letter", "grain", "tax", "council", "people", "honours", "boundary", "water", "citizens",
    "emperor", "governor", "temple", "statue", "gift", "payment", "land", "lease", "wine", "oil", "ship",
    "harbour", "market", "gymnasium", "priest", "festival", "contract", "decree", "benefactor", "city", "wall",
    "aqueduct", "tomb", "family", "son", "daughter", "freedman", "soldier", "veteran", "magistrate" };
constexpr std::string_view kUnparseableLatin[] = { "s. d.", "saec. II", "incerta", "aetate Augusti" };

constexpr std::string_view kIaphPlaces[] = { "Aphrodisias", "Aphrodisias", "Aphrodisias", "Alexandria", "Ephesos",
                                            "Roma", "Smyrna", "Miletos", "Oxyrhynchos" };
constexpr std::string_view kIaphCategories[] = { "honour", "epitaph", "decree", "dedication", "letter", "building",
                                                 "acclamation" };
constexpr std::string_view kGreekNames[] = { "Zenon", "Attalos", "Diogenes", "Hermias", "Menandros", "Apollonios",
                                             "Artemidoros", "Kallikrates", "Adrastos", "Hypsikles", "Papias",
                                             "Peritas", "Kallias", "Dionysios", "Eumachos", "Hierokles" };

/* Two-word names (Volterra), three-word names (planted homonyms); the first words never overlap. */
constexpr std::string_view kPraenominaA[] = { "Gaius", "Lucius", "Publius", "Quintus", "Titus", "Gnaeus", "Aulus",
                                              "Sextus", "Decimus", "Servius" };
constexpr std::string_view kNominaA[] = { "Plautius", "Caecina", "Persius", "Volumnius", "Laelius", "Vettius",
                                          "Helvius", "Salvius", "Cilnius", "Larcius", "Venuleius", "Rufius" };
constexpr std::string_view kPraenominaC[] = { "Marcus", "Tiberius", "Manius", "Appius", "Numerius", "Spurius" };
constexpr std::string_view kNominaC[] = { "Aurelius", "Flavius", "Iulius", "Claudius", "Ulpius", "Aelius",
                                          "Septimius", "Valerius" };
constexpr std::string_view kCognominaC[] = { "Sabinianus", "Maximus", "Rufus", "Severus", "Priscus", "Celer",
                                             "Felix", "Crispus", "Longinus", "Paulinus" };

constexpr std::pair<std::string_view, std::string_view> kDeEn[] = {
    { "Brief", "letter" }, { "Quittung", "receipt" }, { "Vertrag", "contract" },
    { "Erlass", "decree" }, { "Ehrung", "honour" },   { "Liste", "list" },
};


/*----- Text helpers ----------------------------------------------------------------------------------------------*/

std::string pad(std::int64_t v, int width)
{
    std::string s = std::to_string(v < 0 ? -v : v);
    if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
    return v < 0 ? "-" + s : s;
}

std::string year_text(std::int64_t y) { return pad(y, 4); }

std::string day_text(std::int64_t y, int m, int d) { return year_text(y) + "-" + pad(m, 2) + "-" + pad(d, 2); }

std::string words(Rng &rng, std::span<const std::string_view> pool, int lo, int hi)
{
    std::string out;
    const auto n = rng.range(lo, hi);
    for (std::int64_t i = 0; i != n; ++i) {
        if (i) out.push_back(' ');
        out += rng.pick(pool);
    }
    return out;
}

std::string fixed4(double v)
{
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
    return std::string(buf, p);
}

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string read_text(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (not in) throw SourceError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path &p, std::string_view bytes)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (not out.flush()) throw SourceError("cannot write '" + p.string() + "'");
}


/*----- Dates ---------------------------------------------------------------------------------------------------------*/

enum class DateShape { Day, Month, Year, Circa, HalfCentury, Century, MonthSpan, Unparseable, Empty };

/** A date text of the given shape whose earliest year is near `y`. */
std::string date_of_shape(Rng &rng, DateShape shape, std::int64_t y, std::span<const std::string_view> unparseable)
{
    const int m = static_cast<int>(rng.range(1, 12));
    switch (shape) {
        case DateShape::Day: return day_text(y, m, static_cast<int>(rng.range(1, days_in_month(y, m))));
        case DateShape::Month: return year_text(y) + "-" + pad(m, 2);
        case DateShape::Year: return year_text(y);
        case DateShape::Circa: return "ca. " + year_text(y);
        case DateShape::HalfCentury: {
            const std::int64_t start = (y - 1 >= 0 ? (y - 1) / 50 : (y - 50) / 50) * 50 + 1;
            return year_text(start) + "/" + year_text(start + 49);
        }
        case DateShape::Century: {
            const std::int64_t start = (y - 1 >= 0 ? (y - 1) / 100 : (y - 100) / 100) * 100 + 1;
            return year_text(start) + "/" + year_text(start + 99);
        }
        case DateShape::MonthSpan: {
            const int m2 = static_cast<int>(rng.range(m, 12));
            return year_text(y) + "-" + pad(m, 2) + "/" + year_text(y) + "-" + pad(m2, 2);
        }
        case DateShape::Unparseable: return std::string(rng.pick(unparseable));
        case DateShape::Empty: return {};
    }
    return {};
}

DateShape random_shape(Rng &rng, int unparseable_pct, int empty_pct)
{
    const auto r = static_cast<int>(rng.below(100));
    if (r < unparseable_pct) return DateShape::Unparseable;
    if (r < unparseable_pct + empty_pct) return DateShape::Empty;
    static constexpr DateShape kShapes[] = { DateShape::Day, DateShape::Day, DateShape::Day, DateShape::Month,
                                             DateShape::Month, DateShape::Year, DateShape::Year, DateShape::Year,
                                             DateShape::Circa, DateShape::HalfCentury, DateShape::Century,
                                             DateShape::MonthSpan };
    return kShapes[rng.below(std::size(kShapes))];
}

/** Parseable shapes only. */
DateShape planted_shape(Rng &rng)
{
    static constexpr DateShape kShapes[] = { DateShape::Day, DateShape::Month, DateShape::Year, DateShape::Year,
                                             DateShape::Circa, DateShape::MonthSpan };
    return kShapes[rng.below(std::size(kShapes))];
}


/*----- Schemas and definitions ---------------------------------------------------------------------------------------*/

const TableSchema & hgv_schema()
{
    static const TableSchema s{ "papyri", {
        { "HGV Nummer", ColumnKind::Int, false },
        { "Titel", ColumnKind::Text, false },
        { "Fundort", ColumnKind::Text, false },
        { "Datierung", ColumnKind::Text, true },
        { "Kategorie", ColumnKind::Text, false },
        { "Zeilen", ColumnKind::Int, false },
        { "Breite", ColumnKind::Text, false },
        { "Länge", ColumnKind::Text, false },
        { "Inhaltsübersicht", ColumnKind::Text, false },
    } };
    return s;
}

const TableSchema & volterra_schema()
{
    static const TableSchema s{ "legal_texts", {
        { "id", ColumnKind::Text, false },
        { "title", ColumnKind::Text, false },
        { "person", ColumnKind::Text, false },
        { "category", ColumnKind::Text, false },
        { "findspot", ColumnKind::Text, false },
        { "date", ColumnKind::Text, true },
        { "status", ColumnKind::Text, false },
        { "source_type", ColumnKind::Text, false },
        { "lines", ColumnKind::Int, false },
        { "summary", ColumnKind::Text, false },
    } };
    return s;
}

std::vector<ViewDefinition> fixture_views()
{
    ViewDefinition papyri{ "papyri_en", { { "hgv", "papyri" } }, {} };
    for (auto [from, to] : { std::pair<const char*, const char*>{ "HGV Nummer", "hgv_id" }, { "Titel", "title" },
                             { "Fundort", "findspot" }, { "Datierung", "date" }, { "Kategorie", "category" },
                             { "Zeilen", "lines" }, { "Breite", "lat" }, { "Länge", "lon" },
                             { "Inhaltsübersicht", "summary" } })
        papyri.rules.emplace_back(RenameRule{ from, to });
    papyri.rules.emplace_back(CoerceRule{ "date" });
    papyri.rules.emplace_back(TranslateRule{ "category", "de_en" });

    ViewDefinition volterra{ "volterra_texts", { { "volterra", "legal_texts" } }, { CoerceRule{ "date" } } };
    ViewDefinition iaph{ "iaph_docs", { { "iaph", "docs" } },
                         { RenameRule{ "persons", "person" }, RenameRule{ "not_before", "date" }, CoerceRule{ "date" } } };
    return { papyri, volterra, iaph };
}

std::vector<IngestRecipe> fixture_recipes()
{
    IngestRecipe hgv;
    hgv.name = "hgv";
    hgv.from = { "hgv", "papyri" };
    hgv.id_column = "HGV Nummer";
    hgv.fields = { { "title", "Titel" }, { "findspot", "Fundort" }, { "category", "Kategorie" } };
    hgv.body_columns = { "Titel", "Inhaltsübersicht" };
    hgv.geo = { { "Breite", "Länge" } };
    hgv.index = { "body", "title" };

    IngestRecipe volterra;
    volterra.name = "volterra";
    volterra.from = { "volterra", "legal_texts" };
    volterra.id_column = "id";
    volterra.fields = { { "title", "title" }, { "person", "person" }, { "category", "category" } };
    volterra.body_columns = { "title", "summary" };
    volterra.index = { "body", "person" };

    IngestRecipe iaph;
    iaph.name = "iaph";
    iaph.from = { "iaph", "docs" };
    iaph.id_column = "id";
    iaph.fields = { { "title", "title" }, { "findspot", "findspot" }, { "category", "category" },
                    { "persons", "persons" } };
    iaph.body_columns = { "body" };
    iaph.index = { "body" };
    return { hgv, volterra, iaph };
}


/*----- Tallies shared by generation and verification -----------------------------------------------------------------*/

struct Tally
{
    std::map<std::string, std::map<std::string, std::size_t>> findspots;  ///< place -> source -> count
    std::map<std::string, std::map<std::string, std::size_t>> categories;
    std::map<std::string, std::size_t> counts;

    void add(std::map<std::string, std::map<std::string, std::size_t>> &m, const std::string &key, const char *source) {
        if (not key.empty()) ++m[key][source];
    }

    void emit(std::vector<ManifestEntry> &out) const {
        auto shared = [&](const char *cls, const auto &m) {
            for (const auto &[key, per_source] : m) {
                if (per_source.size() < 2) continue;
                std::string value;
                for (const auto &[source, n] : per_source) {
                    if (not value.empty()) value.push_back(';');
                    value += source + "=" + std::to_string(n);
                }
                out.push_back({ cls, key, "", "", value });
            }
        };
        shared("shared_findspot", findspots);
        shared("shared_category", categories);
        for (const auto &[key, n] : counts) out.push_back({ "count", key, "", "", std::to_string(n) });
    }
};

std::int64_t gap_years(DayNumber gap) { return (gap + kDaysPerYearForProximity - 1) / kDaysPerYearForProximity; }

constexpr DayNumber kNearDays = 5 * kDaysPerYearForProximity;

bool geo_cell_valid(std::string_view s, double bound, bool &present)
{
    while (not s.empty() and (s.front() == ' ' or s.front() == '\t')) s.remove_prefix(1);
    while (not s.empty() and (s.back() == ' ' or s.back() == '\t')) s.remove_suffix(1);
    present = not s.empty();
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return not s.empty() and ec == std::errc() and p == s.data() + s.size() and std::isfinite(v) and v >= -bound
           and v <= bound;
}


/*----- Generation -----------------------------------------------------------------------------------------------------*/

struct Generated
{
    std::vector<std::vector<std::string>> hgv;
    std::vector<std::vector<std::string>> volterra;
    struct IaphDoc
    {
        std::string id, title, findspot, category, not_before, not_after, body;
        std::vector<std::string> persons;
    };
    std::vector<IaphDoc> iaph;
    std::vector<ManifestEntry> entries;
};

void generate_hgv(Rng &rng, std::size_t n, Generated &g, Tally &t, const TranslationTable &de_en)
{
    std::int64_t id = 10000;
    std::size_t bad_dates = 0, undated = 0, bad_geo = 0;
    for (std::size_t i = 0; i != n; ++i) {
        id += rng.range(1, 4);
        std::string title = std::string(rng.pick(kEditions)) + " " + std::to_string(rng.range(1, 60)) + " "
                            + std::to_string(rng.range(1, 4000));
        std::string place = rng.percent(3) ? std::string() : std::string(rng.pick(kHgvPlaces));

        const DateShape shape = random_shape(rng, 4, 3);
        std::string date = date_of_shape(rng, shape, rng.range(-300, 700), kUnparseableGerman);
        if (date.empty()) ++undated;
        else if (shape == DateShape::Unparseable) ++bad_dates;

        std::string category;
        if (not rng.percent(2)) {
            category = rng.pick(kHgvCategories);
            const auto casing = rng.below(20);
            if (casing == 0) for (auto &c : category) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            else if (casing == 1) for (auto &c : category) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }

        std::string lines = rng.percent(5) ? std::string() : std::to_string(rng.range(3, 80));
        std::string lat, lon;
        const auto g_roll = rng.below(100);
        if (g_roll < 85) {
            lat = fixed4(24.0 + static_cast<double>(rng.below(76001)) / 10000.0);
            lon = fixed4(29.5 + static_cast<double>(rng.below(35001)) / 10000.0);
        } else if (g_roll < 88) {
            ++bad_geo;
            if (rng.percent(50)) {
                lat = fixed4(90.5 + static_cast<double>(rng.below(50000)) / 10000.0);
                lon = fixed4(30.0);
            } else {
                lat = fixed4(29.0);
                lon = "n. a.";
            }
        }
        std::string summary = words(rng, kGermanWords, 3, 9);

        t.add(t.findspots, place, "hgv");
        t.add(t.categories, category.empty() ? category : translate_term(de_en, category), "hgv");
        g.hgv.push_back({ std::to_string(id), std::move(title), std::move(place), std::move(date),
                          std::move(category), std::move(lines), std::move(lat), std::move(lon), std::move(summary) });
    }
    t.counts["hgv_rows"] = n;
    t.counts["hgv_bad_dates"] = bad_dates;
    t.counts["hgv_undated"] = undated;
    t.counts["hgv_bad_geo"] = bad_geo;
}

std::string name_a(Rng &rng) { return std::string(rng.pick(kPraenominaA)) + " " + std::string(rng.pick(kNominaA)); }

std::string name_b(Rng &rng)
{
    return std::string(rng.pick(kGreekNames)) + " son of " + std::string(rng.pick(kGreekNames));
}

void generate_volterra(Rng &rng, std::size_t n, Generated &g)
{
    for (std::size_t i = 0; i != n; ++i) {
        const DateShape shape = random_shape(rng, 4, 3);
        std::string date = date_of_shape(rng, shape, rng.range(1, 400), kUnparseableLatin);
        g.volterra.push_back({
            "VOL-" + pad(static_cast<std::int64_t>(i + 1), 5),
            std::string(rng.pick(kLatinActs)) + " " + std::string(rng.pick(kLatinTopics)),
            rng.percent(5) ? std::string() : name_a(rng),
            rng.percent(2) ? std::string() : std::string(rng.pick(kVolterraCategories)),
            std::string(rng.pick(kVolterraPlaces)),
            std::move(date),
            std::string(rng.pick(kStatuses)),
            std::string(rng.pick(kSourceTypes)),
            std::to_string(rng.range(1, 40)),
            words(rng, kEnglishWords, 4, 10),
        });
    }
}

void generate_iaph(Rng &rng, std::size_t n, Generated &g)
{
    for (std::size_t i = 0; i != n; ++i) {
        Generated::IaphDoc d;
        d.id = "iAph" + pad(static_cast<std::int64_t>(10001 + i), 6);
        const auto persons = rng.range(0, 2);
        for (std::int64_t k = 0; k != persons; ++k) d.persons.push_back(name_b(rng));
        d.category = rng.pick(kIaphCategories);
        d.findspot = rng.pick(kIaphPlaces);
        d.title = d.persons.empty() ? "Fragment of " + std::string(rng.pick(kEnglishWords))
                                    : "Inscription for " + d.persons[0];
        const auto date_roll = rng.below(10);
        if (date_roll != 0) {
            const std::int64_t y = rng.range(1, 600);
            d.not_before = rng.percent(20) ? year_text(y) + "-" + pad(rng.range(1, 12), 2) : year_text(y);
            if (date_roll != 1) d.not_after = year_text(y + rng.range(0, 50));
        }
        d.body = words(rng, kEnglishWords, 6, 20);
        for (const auto &p : d.persons) d.body += " " + p;
        g.iaph.push_back(std::move(d));
    }
}

std::vector<std::size_t> distinct_positions(Rng &rng, std::size_t n, std::size_t k)
{
    std::set<std::size_t> chosen;
    while (chosen.size() < k) chosen.insert(static_cast<std::size_t>(rng.below(n)));
    std::vector<std::size_t> out(chosen.begin(), chosen.end());
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
    return out;
}

void plant_homonyms(Rng &rng, const FixtureSizes &sizes, Generated &g)
{
    const std::size_t total = sizes.homonyms_near + sizes.homonyms_far;
    const auto vrows = distinct_positions(rng, g.volterra.size(), total);
    const auto idocs = distinct_positions(rng, g.iaph.size(), total);
    std::set<std::string> used;
    for (std::size_t k = 0; k != total; ++k) {
        const bool near = k < sizes.homonyms_near;
        std::string name;
        do {
            name = std::string(rng.pick(kPraenominaC)) + " " + std::string(rng.pick(kNominaC)) + " "
                   + std::string(rng.pick(kCognominaC));
        } while (not used.insert(name).second);

        auto &vrow = g.volterra[vrows[k]];
        auto &doc = g.iaph[idocs[k]];
        const std::int64_t vy = rng.range(20, 380);
        vrow[2] = name;
        vrow[5] = date_of_shape(rng, planted_shape(rng), vy, kUnparseableLatin);
        const UncertainDate vdate = parse_uncertain_date(vrow[5]);

        std::string nb;
        DayNumber gap = 0;
        std::int64_t y = 0;
        for (;;) {
            const std::int64_t offset = near ? rng.range(-4, 4) : (rng.percent(50) ? 1 : -1) * rng.range(8, 80);
            y = std::max<std::int64_t>(1, vy + offset);
            nb = rng.percent(30) ? day_text(y, 6, 15) : year_text(y);
            gap = date_gap_days(vdate, parse_uncertain_date(nb));
            if (near ? gap <= kNearDays : gap > kNearDays) break;
        }
        doc.persons = { name };
        doc.title = "Inscription for " + name;
        doc.not_before = nb;
        doc.not_after = year_text(y + rng.range(0, 20));
        g.entries.push_back({ near ? "homonym_near" : "homonym_far", name, "volterra/legal_texts/" + vrow[0],
                              "iaph/docs/" + doc.id, std::to_string(gap_years(gap)) });
    }
}

std::string iaph_xml(const Generated::IaphDoc &d)
{
    std::string x = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<doc id=\"" + xml_escape(d.id) + "\">\n  <meta>\n";
    x += "    <title>" + xml_escape(d.title) + "</title>\n";
    x += "    <findspot>" + xml_escape(d.findspot) + "</findspot>\n";
    if (not d.not_before.empty()) {
        x += "    <date notBefore=\"" + xml_escape(d.not_before) + "\"";
        if (not d.not_after.empty()) x += " notAfter=\"" + xml_escape(d.not_after) + "\"";
        x += "/>\n";
    }
    x += "    <category>" + xml_escape(d.category) + "</category>\n";
    for (const auto &p : d.persons) x += "    <persName>" + xml_escape(p) + "</persName>\n";
    x += "  </meta>\n  <text>" + xml_escape(d.body) + "</text>\n</doc>\n";
    return x;
}

std::string table_csv(const TableSchema &schema, const std::vector<std::vector<std::string>> &rows)
{
    std::vector<std::string> header;
    for (const auto &c : schema.columns) header.push_back(c.name);
    std::string out = csv::format_record(header);
    for (const auto &r : rows) out += csv::format_record(r);
    return out;
}

TranslationTable de_en_table()
{
    std::vector<std::pair<std::string, std::string>> entries;
    for (auto [a, b] : kDeEn) entries.emplace_back(a, b);
    return TranslationTable("de_en", std::move(entries));
}


/*----- Verification ---------------------------------------------------------------------------------------------------*/

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(std::string_view name) const {
        for (std::size_t i = 0; i != header.size(); ++i)
            if (header[i] == name) return i;
        throw SourceError("column '" + std::string(name) + "' missing");
    }
};

CsvTable read_csv_table(const fs::path &p)
{
    auto records = csv::parse(read_text(p));
    if (records.empty()) throw SourceError(p.string() + ": empty file");
    CsvTable t;
    for (auto &h : records[0]) t.header.push_back(unicode::nfc(h));
    for (std::size_t i = 1; i != records.size(); ++i) {
        if (records[i].size() != t.header.size()) throw SourceError(p.string() + ": ragged record");
        for (auto &cell : records[i]) cell = unicode::nfc(cell);
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

std::vector<ManifestEntry> derive_manifest(const fs::path &dir)
{
    const CsvTable hgv = read_csv_table(dir / "hgv" / "papyri.csv");
    const CsvTable vol = read_csv_table(dir / "volterra" / "legal_texts.csv");
    const TranslationTable de_en = load_translation_table("de_en", dir / "translations" / "de_en.csv");
    std::vector<fs::path> xml_files;
    for (const auto &e : fs::directory_iterator(dir / "iaph"))
        if (e.is_regular_file() and e.path().extension() == ".xml") xml_files.push_back(e.path());
    std::sort(xml_files.begin(), xml_files.end());
    std::vector<CorpusDoc> docs;
    for (const auto &f : xml_files) docs.push_back(parse_xml_doc(read_text(f)));

    std::vector<ManifestEntry> out;
    Tally t;

    /* Nested-loop homonym scan. */
    std::size_t near = 0, far = 0;
    const std::size_t v_id = vol.col("id"), v_person = vol.col("person"), v_date = vol.col("date");
    for (const auto &row : vol.rows) {
        if (row[v_person].empty()) continue;
        const auto vd = try_parse_uncertain_date(row[v_date]);
        for (const auto &doc : docs) {
            const std::string *persons = doc.field("persons");
            if (not persons) continue;
            bool match = false;
            std::string_view rest = *persons;
            while (true) {
                const auto bar = rest.find('|');
                if (rest.substr(0, bar) == row[v_person]) match = true;
                if (bar == std::string_view::npos) break;
                rest.remove_prefix(bar + 1);
            }
            if (not match) continue;
            const std::string *nb = doc.field("not_before");
            const auto id_ = nb ? try_parse_uncertain_date(*nb) : std::nullopt;
            ManifestEntry e{ "", row[v_person], "volterra/legal_texts/" + row[v_id], "iaph/docs/" + doc.id, "-" };
            if (not vd or not id_) {
                e.cls = "homonym_undated";
            } else {
                const DayNumber gap = date_gap_days(*vd, *id_);
                e.cls = gap <= kNearDays ? "homonym_near" : "homonym_far";
                e.value = std::to_string(gap_years(gap));
                ++(gap <= kNearDays ? near : far);
            }
            out.push_back(std::move(e));
        }
    }

    std::size_t bad_dates = 0, undated = 0, bad_geo = 0;
    const std::size_t h_place = hgv.col("Fundort"), h_cat = hgv.col("Kategorie"), h_date = hgv.col("Datierung"),
                      h_lat = hgv.col("Breite"), h_lon = hgv.col("Länge");
    for (const auto &row : hgv.rows) {
        t.add(t.findspots, row[h_place], "hgv");
        t.add(t.categories, row[h_cat].empty() ? row[h_cat] : translate_term(de_en, row[h_cat]), "hgv");
        if (row[h_date].find_first_not_of(" \t\r\n") == std::string::npos) ++undated;
        else if (not try_parse_uncertain_date(row[h_date])) ++bad_dates;
        bool lat_present = false, lon_present = false;
        const bool lat_ok = geo_cell_valid(row[h_lat], 90, lat_present);
        const bool lon_ok = geo_cell_valid(row[h_lon], 180, lon_present);
        if ((lat_present or lon_present) and not (lat_ok and lon_ok)) ++bad_geo;
    }
    const std::size_t v_place = vol.col("findspot"), v_cat = vol.col("category");
    for (const auto &row : vol.rows) {
        t.add(t.findspots, row[v_place], "volterra");
        t.add(t.categories, row[v_cat], "volterra");
    }
    for (const auto &doc : docs) {
        if (const std::string *f = doc.field("findspot")) t.add(t.findspots, *f, "iaph");
        if (const std::string *c = doc.field("category")) t.add(t.categories, *c, "iaph");
    }
    t.counts["hgv_rows"] = hgv.rows.size();
    t.counts["hgv_bad_dates"] = bad_dates;
    t.counts["hgv_undated"] = undated;
    t.counts["hgv_bad_geo"] = bad_geo;
    t.counts["volterra_rows"] = vol.rows.size();
    t.counts["iaph_docs"] = docs.size();
    t.counts["homonym_near"] = near;
    t.counts["homonym_far"] = far;
    t.emit(out);
    std::sort(out.begin(), out.end());
    return out;
}

std::string describe(const ManifestEntry &e)
{
    std::string s = e.cls + " " + e.key;
    if (not e.ref_a.empty()) s += " " + e.ref_a;
    if (not e.ref_b.empty()) s += " " + e.ref_b;
    return s + " = " + e.value;
}

}

std::optional<FixtureScale> parse_fixture_scale(std::string_view s)
{
    if (s == "desk") return FixtureScale::Desk;
    if (s == "paper") return FixtureScale::Paper;
    return std::nullopt;
}

FixtureSizes fixture_sizes(FixtureScale scale)
{
    if (scale == FixtureScale::Paper) return { 55000, 5000, 1500, 40, 20 };
    return { 500, 500, 500, 12, 6 };
}

std::vector<ManifestEntry> OverlapManifest::of_class(std::string_view cls) const
{
    std::vector<ManifestEntry> out;
    for (const auto &e : entries)
        if (e.cls == cls) out.push_back(e);
    return out;
}

std::optional<std::size_t> OverlapManifest::count(std::string_view key) const
{
    for (const auto &e : entries)
        if (e.cls == "count" and e.key == key) return static_cast<std::size_t>(std::stoull(e.value));
    return std::nullopt;
}

std::string OverlapManifest::to_csv() const
{
    std::string out = csv::format_record({ "class", "key", "ref_a", "ref_b", "value" });
    for (const auto &e : entries) out += csv::format_record({ e.cls, e.key, e.ref_a, e.ref_b, e.value });
    return out;
}

OverlapManifest OverlapManifest::parse(std::string_view csv_text)
{
    auto records = csv::parse(csv_text);
    if (records.empty() or records[0] != std::vector<std::string>{ "class", "key", "ref_a", "ref_b", "value" })
        throw LoadError("manifest: expected header 'class,key,ref_a,ref_b,value'");
    OverlapManifest m;
    for (std::size_t i = 1; i != records.size(); ++i) {
        auto &r = records[i];
        if (r.size() != 5) throw LoadError("manifest record " + std::to_string(i + 1) + ": expected 5 fields");
        m.entries.push_back({ unicode::nfc(r[0]), unicode::nfc(r[1]), unicode::nfc(r[2]), unicode::nfc(r[3]),
                              unicode::nfc(r[4]) });
    }
    std::sort(m.entries.begin(), m.entries.end());
    return m;
}

OverlapManifest generate_fixtures(const FixtureSpec &params)
{
    if (params.out.empty()) throw UsageError("fixtures: no output directory");
    if (fs::exists(params.out)) {
        if (not fs::is_directory(params.out)) throw UsageError("fixtures: '" + params.out.string() + "' is not a directory");
        if (not fs::is_empty(params.out)) throw UsageError("fixtures: output directory '" + params.out.string() + "' is not empty");
    }
    const FixtureSizes sizes = fixture_sizes(params.scale);
    const TranslationTable de_en = de_en_table();

    Generated g;
    Tally t;
    {
        Rng rng(params.seed, kHgv);
        generate_hgv(rng, sizes.hgv, g, t, de_en);
    }
    {
        Rng rng(params.seed, kVolterra);
        generate_volterra(rng, sizes.volterra, g);
    }
    {
        Rng rng(params.seed, kIaph);
        generate_iaph(rng, sizes.iaph, g);
    }
    {
        Rng rng(params.seed, kPlant);
        plant_homonyms(rng, sizes, g);
    }
    for (const auto &row : g.volterra) {
        t.add(t.findspots, row[4], "volterra");
        t.add(t.categories, row[3], "volterra");
    }
    for (const auto &d : g.iaph) {
        t.add(t.findspots, d.findspot, "iaph");
        t.add(t.categories, d.category, "iaph");
    }
    t.counts["volterra_rows"] = sizes.volterra;
    t.counts["iaph_docs"] = sizes.iaph;
    t.counts["homonym_near"] = sizes.homonyms_near;
    t.counts["homonym_far"] = sizes.homonyms_far;

    OverlapManifest manifest;
    manifest.entries = std::move(g.entries);
    t.emit(manifest.entries);
    std::sort(manifest.entries.begin(), manifest.entries.end());

    for (const char *d : { "hgv", "volterra", "iaph", "translations", "views", "recipes" })
        fs::create_directories(params.out / d);
    write_text(params.out / "hgv" / "papyri.schema", format_sidecar(hgv_schema()));
    write_text(params.out / "hgv" / "papyri.csv", table_csv(hgv_schema(), g.hgv));
    write_text(params.out / "volterra" / "legal_texts.schema", format_sidecar(volterra_schema()));
    write_text(params.out / "volterra" / "legal_texts.csv", table_csv(volterra_schema(), g.volterra));
    for (const auto &d : g.iaph) write_text(params.out / "iaph" / (d.id + ".xml"), iaph_xml(d));
    {
        std::string x = csv::format_record({ "source_term", "target_term" });
        for (auto [a, b] : kDeEn) x += csv::format_record({ std::string(a), std::string(b) });
        write_text(params.out / "translations" / "de_en.csv", x);
    }
    for (const auto &v : fixture_views()) write_text(params.out / "views" / (v.name + ".view"), format_view_file(v));
    for (const auto &r : fixture_recipes())
        write_text(params.out / "recipes" / (r.name + ".recipe"), format_recipe(r));
    write_text(params.out / "manifest.csv", manifest.to_csv());

    const VerifyReport report = verify_manifest(params.out);
    if (not report.ok)
        throw std::logic_error("fixture self-check failed: " + (report.problems.empty() ? report.summary : report.problems[0]));
    return manifest;
}

VerifyReport verify_manifest(const fs::path &dir)
{
    VerifyReport report;
    if (not fs::is_directory(dir) or not fs::is_regular_file(dir / "manifest.csv")) {
        report.summary = "no fixture";
        report.problems.push_back("no fixture at '" + dir.string() + "'");
        return report;
    }
    std::vector<ManifestEntry> recorded, derived;
    try {
        recorded = OverlapManifest::parse(read_text(dir / "manifest.csv")).entries;
        derived = derive_manifest(dir);
    } catch (const std::exception &e) {
        report.summary = "unreadable fixture";
        report.problems.push_back(e.what());
        return report;
    }
    std::vector<ManifestEntry> missing, unexpected;
    std::set_difference(recorded.begin(), recorded.end(), derived.begin(), derived.end(), std::back_inserter(missing));
    std::set_difference(derived.begin(), derived.end(), recorded.begin(), recorded.end(), std::back_inserter(unexpected));
    for (const auto &e : missing) report.problems.push_back("manifest entry not found in files: " + describe(e));
    for (const auto &e : unexpected) report.problems.push_back("files contain unrecorded entry: " + describe(e));
    report.ok = report.problems.empty();
    report.summary = report.ok ? "ok: " + std::to_string(recorded.size()) + " manifest entries match"
                               : std::to_string(report.problems.size()) + " mismatches";
    return report;
}

void register_fixtures(Catalogue &catalogue, const fs::path &dir, AccessMode mode)
{
    catalogue.register_source({ "hgv", SourceKind::Tabular, dir / "hgv", mode });
    catalogue.register_source({ "volterra", SourceKind::Tabular, dir / "volterra", mode });
    catalogue.register_source({ "iaph", SourceKind::XmlCorpus, dir / "iaph", mode });
    catalogue.add_translation("de_en", dir / "translations" / "de_en.csv");
    if (mode == AccessMode::IndexOnly) return;
    for (const char *v : { "papyri_en", "volterra_texts", "iaph_docs" })
        catalogue.define_view(dir / "views" / (std::string(v) + ".view"));
}

}
