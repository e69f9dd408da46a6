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


#include "vdc/connectors.hpp"

#include "vdc/csv.hpp"
#include "vdc/error.hpp"
#include "vdc/unicode.hpp"
#include "vdc/xml.hpp"
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>


namespace fs = std::filesystem;

namespace vdc {

const char * to_string(SourceKind kind) { return kind == SourceKind::Tabular ? "tabular" : "xml"; }

const char * to_string(AccessMode mode)
{
    switch (mode) {
        case AccessMode::Vault:     return "vault";
        case AccessMode::Live:      return "live";
        case AccessMode::IndexOnly: return "index-only";
    }
    return "?";
}

std::optional<SourceKind> parse_source_kind(std::string_view s)
{
    if (s == "tabular") return SourceKind::Tabular;
    if (s == "xml") return SourceKind::XmlCorpus;
    return std::nullopt;
}

std::optional<AccessMode> parse_access_mode(std::string_view s)
{
    if (s == "vault") return AccessMode::Vault;
    if (s == "live") return AccessMode::Live;
    if (s == "index-only") return AccessMode::IndexOnly;
    return std::nullopt;
}

std::vector<Row> collect(RowStream &stream)
{
    std::vector<Row> rows;
    Row r;
    while (stream.next(r)) rows.push_back(std::move(r));
    return rows;
}

const TableSchema & Source::table(std::string_view name) const
{
    for (const auto &t : tables_)
        if (t.name == name) return t;
    throw SourceError("source '" + id() + "' has no table '" + std::string(name) + "'");
}

bool Source::has_table(std::string_view name) const
{
    return std::any_of(tables_.begin(), tables_.end(), [&](const auto &t) { return t.name == name; });
}

std::optional<Row> Source::fetch(std::string_view table, std::string_view item_id) const
{
    auto stream = scan_table(table);
    Row r;
    while (stream->next(r))
        if (not r.empty() and r[0].to_display() == item_id) return r;
    return std::nullopt;
}

namespace {

std::string read_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (not in) throw SourceError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw SourceError("error reading '" + path.string() + "'");
    return ss.str();
}

std::vector<BoundPredicate> bind_pushed(const TableSchema &schema, std::span<const Predicate> pushed,
                                        bool supports_contains, const std::string &source_id)
{
    std::vector<BoundPredicate> bound;
    for (const auto &p : pushed) {
        const bool supported = std::holds_alternative<ComparePredicate>(p)
                               or (supports_contains and std::holds_alternative<ContainsPredicate>(p));
        if (not supported)
            throw CapabilityError("source '" + source_id + "' cannot evaluate pushed predicate " + to_string(p));
        auto b = BoundPredicate::bind(p, [&](const std::string &c) { return schema.find(c); });
        if (not b)
            throw CapabilityError("pushed predicate " + to_string(p) + " references a column not in table '"
                                  + schema.name + "'");
        bound.push_back(std::move(*b));
    }
    return bound;
}

/** Serves pre-materialized rows, filtered by pushed predicates. */
class VectorStream : public RowStream
{
    std::shared_ptr<const std::vector<Row>> rows_;
    std::vector<BoundPredicate> pushed_;
    std::size_t next_ = 0;

    public:
    VectorStream(std::shared_ptr<const std::vector<Row>> rows, std::vector<BoundPredicate> pushed)
        : rows_(std::move(rows)), pushed_(std::move(pushed))
    { }

    bool next(Row &out) override {
        while (next_ < rows_->size()) {
            const Row &r = (*rows_)[next_++];
            if (eval_all(pushed_, r)) { out = r; return true; }
        }
        return false;
    }
};


/*----- Tabular --------------------------------------------------------------------------------------------------------*/

bool needs_quoting(std::string_view name)
{
    if (name.empty()) return true;
    if (name.front() == '#') return true;
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        if (u >= 0x80 or u <= 0x20 or c == '"' or c == ':') return true;
    }
    return false;
}

std::vector<std::string> read_csv_header(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (not in) throw SourceError("cannot read '" + path.string() + "'");
    csv::Reader reader(in);
    try {
        auto header = reader.next();
        if (not header) throw SourceError(path.string() + ": missing header row");
        for (auto &h : *header) h = unicode::nfc(h);
        return *header;
    } catch (const ParseError &e) {
        throw SourceError(path.string() + ": " + e.what());
    }
}

class TabularStream : public RowStream
{
    fs::path path_;
    const TableSchema &schema_;
    std::ifstream in_;
    csv::Reader reader_;
    std::vector<BoundPredicate> pushed_;

    [[noreturn]] void fail(const std::string &what) {
        throw SourceError(path_.string() + ":" + std::to_string(reader_.record_line()) + ": " + what);
    }

    public:
    TabularStream(fs::path path, const TableSchema &schema, std::vector<BoundPredicate> pushed)
        : path_(std::move(path)), schema_(schema), in_(path_, std::ios::binary), reader_(in_), pushed_(std::move(pushed))
    {
        if (not in_) throw SourceError("cannot read '" + path_.string() + "'");
        try {
            auto header = reader_.next();
            if (not header) throw SourceError(path_.string() + ": missing header row");
            if (header->size() != schema_.arity()) fail("header does not match sidecar");
            for (std::size_t i = 0; i != header->size(); ++i)
                if (unicode::nfc((*header)[i]) != schema_.columns[i].name)
                    fail("header column '" + (*header)[i] + "' does not match sidecar column '"
                         + schema_.columns[i].name + "'");
        } catch (const ParseError &e) {
            throw SourceError(path_.string() + ": " + e.what());
        }
    }

    bool next(Row &out) override {
        for (;;) {
            std::optional<std::vector<std::string>> record;
            try {
                record = reader_.next();
            } catch (const ParseError &e) {
                throw SourceError(path_.string() + ": " + e.what());
            }
            if (not record) {
                if (in_.bad()) throw SourceError("error reading '" + path_.string() + "'");
                return false;
            }
            if (record->size() != schema_.arity())
                fail("expected " + std::to_string(schema_.arity()) + " fields, found " + std::to_string(record->size()));

            out.clear();
            out.reserve(record->size());
            for (std::size_t i = 0; i != record->size(); ++i) {
                const std::string &cell = (*record)[i];
                if (schema_.columns[i].kind == ColumnKind::Int) {
                    if (cell.empty()) { out.push_back(Value::null()); continue; }
                    std::int64_t v = 0;
                    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                    if (ec != std::errc() or p != cell.data() + cell.size())
                        fail("column '" + schema_.columns[i].name + "': '" + cell + "' is not an integer");
                    out.push_back(Value::integer(v));
                } else {
                    if (not unicode::is_valid_utf8(cell)) fail("invalid UTF-8 in column '" + schema_.columns[i].name + "'");
                    out.push_back(Value::text(cell));
                }
            }
            if (eval_all(pushed_, out)) return true;
        }
    }
};

class TabularSource : public Source
{
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::shared_ptr<const std::vector<Row>>> cache_;

    public:
    explicit TabularSource(SourceDescriptor desc) : Source(std::move(desc)) {
        std::set<std::string> csvs, sidecars;
        for (const auto &entry : fs::directory_iterator(desc_.path)) {
            if (not entry.is_regular_file()) continue;
            const auto ext = entry.path().extension();
            if (ext == ".csv") csvs.insert(entry.path().stem().string());
            else if (ext == ".schema") sidecars.insert(entry.path().stem().string());
        }
        for (const auto &name : csvs)
            if (not sidecars.count(name))
                throw SourceError((desc_.path / (name + ".csv")).string() + ": missing schema sidecar '" + name + ".schema'");
        for (const auto &name : sidecars)
            if (not csvs.count(name))
                throw SourceError((desc_.path / (name + ".schema")).string() + ": sidecar without data file '" + name + ".csv'");
        if (csvs.empty()) throw SourceError("'" + desc_.path.string() + "' contains no tabular data (expected <table>.csv)");

        for (const auto &name : csvs) {
            const fs::path sidecar = desc_.path / (name + ".schema");
            TableSchema schema;
            try {
                schema = parse_sidecar(name, read_file(sidecar));
            } catch (const ParseError &e) {
                throw SourceError(sidecar.string() + ": " + e.what());
            }
            const auto header = read_csv_header(desc_.path / (name + ".csv"));
            bool match = header.size() == schema.arity();
            for (std::size_t i = 0; match and i != header.size(); ++i)
                match = header[i] == schema.columns[i].name;
            if (not match)
                throw SourceError((desc_.path / (name + ".csv")).string() + ":1: header does not match sidecar");
            tables_.push_back(std::move(schema));
        }
    }

    bool supports_contains() const override { return true; }

    std::unique_ptr<RowStream> scan_table(std::string_view table, std::span<const Predicate> pushed) const override {
        const TableSchema &schema = this->table(table);
        auto bound = bind_pushed(schema, pushed, supports_contains(), id());
        const fs::path path = desc_.path / (schema.name + ".csv");
        if (desc_.mode == AccessMode::Vault) {
            std::lock_guard lock(cache_mutex_);
            auto &cached = cache_[schema.name];
            if (not cached) {
                TabularStream all(path, schema, {});
                cached = std::make_shared<const std::vector<Row>>(collect(all));
            }
            return std::make_unique<VectorStream>(cached, std::move(bound));
        }
        if (not fs::exists(path)) throw SourceError("source '" + id() + "': '" + path.string() + "' no longer exists");
        return std::make_unique<TabularStream>(path, schema, std::move(bound));
    }

    std::size_t estimate_rows(std::string_view table) const override {
        const fs::path path = desc_.path / (this->table(table).name + ".csv");
        std::ifstream in(path, std::ios::binary);
        if (not in) throw SourceError("source '" + id() + "': '" + path.string() + "' no longer exists");
        std::size_t lines = 0;
        char buf[1 << 16];
        while (in.read(buf, sizeof buf) or in.gcount() > 0) {
            lines += static_cast<std::size_t>(std::count(buf, buf + in.gcount(), '\n'));
            if (not in) break;
        }
        return lines > 0 ? lines - 1 : 0;
    }
};


/*----- XML corpus -----------------------------------------------------------------------------------------------------*/

class XmlCorpusSource : public Source
{
    mutable std::mutex cache_mutex_;
    mutable std::shared_ptr<const std::vector<Row>> cache_;

    std::vector<fs::path> list_documents() const {
        if (not fs::is_directory(desc_.path))
            throw SourceError("source '" + id() + "': '" + desc_.path.string() + "' no longer exists");
        std::vector<fs::path> files;
        for (const auto &entry : fs::directory_iterator(desc_.path))
            if (entry.is_regular_file() and entry.path().extension() == ".xml") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        return files;
    }

    std::shared_ptr<const std::vector<Row>> load() const {
        auto rows = std::make_shared<std::vector<Row>>();
        std::set<std::string> ids;
        for (const auto &file : list_documents()) {
            CorpusDoc doc;
            try {
                doc = parse_xml_doc(read_file(file));
            } catch (const ParseError &e) {
                throw SourceError(file.string() + ": " + e.what());
            }
            if (not ids.insert(doc.id).second)
                throw SourceError(file.string() + ": duplicate document id '" + doc.id + "'");
            rows->push_back(corpus_doc_row(doc));
        }
        return rows;
    }

    std::shared_ptr<const std::vector<Row>> rows() const {
        /* A vault snapshot never changes; everything else is re-read so that reads pass through to the original. */
        if (desc_.mode != AccessMode::Vault) return load();
        std::lock_guard lock(cache_mutex_);
        if (not cache_) cache_ = load();
        return cache_;
    }

    public:
    explicit XmlCorpusSource(SourceDescriptor desc) : Source(std::move(desc)) {
        bool any_xml = false, any_tabular = false;
        for (const auto &entry : fs::directory_iterator(desc_.path)) {
            if (not entry.is_regular_file()) continue;
            const auto ext = entry.path().extension();
            any_xml |= ext == ".xml";
            any_tabular |= ext == ".csv" or ext == ".schema";
        }
        if (any_tabular and not any_xml)
            throw SourceError("'" + desc_.path.string() + "' looks like a tabular source, not an XML corpus");
        tables_.push_back(corpus_docs_schema());
        if (desc_.mode == AccessMode::Vault) cache_ = load();
        else load(); // validate eagerly
    }

    bool supports_contains() const override { return false; }

    std::unique_ptr<RowStream> scan_table(std::string_view table, std::span<const Predicate> pushed) const override {
        const TableSchema &schema = this->table(table);
        auto bound = bind_pushed(schema, pushed, supports_contains(), id());
        return std::make_unique<VectorStream>(rows(), std::move(bound));
    }

    std::size_t estimate_rows(std::string_view table) const override {
        this->table(table);
        {
            std::lock_guard lock(cache_mutex_);
            if (cache_) return cache_->size();
        }
        return list_documents().size();
    }
};

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e and (s[b] == ' ' or s[b] == '\t' or s[b] == '\r')) ++b;
    while (e > b and (s[e - 1] == ' ' or s[e - 1] == '\t' or s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

}

std::shared_ptr<const Source> open_source(const SourceDescriptor &desc)
{
    std::error_code ec;
    if (not fs::exists(desc.path, ec))
        throw SourceError("source '" + desc.source_id + "': path '" + desc.path.string() + "' does not exist");
    if (not fs::is_directory(desc.path, ec))
        throw SourceError("source '" + desc.source_id + "': path '" + desc.path.string() + "' is not a directory");
    try {
        if (desc.kind == SourceKind::Tabular) return std::make_shared<TabularSource>(desc);
        return std::make_shared<XmlCorpusSource>(desc);
    } catch (const fs::filesystem_error &e) {
        throw SourceError("source '" + desc.source_id + "': " + e.what());
    }
}


/*----- Sidecars -------------------------------------------------------------------------------------------------------*/

TableSchema parse_sidecar(std::string_view table_name, std::string_view text)
{
    TableSchema schema;
    schema.name = std::string(table_name);
    std::size_t line_no = 0;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        auto nl = text.find('\n', line_start);
        if (nl == std::string_view::npos) nl = text.size();
        ++line_no;
        const std::string line = trim(text.substr(line_start, nl - line_start));
        const std::size_t base = line_start;
        line_start = nl + 1;
        if (line.empty() or line.front() == '#') continue;

        std::string name;
        std::size_t p = 0;
        if (line.front() == '"') {
            p = 1;
            for (;;) {
                if (p >= line.size()) throw ParseError("unterminated quoted column name", base + p, line_no);
                if (line[p] == '"') {
                    if (p + 1 < line.size() and line[p + 1] == '"') { name.push_back('"'); p += 2; continue; }
                    ++p;
                    break;
                }
                name.push_back(line[p++]);
            }
        } else {
            while (p < line.size() and line[p] != ':' and line[p] != ' ' and line[p] != '\t') {
                if (static_cast<unsigned char>(line[p]) >= 0x80 or line[p] == '"')
                    throw ParseError("column names with non-ASCII characters or quotes must be quoted", base + p, line_no);
                name.push_back(line[p++]);
            }
        }
        if (name.empty()) throw ParseError("empty column name", base, line_no);
        while (p < line.size() and (line[p] == ' ' or line[p] == '\t')) ++p;
        if (p >= line.size() or line[p] != ':') throw ParseError("expected ':' after column name", base + p, line_no);
        ++p;
        const std::string kind = trim(std::string_view(line).substr(p));

        ColumnDescriptor col;
        if (not unicode::is_valid_utf8(name)) throw ParseError("column name is not valid UTF-8", base, line_no);
        col.name = unicode::nfc(name);
        if (kind == "int") col.kind = ColumnKind::Int;
        else if (kind == "text") col.kind = ColumnKind::Text;
        else if (kind == "date_text") { col.kind = ColumnKind::Text; col.date_text = true; }
        else throw ParseError("unknown column kind '" + kind + "'", base + p, line_no);
        if (schema.find(col.name)) throw ParseError("duplicate column '" + col.name + "'", base, line_no);
        schema.columns.push_back(std::move(col));
    }
    if (schema.columns.empty()) throw ParseError("sidecar declares no columns", 0, 1);
    return schema;
}

std::string format_sidecar(const TableSchema &schema)
{
    std::string out;
    for (const auto &c : schema.columns) {
        if (needs_quoting(c.name)) {
            out.push_back('"');
            for (char ch : c.name) {
                if (ch == '"') out.push_back('"');
                out.push_back(ch);
            }
            out.push_back('"');
        } else {
            out += c.name;
        }
        out += " : ";
        if (c.kind == ColumnKind::Int) out += "int";
        else if (c.kind == ColumnKind::Date or c.date_text) out += "date_text";
        else out += "text";
        out.push_back('\n');
    }
    return out;
}


/*----- Corpus documents -----------------------------------------------------------------------------------------------*/

const std::string * CorpusDoc::field(std::string_view name) const
{
    for (const auto &[k, v] : meta)
        if (k == name) return &v;
    return nullptr;
}

const TableSchema & corpus_docs_schema()
{
    static const TableSchema schema{ "docs", {
        { "id", ColumnKind::Text, false },
        { "title", ColumnKind::Text, false },
        { "findspot", ColumnKind::Text, false },
        { "not_before", ColumnKind::Text, true },
        { "not_after", ColumnKind::Text, true },
        { "category", ColumnKind::Text, false },
        { "persons", ColumnKind::Text, false },
        { "body", ColumnKind::Text, false },
    } };
    return schema;
}

Row corpus_doc_row(const CorpusDoc &doc)
{
    Row row;
    row.reserve(8);
    row.push_back(Value::text(doc.id));
    for (const char *name : { "title", "findspot", "not_before", "not_after", "category", "persons" }) {
        const std::string *v = doc.field(name);
        row.push_back(v ? Value::text(*v) : Value::null());
    }
    row.push_back(Value::text(doc.body));
    return row;
}

CorpusDoc parse_xml_doc(std::string_view bytes)
{
    const auto root = xml::parse(bytes);
    if (root->name != "doc") throw ParseError("root element must be <doc>, found <" + root->name + ">", root->offset);
    const std::string *id = root->attribute("id");
    if (not id or id->empty()) throw ParseError("<doc> is missing its id attribute", root->offset);

    CorpusDoc doc;
    doc.id = unicode::nfc(*id);

    std::optional<std::string> title, findspot, not_before, not_after, category;
    std::vector<std::string> persons;
    bool seen_meta = false, seen_text = false, seen_date = false;

    auto set_once = [](std::optional<std::string> &slot, std::string value, const xml::Element &e) {
        if (slot) throw ParseError("duplicate <" + e.name + "> element", e.offset);
        slot = std::move(value);
    };

    for (const auto &child : root->children) {
        if (auto *s = std::get_if<std::string>(&child)) {
            if (not xml::collapse_whitespace(*s).empty())
                throw ParseError("unexpected character data directly inside <doc>", root->offset);
            continue;
        }
        const xml::Element &e = *std::get<std::unique_ptr<xml::Element>>(child);
        if (e.name == "meta") {
            if (seen_meta) throw ParseError("duplicate <meta> element", e.offset);
            seen_meta = true;
            for (const auto &m : e.children) {
                if (auto *s = std::get_if<std::string>(&m)) {
                    if (not xml::collapse_whitespace(*s).empty())
                        throw ParseError("unexpected character data directly inside <meta>", e.offset);
                    continue;
                }
                const xml::Element &f = *std::get<std::unique_ptr<xml::Element>>(m);
                if (f.name == "title") set_once(title, xml::collapse_whitespace(f.text_content()), f);
                else if (f.name == "findspot") set_once(findspot, xml::collapse_whitespace(f.text_content()), f);
                else if (f.name == "category") set_once(category, xml::collapse_whitespace(f.text_content()), f);
                else if (f.name == "persName") persons.push_back(xml::collapse_whitespace(f.text_content()));
                else if (f.name == "date") {
                    if (seen_date) throw ParseError("duplicate <date> element", f.offset);
                    seen_date = true;
                    for (const auto &[key, value] : f.attributes) {
                        std::optional<std::string> *slot = nullptr;
                        if (key == "notBefore") slot = &not_before;
                        else if (key == "notAfter") slot = &not_after;
                        else throw ParseError("unknown <date> attribute '" + key + "'", f.offset);
                        try {
                            parse_uncertain_date(value);
                        } catch (const ParseError &pe) {
                            throw ParseError("<date " + key + "=\"" + value + "\">: " + pe.what(), f.offset);
                        }
                        *slot = value;
                    }
                } else {
                    throw ParseError("unknown element <" + f.name + "> inside <meta>", f.offset);
                }
            }
        } else if (e.name == "text") {
            if (seen_text) throw ParseError("duplicate <text> element", e.offset);
            seen_text = true;
            doc.body = xml::collapse_whitespace(e.text_content());
        } else {
            throw ParseError("unknown element <" + e.name + "> inside <doc>", e.offset);
        }
    }

    auto put = [&](const char *name, const std::optional<std::string> &v) {
        if (v) doc.meta.emplace_back(name, unicode::nfc(*v));
    };
    put("title", title);
    put("findspot", findspot);
    put("not_before", not_before);
    put("not_after", not_after);
    put("category", category);
    if (not persons.empty()) {
        std::string joined;
        for (std::size_t i = 0; i != persons.size(); ++i) {
            if (i) joined.push_back('|');
            joined += persons[i];
        }
        doc.meta.emplace_back("persons", unicode::nfc(joined));
    }
    doc.body = unicode::nfc(doc.body);
    return doc;
}

}
