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


#include "vdc/mediation.hpp"

#include "vdc/csv.hpp"
#include "vdc/unicode.hpp"
#include "line_grammar.hpp"
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>


namespace vdc {

/*----- Translation tables -------------------------------------------------------------------------------------------*/

TranslationTable::TranslationTable(std::string id, std::vector<std::pair<std::string, std::string>> entries)
    : id_(std::move(id)), entries_(std::move(entries))
{
    for (std::size_t i = 0; i != entries_.size(); ++i) {
        auto &[source, target] = entries_[i];
        source = unicode::nfc(source);
        target = unicode::nfc(target);
        auto [it, inserted] = by_folded_source_.emplace(unicode::fold(source), i);
        if (not inserted)
            throw LoadError("translation table '" + id_ + "': duplicate source term '" + source + "' (first: '"
                            + entries_[it->second].first + "')");
    }
}

std::optional<std::string> TranslationTable::lookup(std::string_view term) const
{
    auto it = by_folded_source_.find(unicode::fold(term));
    if (it == by_folded_source_.end()) return std::nullopt;
    return entries_[it->second].second;
}

std::string translate_term(const TranslationTable &table, std::string_view term)
{
    if (auto mapped = table.lookup(term)) return *mapped;
    return std::string(term);
}

TranslationTable parse_translation_table(std::string id, std::string_view csv_text)
{
    std::vector<std::vector<std::string>> records;
    try {
        records = csv::parse(csv_text);
    } catch (const ParseError &e) {
        throw LoadError("translation table '" + id + "': " + e.what());
    }
    if (records.empty() or records[0] != std::vector<std::string>{ "source_term", "target_term" })
        throw LoadError("translation table '" + id + "': expected header 'source_term,target_term'");
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 1; i != records.size(); ++i) {
        if (records[i].size() != 2)
            throw LoadError("translation table '" + id + "': record " + std::to_string(i + 1) + " has "
                            + std::to_string(records[i].size()) + " fields, expected 2");
        if (not unicode::is_valid_utf8(records[i][0]) or not unicode::is_valid_utf8(records[i][1]))
            throw LoadError("translation table '" + id + "': record " + std::to_string(i + 1) + " is not valid UTF-8");
        entries.emplace_back(records[i][0], records[i][1]);
    }
    return TranslationTable(std::move(id), std::move(entries));
}

TranslationTable load_translation_table(std::string id, const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (not in) throw LoadError("cannot read translation table '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_translation_table(std::move(id), ss.str());
}


/*----- View grammar -------------------------------------------------------------------------------------------------*/

namespace {

using namespace detail;

}

ViewDefinition parse_view_file(std::string_view text)
{
    if (not unicode::is_valid_utf8(text)) throw ParseError("view file is not valid UTF-8", 0, 1);
    const auto lines = significant_lines(text);
    const std::size_t last_line = std::count(text.begin(), text.end(), '\n') + 1;
    if (lines.empty()) throw ParseError("expected 'view <name>'", text.size(), last_line);

    ViewDefinition v;
    std::size_t i = 0;
    {
        LineLexer lex(lines[0].text, lines[0].offset, lines[0].number);
        lex.literal("view");
        v.name = lex.identifier("view name");
        lex.finish();
        ++i;
    }
    bool ended = false;
    for (; i < lines.size(); ++i) {
        const Line &l = lines[i];
        LineLexer lex(l.text, l.offset, l.number);
        const std::string kw = keyword_of(l.text);
        if (ended) throw ParseError("content after 'end'", l.offset, l.number);
        if (kw == "from") {
            if (not v.base.empty()) throw ParseError("only one 'from' line is allowed; use 'union' for further relations", l.offset, l.number);
            lex.literal("from");
            v.base.push_back(lex.relation());
            lex.finish();
        } else if (kw == "union") {
            if (v.base.empty()) throw ParseError("'union' before 'from'", l.offset, l.number);
            if (not v.rules.empty()) throw ParseError("'union' must precede mapping rules", l.offset, l.number);
            lex.literal("union");
            v.base.push_back(lex.relation());
            lex.finish();
        } else if (kw == "rename") {
            if (v.base.empty()) throw ParseError("mapping rule before 'from'", l.offset, l.number);
            lex.literal("rename");
            RenameRule r;
            r.from = lex.quoted_or_identifier("original column name");
            lex.literal("->");
            r.to = lex.identifier("target column identifier");
            lex.finish();
            v.rules.emplace_back(std::move(r));
        } else if (kw == "coerce") {
            if (v.base.empty()) throw ParseError("mapping rule before 'from'", l.offset, l.number);
            lex.literal("coerce");
            CoerceRule r{ lex.identifier("column identifier") };
            lex.literal("date");
            lex.finish();
            v.rules.emplace_back(std::move(r));
        } else if (kw == "translate") {
            if (v.base.empty()) throw ParseError("mapping rule before 'from'", l.offset, l.number);
            lex.literal("translate");
            TranslateRule r;
            r.column = lex.identifier("column identifier");
            lex.literal("using");
            r.table = lex.identifier("translation table identifier");
            lex.finish();
            v.rules.emplace_back(std::move(r));
        } else if (kw == "end") {
            if (v.base.empty()) throw ParseError("view has no 'from' line", l.offset, l.number);
            lex.literal("end");
            lex.finish();
            ended = true;
        } else if (kw == "view") {
            throw ParseError("nested 'view' (missing 'end'?)", l.offset, l.number);
        } else {
            throw ParseError("unknown rule keyword '" + (kw.empty() ? std::string(l.text.substr(0, 1)) : kw) + "'",
                             l.offset, l.number);
        }
    }
    if (not ended) throw ParseError("missing 'end'", text.size(), last_line);
    return v;
}

std::string format_view_file(const ViewDefinition &v)
{
    std::string out = "view " + v.name + "\n";
    for (std::size_t i = 0; i != v.base.size(); ++i)
        out += (i == 0 ? "from " : "union ") + v.base[i].to_string() + "\n";
    for (const auto &rule : v.rules) {
        if (auto *r = std::get_if<RenameRule>(&rule)) out += "rename " + quote_name(r->from) + " -> " + r->to + "\n";
        else if (auto *c = std::get_if<CoerceRule>(&rule)) out += "coerce " + c->column + " date\n";
        else {
            const auto &t = std::get<TranslateRule>(rule);
            out += "translate " + t.column + " using " + t.table + "\n";
        }
    }
    out += "end\n";
    return out;
}


/*----- Resolution ---------------------------------------------------------------------------------------------------*/

ResolvedView resolve_view(const ViewDefinition &v, const MediationContext &ctx)
{
    auto fail = [&](const std::string &what) -> PlanError { return PlanError("view '" + v.name + "': " + what); };

    if (v.base.empty()) throw fail("no base relation");

    ResolvedView out;
    out.definition = v;
    out.strict_translate = ctx.strict_translate;
    for (const auto &rel : v.base) {
        try {
            out.base_schemas.push_back(ctx.table_schema(rel));
        } catch (const Error &e) {
            throw fail("unknown base relation '" + rel.to_string() + "' (" + e.what() + ")");
        }
    }

    /* Renames, per base.  A rename must match a column in at least one base. */
    std::vector<TableSchema> renamed = out.base_schemas;
    std::set<std::string> rename_sources;
    for (const auto &rule : v.rules) {
        const auto *r = std::get_if<RenameRule>(&rule);
        if (not r) continue;
        if (not rename_sources.insert(r->from).second) throw fail("column \"" + r->from + "\" renamed twice");
        bool matched = false;
        for (std::size_t b = 0; b != renamed.size(); ++b) {
            auto pos = out.base_schemas[b].find(r->from);
            if (not pos) continue;
            matched = true;
            renamed[b].columns[*pos].name = r->to;
        }
        if (not matched) throw fail("rename of nonexistent column \"" + r->from + "\"");
    }
    for (std::size_t b = 0; b != renamed.size(); ++b) {
        std::set<std::string> names;
        for (const auto &c : renamed[b].columns)
            if (not names.insert(c.name).second)
                throw fail("column '" + c.name + "' appears twice in '" + v.base[b].to_string() + "' after renaming");
    }

    /* Union compatibility, compared after renaming. */
    for (std::size_t b = 1; b < renamed.size(); ++b) {
        const auto &p = renamed[0].columns, &q = renamed[b].columns;
        if (p.size() != q.size())
            throw fail("union arity mismatch: '" + v.base[0].to_string() + "' has " + std::to_string(p.size())
                       + " columns, '" + v.base[b].to_string() + "' has " + std::to_string(q.size()));
        for (std::size_t c = 0; c != p.size(); ++c) {
            if (p[c].name != q[c].name)
                throw fail("union column " + std::to_string(c + 1) + " name mismatch: '" + p[c].name + "' vs '"
                           + q[c].name + "'");
            if (p[c].kind != q[c].kind or p[c].date_text != q[c].date_text)
                throw fail("union column '" + p[c].name + "' kind mismatch");
        }
    }

    out.schema.name = v.name;
    out.schema.columns = renamed[0].columns;
    out.plans.assign(renamed.size(), {});
    for (std::size_t b = 0; b != renamed.size(); ++b)
        for (std::size_t c = 0; c != renamed[b].columns.size(); ++c)
            out.plans[b].push_back(ResolvedView::ColumnPlan{ c, false, nullptr });

    std::set<std::string> coerced, translated;
    for (const auto &rule : v.rules) {
        if (auto *c = std::get_if<CoerceRule>(&rule)) {
            auto pos = out.schema.find(c->column);
            if (not pos) throw fail("coerce of nonexistent column '" + c->column + "'");
            auto &col = out.schema.columns[*pos];
            if (not coerced.insert(c->column).second) throw fail("column '" + c->column + "' coerced twice");
            if (translated.count(c->column)) throw fail("column '" + c->column + "' is both translated and coerced");
            if (not col.date_text) throw fail("coerce of non-date_text column '" + c->column + "'");
            col.kind = ColumnKind::Date;
            col.date_text = false;
            for (auto &plan : out.plans) plan[*pos].coerce = true;
        } else if (auto *t = std::get_if<TranslateRule>(&rule)) {
            auto pos = out.schema.find(t->column);
            if (not pos) throw fail("translate of nonexistent column '" + t->column + "'");
            auto &col = out.schema.columns[*pos];
            if (not translated.insert(t->column).second) throw fail("column '" + t->column + "' translated twice");
            if (coerced.count(t->column)) throw fail("column '" + t->column + "' is both translated and coerced");
            if (col.kind != ColumnKind::Text) throw fail("translate of non-text column '" + t->column + "'");
            auto table = ctx.translation ? ctx.translation(t->table) : nullptr;
            if (not table) throw fail("unknown translation table '" + t->table + "'");
            col.date_text = false;
            for (auto &plan : out.plans) plan[*pos].translate = table;
        }
    }
    return out;
}

std::optional<std::string> ResolvedView::raw_name(std::size_t base, std::string_view column) const
{
    auto pos = schema.find(column);
    if (not pos) return std::nullopt;
    const ColumnPlan &plan = plans[base][*pos];
    if (plan.coerce or plan.translate) return std::nullopt;
    return base_schemas[base].columns[plan.raw_index].name;
}

MediatedRow ResolvedView::apply(std::size_t base, const Row &raw) const
{
    MediatedRow out;
    const auto &plan = plans[base];
    out.values.reserve(plan.size());
    auto ref = [&] {
        return ItemRef{ definition.base[base].source, definition.base[base].table,
                        raw.empty() ? std::string() : raw[0].to_display() };
    };
    for (std::size_t c = 0; c != plan.size(); ++c) {
        const Value &cell = raw[plan[c].raw_index];
        if (plan[c].coerce) {
            if (cell.is_null()) { out.values.push_back(Value::null()); continue; }
            const std::string &text = cell.as_text();
            if (text.find_first_not_of(" \t\r\n") == std::string::npos) { out.values.push_back(Value::null()); continue; }
            try {
                out.values.push_back(Value::date(parse_uncertain_date(text)));
            } catch (const ParseError &e) {
                out.values.push_back(Value::null());
                out.errored_columns.push_back(c);
                out.errors.emplace_back(ref(), schema.columns[c].name, text,
                                        "cannot coerce '" + text + "' to a date (" + e.what() + ")");
            }
        } else if (plan[c].translate) {
            if (cell.is_null()) { out.values.push_back(Value::null()); continue; }
            const std::string &text = cell.as_text();
            if (auto mapped = plan[c].translate->lookup(text)) {
                out.values.push_back(Value::text(*mapped));
            } else if (strict_translate and not text.empty()) {
                out.values.push_back(Value::null());
                out.errored_columns.push_back(c);
                out.errors.emplace_back(ref(), schema.columns[c].name, text,
                                        "no translation for '" + text + "' in '" + plan[c].translate->id() + "'");
            } else {
                out.values.push_back(cell);
            }
        } else {
            out.values.push_back(cell);
        }
    }
    return out;
}

}
