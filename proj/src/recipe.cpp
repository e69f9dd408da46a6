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


#include "line_grammar.hpp"
#include "vdc/error.hpp"
#include "vdc/textindex.hpp"
#include "vdc/unicode.hpp"
#include <algorithm>
#include <set>


namespace vdc {

using namespace detail;

std::vector<std::string> IngestRecipe::indexed_fields() const
{
    if (index.empty()) return { "body" };
    return index;
}

IngestRecipe parse_recipe(std::string_view text)
{
    if (not unicode::is_valid_utf8(text)) throw ParseError("recipe is not valid UTF-8", 0, 1);
    const auto lines = significant_lines(text);
    const std::size_t last_line = std::count(text.begin(), text.end(), '\n') + 1;
    if (lines.empty()) throw ParseError("expected 'recipe <name>'", text.size(), last_line);

    IngestRecipe r;
    {
        LineLexer lex(lines[0].text, lines[0].offset, lines[0].number);
        lex.literal("recipe");
        r.name = lex.identifier("recipe name");
        lex.finish();
    }
    bool have_from = false, have_id = false, ended = false;
    std::set<std::string> field_names, indexed;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Line &l = lines[i];
        LineLexer lex(l.text, l.offset, l.number);
        const std::string kw = keyword_of(l.text);
        if (ended) lex.fail("content after 'end'");
        if (kw != "from" and kw != "end" and not have_from) lex.fail("expected 'from <source>.<table>'");
        if (kw == "from") {
            if (have_from) lex.fail("duplicate 'from' line");
            lex.literal("from");
            r.from = lex.relation();
            lex.finish();
            have_from = true;
        } else if (kw == "id") {
            if (have_id) lex.fail("duplicate 'id' line");
            lex.literal("id");
            r.id_column = lex.quoted_or_identifier("id column");
            lex.finish();
            have_id = true;
        } else if (kw == "field") {
            lex.literal("field");
            std::string name = lex.identifier("document field name");
            if (name == "body") lex.fail("'body' is reserved for the document body");
            if (not field_names.insert(name).second) lex.fail("duplicate field '" + name + "'");
            lex.literal("=");
            std::string column = lex.quoted_or_identifier("column name");
            lex.finish();
            r.fields.emplace_back(std::move(name), std::move(column));
        } else if (kw == "body") {
            lex.literal("body");
            r.body_columns.push_back(lex.quoted_or_identifier("body column"));
            lex.finish();
        } else if (kw == "geo") {
            if (r.geo) lex.fail("duplicate 'geo' line");
            lex.literal("geo");
            std::string lat = lex.quoted_or_identifier("latitude column");
            std::string lon = lex.quoted_or_identifier("longitude column");
            lex.finish();
            r.geo.emplace(std::move(lat), std::move(lon));
        } else if (kw == "index") {
            lex.literal("index");
            std::string name = lex.identifier("indexed field");
            if (not indexed.insert(name).second) lex.fail("field '" + name + "' indexed twice");
            lex.finish();
            r.index.push_back(std::move(name));
        } else if (kw == "end") {
            if (not have_from) lex.fail("recipe has no 'from' line");
            lex.literal("end");
            lex.finish();
            ended = true;
        } else if (kw == "recipe") {
            lex.fail("nested 'recipe' (missing 'end'?)");
        } else {
            lex.fail("unknown recipe keyword '" + (kw.empty() ? std::string(l.text.substr(0, 1)) : kw) + "'");
        }
    }
    if (not ended) throw ParseError("missing 'end'", text.size(), last_line);
    const std::size_t end_line = lines.back().number;
    if (not have_id) throw ParseError("recipe has no 'id' line", lines.back().offset, end_line);
    if (r.body_columns.empty()) throw ParseError("recipe has no 'body' line", lines.back().offset, end_line);
    for (const auto &name : r.index)
        if (name != "body" and not field_names.count(name))
            throw ParseError("indexed field '" + name + "' is neither 'body' nor a declared field", lines.back().offset,
                             end_line);
    return r;
}

std::string format_recipe(const IngestRecipe &r)
{
    std::string out = "recipe " + r.name + "\n";
    out += "from " + r.from.to_string() + "\n";
    out += "id " + name_token(r.id_column) + "\n";
    for (const auto &[name, column] : r.fields) out += "field " + name + " = " + name_token(column) + "\n";
    for (const auto &c : r.body_columns) out += "body " + name_token(c) + "\n";
    if (r.geo) out += "geo " + name_token(r.geo->first) + " " + name_token(r.geo->second) + "\n";
    for (const auto &f : r.index) out += "index " + f + "\n";
    out += "end\n";
    return out;
}

void validate_recipe(const IngestRecipe &r, const TableSchema &schema)
{
    auto need = [&](const std::string &column, const char *role) {
        if (not schema.find(column))
            throw IngestError("recipe '" + r.name + "': " + role + " column '" + column + "' is not in "
                              + r.from.to_string());
    };
    need(r.id_column, "id");
    for (const auto &f : r.fields) need(f.second, "field");
    for (const auto &b : r.body_columns) need(b, "body");
    if (r.geo) {
        need(r.geo->first, "latitude");
        need(r.geo->second, "longitude");
    }
}

}
