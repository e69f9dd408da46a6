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


#include "vdc/error.hpp"
#include "vdc/query.hpp"
#include "vdc/unicode.hpp"
#include <algorithm>
#include <charconv>


namespace vdc {

namespace {

enum class Tok { Ident, Int, String, Star, Comma, Dot, LParen, RParen, Semicolon, Op, End };

struct Token
{
    Tok kind;
    std::string text;       ///< identifier spelling, string contents, operator spelling
    std::int64_t number = 0;
    SourceSpan span;
};

bool is_ident_start(char c) { return (c >= 'A' and c <= 'Z') or (c >= 'a' and c <= 'z') or c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) or (c >= '0' and c <= '9'); }
bool is_digit(char c) { return c >= '0' and c <= '9'; }

std::string upper(std::string_view s)
{
    std::string out(s);
    for (char &c : out)
        if (c >= 'a' and c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return out;
}

constexpr std::string_view kKeywords[] = { "SELECT", "FROM", "JOIN", "ON", "WHERE", "AND", "LIMIT", "CONTAINS" };

bool is_keyword(std::string_view ident)
{
    const std::string u = upper(ident);
    return std::find(std::begin(kKeywords), std::end(kKeywords), u) != std::end(kKeywords);
}

std::vector<Token> lex(std::string_view s)
{
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c == ' ' or c == '\t' or c == '\n' or c == '\r') { ++i; continue; }
        const std::size_t start = i;
        if (is_ident_start(c)) {
            while (i < s.size() and is_ident_char(s[i])) ++i;
            tokens.push_back({ Tok::Ident, std::string(s.substr(start, i - start)), 0, { start, i } });
        } else if (is_digit(c) or (c == '-' and i + 1 < s.size() and is_digit(s[i + 1]))) {
            ++i;
            while (i < s.size() and is_digit(s[i])) ++i;
            if (i < s.size() and is_ident_start(s[i])) throw ParseError("malformed number", start);
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(s.data() + start, s.data() + i, v);
            if (ec != std::errc()) throw ParseError("integer literal out of range", start);
            tokens.push_back({ Tok::Int, std::string(s.substr(start, i - start)), v, { start, i } });
        } else if (c == '\'') {
            std::string value;
            ++i;
            for (;;) {
                if (i >= s.size()) throw ParseError("unterminated string literal", start);
                if (s[i] == '\'') {
                    if (i + 1 < s.size() and s[i + 1] == '\'') { value.push_back('\''); i += 2; continue; }
                    ++i;
                    break;
                }
                value.push_back(s[i++]);
            }
            if (not unicode::is_valid_utf8(value)) throw ParseError("string literal is not valid UTF-8", start);
            tokens.push_back({ Tok::String, unicode::nfc(value), 0, { start, i } });
        } else {
            ++i;
            switch (c) {
                case '*': tokens.push_back({ Tok::Star, "*", 0, { start, i } }); break;
                case ',': tokens.push_back({ Tok::Comma, ",", 0, { start, i } }); break;
                case '.': tokens.push_back({ Tok::Dot, ".", 0, { start, i } }); break;
                case '(': tokens.push_back({ Tok::LParen, "(", 0, { start, i } }); break;
                case ')': tokens.push_back({ Tok::RParen, ")", 0, { start, i } }); break;
                case ';': tokens.push_back({ Tok::Semicolon, ";", 0, { start, i } }); break;
                case '=': tokens.push_back({ Tok::Op, "=", 0, { start, i } }); break;
                case '!':
                    if (i < s.size() and s[i] == '=') { ++i; tokens.push_back({ Tok::Op, "!=", 0, { start, i } }); break; }
                    throw ParseError("unexpected character '!'", start);
                case '<':
                case '>':
                    if (i < s.size() and s[i] == '=') ++i;
                    tokens.push_back({ Tok::Op, std::string(s.substr(start, i - start)), 0, { start, i } });
                    break;
                default:
                    throw ParseError("unexpected character '" + std::string(1, c) + "'", start);
            }
        }
    }
    tokens.push_back({ Tok::End, "", 0, { s.size(), s.size() } });
    return tokens;
}

class QueryParser
{
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token & peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
    const Token & advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string &what) const {
        const Token &t = peek();
        const std::string found = t.kind == Tok::End ? "end of query" : "'" + t.text + "'";
        throw ParseError(what + ", found " + found, t.span.begin);
    }

    bool at_keyword(std::string_view kw, std::size_t ahead = 0) const {
        const Token &t = peek(ahead);
        return t.kind == Tok::Ident and upper(t.text) == kw;
    }

    void expect_keyword(std::string_view kw) {
        if (not at_keyword(kw)) fail("expected " + std::string(kw));
        advance();
    }

    void expect(Tok kind, const char *what) {
        if (peek().kind != kind) fail(std::string("expected ") + what);
        advance();
    }

    std::string identifier(const char *what) {
        const Token &t = peek();
        if (t.kind != Tok::Ident or is_keyword(t.text)) fail(std::string("expected ") + what);
        return advance().text;
    }

    ColumnRef column() {
        ColumnRef ref;
        ref.span.begin = peek().span.begin;
        ref.name = identifier("column name");
        if (peek().kind == Tok::Dot) {
            advance();
            ref.qualifier = std::move(ref.name);
            ref.name = identifier("column name after '.'");
        }
        ref.span.end = tokens_[pos_ - 1].span.end;
        return ref;
    }

    RelationRef relation() {
        RelationRef rel;
        rel.span.begin = peek().span.begin;
        rel.name = identifier("relation name");
        if (peek().kind == Tok::Dot) {
            advance();
            rel.source = std::move(rel.name);
            rel.name = identifier("table name after '.'");
        }
        if (peek().kind == Tok::Ident and not is_keyword(peek().text))
            rel.alias = advance().text;
        rel.span.end = tokens_[pos_ - 1].span.end;
        return rel;
    }

    Literal literal() {
        const Token &t = peek();
        Literal lit;
        lit.span = t.span;
        if (t.kind == Tok::Int) {
            lit.kind = Literal::Kind::Int;
            lit.int_value = t.number;
        } else if (t.kind == Tok::String) {
            lit.kind = Literal::Kind::String;
            lit.string_value = t.text;
        } else {
            fail("expected a literal");
        }
        advance();
        return lit;
    }

    Literal string_literal(const char *what) {
        if (peek().kind != Tok::String) fail(std::string("expected ") + what);
        return literal();
    }

    std::int64_t non_negative_int(const char *what) {
        const Token &t = peek();
        if (t.kind != Tok::Int or t.number < 0) fail(std::string("expected ") + what);
        return advance().number;
    }

    PredicateAst predicate() {
        if (peek().kind == Tok::Ident and peek(1).kind == Tok::LParen) {
            const std::string fn = upper(peek().text);
            if (fn == "DATE_NEAR") {
                advance(); advance();
                DateNearAst p;
                p.a = column();
                expect(Tok::Comma, "','");
                p.b = column();
                expect(Tok::Comma, "','");
                p.k_years = non_negative_int("a non-negative year count");
                expect(Tok::RParen, "')'");
                return p;
            }
            if (fn == "DATE_WITHIN") {
                advance(); advance();
                DateWithinAst p;
                p.column = column();
                expect(Tok::Comma, "','");
                p.lo = string_literal("a quoted date");
                expect(Tok::Comma, "','");
                p.hi = string_literal("a quoted date");
                expect(Tok::RParen, "')'");
                return p;
            }
            throw ParseError("unknown function '" + peek().text + "'", peek().span.begin);
        }

        ColumnRef col = column();
        if (at_keyword("CONTAINS")) {
            advance();
            const Literal needle = string_literal("a quoted search text");
            return ContainsAst{ std::move(col), needle.string_value };
        }
        if (peek().kind != Tok::Op) fail("expected comparison operator or CONTAINS");
        const std::string op = advance().text;
        CompareOp cop = CompareOp::Eq;
        if (op == "=") cop = CompareOp::Eq;
        else if (op == "!=") cop = CompareOp::Ne;
        else if (op == "<") cop = CompareOp::Lt;
        else if (op == ">") cop = CompareOp::Gt;
        else if (op == "<=") cop = CompareOp::Le;
        else cop = CompareOp::Ge;
        return CompareAst{ std::move(col), cop, literal() };
    }

    public:
    explicit QueryParser(std::string_view text) : tokens_(lex(text)) { }

    QueryAst parse(std::string_view text) {
        QueryAst ast;
        ast.text = std::string(text);
        expect_keyword("SELECT");
        if (peek().kind == Tok::Star) {
            advance();
            ast.select_all = true;
        } else {
            ast.select.push_back(column());
            while (peek().kind == Tok::Comma) {
                advance();
                ast.select.push_back(column());
            }
        }
        expect_keyword("FROM");
        ast.from = relation();
        while (at_keyword("JOIN")) {
            advance();
            JoinClause j;
            j.relation = relation();
            expect_keyword("ON");
            j.left = column();
            if (peek().kind != Tok::Op or peek().text != "=") fail("expected '=' in join condition");
            advance();
            j.right = column();
            ast.joins.push_back(std::move(j));
        }
        if (at_keyword("WHERE")) {
            advance();
            ast.where.push_back(predicate());
            while (at_keyword("AND")) {
                advance();
                ast.where.push_back(predicate());
            }
        }
        if (at_keyword("LIMIT")) {
            advance();
            const Token &t = peek();
            if (t.kind != Tok::Int or t.number <= 0) fail("expected a positive LIMIT");
            ast.limit = advance().number;
        }
        if (peek().kind == Tok::Semicolon) advance();
        if (peek().kind != Tok::End) fail("expected end of query");
        return ast;
    }
};

std::string quote(const std::string &s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out.push_back('\'');
        out.push_back(c);
    }
    return out + "'";
}

std::string format_literal(const Literal &l)
{
    return l.kind == Literal::Kind::Int ? std::to_string(l.int_value) : quote(l.string_value);
}

std::string format_relation(const RelationRef &r)
{
    return r.alias.empty() ? r.to_string() : r.to_string() + ' ' + r.alias;
}

}

QueryAst parse_query(std::string_view text)
{
    return QueryParser(text).parse(text);
}

std::string format_query(const QueryAst &ast)
{
    std::string out = "SELECT ";
    if (ast.select_all) {
        out += '*';
    } else {
        for (std::size_t i = 0; i != ast.select.size(); ++i) {
            if (i) out += ", ";
            out += ast.select[i].to_string();
        }
    }
    out += " FROM " + format_relation(ast.from);
    for (const auto &j : ast.joins)
        out += " JOIN " + format_relation(j.relation) + " ON " + j.left.to_string() + " = " + j.right.to_string();
    for (std::size_t i = 0; i != ast.where.size(); ++i) {
        out += i == 0 ? " WHERE " : " AND ";
        std::visit([&](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CompareAst>)
                out += p.column.to_string() + ' ' + to_string(p.op) + ' ' + format_literal(p.literal);
            else if constexpr (std::is_same_v<T, ContainsAst>)
                out += p.column.to_string() + " CONTAINS " + quote(p.needle);
            else if constexpr (std::is_same_v<T, DateNearAst>)
                out += "DATE_NEAR(" + p.a.to_string() + ", " + p.b.to_string() + ", " + std::to_string(p.k_years) + ')';
            else
                out += "DATE_WITHIN(" + p.column.to_string() + ", " + format_literal(p.lo) + ", " + format_literal(p.hi) + ')';
        }, ast.where[i]);
    }
    if (ast.limit) out += " LIMIT " + std::to_string(*ast.limit);
    return out;
}

}
