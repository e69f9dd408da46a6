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


#pragma once

#include "vdc/error.hpp"
#include "vdc/mediation.hpp"
#include "vdc/unicode.hpp"
#include <string>
#include <string_view>
#include <vector>


/* Shared lexing for the line-based view and recipe grammars. */
namespace vdc::detail {

inline bool is_ident_start(char c) { return (c >= 'A' and c <= 'Z') or (c >= 'a' and c <= 'z') or c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) or (c >= '0' and c <= '9'); }

/** Tokenizer for a single line of the view and recipe grammars. */
class LineLexer
{
    std::string_view line_;
    std::size_t pos_ = 0;
    std::size_t base_;
    std::size_t line_no_;

    public:
    LineLexer(std::string_view line, std::size_t base, std::size_t line_no) : line_(line), base_(base), line_no_(line_no) { }

    [[noreturn]] void fail(const std::string &what) const { throw ParseError(what, base_ + pos_, line_no_); }

    void skip_space() { while (pos_ < line_.size() and (line_[pos_] == ' ' or line_[pos_] == '\t')) ++pos_; }
    bool at_end() { skip_space(); return pos_ >= line_.size(); }

    std::string identifier(const char *what) {
        skip_space();
        const std::size_t start = pos_;
        if (pos_ >= line_.size() or not is_ident_start(line_[pos_])) fail(std::string("expected ") + what);
        while (pos_ < line_.size() and is_ident_char(line_[pos_])) ++pos_;
        return std::string(line_.substr(start, pos_ - start));
    }

    RelationName relation() {
        RelationName r;
        r.source = identifier("source identifier");
        if (pos_ >= line_.size() or line_[pos_] != '.') fail("expected '<source>.<table>'");
        ++pos_;
        r.table = identifier("table identifier");
        return r;
    }

    std::string quoted_or_identifier(const char *what) {
        skip_space();
        if (pos_ < line_.size() and line_[pos_] == '"') {
            ++pos_;
            std::string out;
            for (;;) {
                if (pos_ >= line_.size()) fail("unterminated quoted name");
                const char c = line_[pos_++];
                if (c == '"') {
                    if (pos_ < line_.size() and line_[pos_] == '"') { out.push_back('"'); ++pos_; continue; }
                    break;
                }
                out.push_back(c);
            }
            if (out.empty()) fail("empty quoted name");
            return unicode::nfc(out);
        }
        return identifier(what);
    }

    void literal(std::string_view word) {
        skip_space();
        if (line_.substr(pos_).starts_with(word)) {
            const std::size_t after = pos_ + word.size();
            if (after >= line_.size() or not is_ident_char(line_[after]) or not is_ident_char(word.back())) {
                pos_ = after;
                return;
            }
        }
        fail("expected '" + std::string(word) + "'");
    }

    void finish() { if (not at_end()) fail("unexpected trailing text"); }
};

inline std::string quote_name(std::string_view name)
{
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + '"';
}

/** `name` bare when it is an identifier, otherwise double-quoted. */
inline std::string name_token(std::string_view name)
{
    bool ident = not name.empty() and is_ident_start(name[0]);
    for (char c : name) ident = ident and is_ident_char(c);
    return ident ? std::string(name) : quote_name(name);
}

struct Line
{
    std::string_view text;
    std::size_t offset;
    std::size_t number;
};

inline std::vector<Line> significant_lines(std::string_view text)
{
    std::vector<Line> lines;
    std::size_t start = 0, number = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        ++number;
        std::string_view line = text.substr(start, nl - start);
        if (not line.empty() and line.back() == '\r') line.remove_suffix(1);
        std::size_t b = 0;
        while (b < line.size() and (line[b] == ' ' or line[b] == '\t')) ++b;
        if (b < line.size() and line[b] != '#')
            lines.push_back({ line.substr(b), start + b, number });
        if (nl == text.size()) break;
        start = nl + 1;
    }
    return lines;
}

inline std::string keyword_of(std::string_view line)
{
    std::size_t e = 0;
    while (e < line.size() and is_ident_char(line[e])) ++e;
    return std::string(line.substr(0, e));
}

}
