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


#include "vdc/xml.hpp"

#include "vdc/error.hpp"
#include "vdc/unicode.hpp"
#include <charconv>


namespace vdc::xml {

const std::string * Element::attribute(std::string_view key) const
{
    for (const auto &[k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

namespace {

void collect_text(const Element &e, std::string &out)
{
    for (const auto &child : e.children) {
        if (auto *s = std::get_if<std::string>(&child))
            out += *s;
        else
            collect_text(*std::get<std::unique_ptr<Element>>(child), out);
    }
}

bool is_xml_space(char c) { return c == ' ' or c == '\t' or c == '\n' or c == '\r'; }

bool is_name_start(char c)
{
    return (c >= 'A' and c <= 'Z') or (c >= 'a' and c <= 'z') or c == '_' or c == ':'
           or static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) { return is_name_start(c) or (c >= '0' and c <= '9') or c == '-' or c == '.'; }

void append_code_point(std::string &out, std::uint32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class Parser
{
    std::string_view s_;
    std::size_t pos_ = 0;

    public:
    explicit Parser(std::string_view s) : s_(s) { }

    [[noreturn]] void fail(const std::string &what) const { throw ParseError("malformed XML: " + what, pos_); }

    bool at_end() const { return pos_ >= s_.size(); }
    bool looking_at(std::string_view lit) const { return s_.substr(pos_).starts_with(lit); }

    void skip_space() { while (not at_end() and is_xml_space(s_[pos_])) ++pos_; }

    void expect(std::string_view lit) {
        if (not looking_at(lit)) fail("expected '" + std::string(lit) + "'");
        pos_ += lit.size();
    }

    void skip_until(std::string_view terminator, const char *what) {
        const auto end = s_.find(terminator, pos_);
        if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
        pos_ = end + terminator.size();
    }

    /** Skips comments, processing instructions and whitespace between markup at the document level. */
    void skip_misc() {
        for (;;) {
            skip_space();
            if (looking_at("<!--")) { pos_ += 4; skip_until("-->", "comment"); }
            else if (looking_at("<?")) { pos_ += 2; skip_until("?>", "processing instruction"); }
            else if (looking_at("<!DOCTYPE")) fail("DOCTYPE declarations are not supported");
            else return;
        }
    }

    std::string parse_name() {
        if (at_end() or not is_name_start(s_[pos_])) fail("expected a name");
        const std::size_t start = pos_;
        while (not at_end() and is_name_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    void parse_reference(std::string &out) {
        const std::size_t start = pos_;
        ++pos_; // '&'
        const auto semi = s_.find(';', pos_);
        if (semi == std::string_view::npos or semi - pos_ > 10) { pos_ = start; fail("unterminated entity reference"); }
        const std::string_view ref = s_.substr(pos_, semi - pos_);
        pos_ = semi + 1;
        if (ref == "amp") out.push_back('&');
        else if (ref == "lt") out.push_back('<');
        else if (ref == "gt") out.push_back('>');
        else if (ref == "quot") out.push_back('"');
        else if (ref == "apos") out.push_back('\'');
        else if (ref.starts_with('#')) {
            std::uint32_t cp = 0;
            const bool hex = ref.size() > 1 and ref[1] == 'x';
            const std::string_view digits = ref.substr(hex ? 2 : 1);
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (digits.empty() or ec != std::errc() or p != digits.data() + digits.size() or cp == 0 or cp > 0x10FFFF
                or (cp >= 0xD800 and cp <= 0xDFFF)) {
                pos_ = start;
                fail("invalid character reference");
            }
            append_code_point(out, cp);
        } else {
            pos_ = start;
            fail("unknown entity '&" + std::string(ref) + ";'");
        }
    }

    std::string parse_attribute_value() {
        if (at_end() or (s_[pos_] != '"' and s_[pos_] != '\'')) fail("expected quoted attribute value");
        const char quote = s_[pos_++];
        std::string value;
        for (;;) {
            if (at_end()) fail("unterminated attribute value");
            const char c = s_[pos_];
            if (c == quote) { ++pos_; return value; }
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') { parse_reference(value); continue; }
            value.push_back(is_xml_space(c) ? ' ' : c);
            ++pos_;
        }
    }

    std::unique_ptr<Element> parse_element() {
        auto e = std::make_unique<Element>();
        e->offset = pos_;
        expect("<");
        e->name = parse_name();
        for (;;) {
            const bool had_space = not at_end() and is_xml_space(s_[pos_]);
            skip_space();
            if (looking_at("/>")) { pos_ += 2; return e; }
            if (looking_at(">")) { ++pos_; break; }
            if (not had_space) fail("expected whitespace before attribute");
            std::string key = parse_name();
            skip_space();
            expect("=");
            skip_space();
            std::string value = parse_attribute_value();
            if (e->attribute(key)) fail("duplicate attribute '" + key + "'");
            e->attributes.emplace_back(std::move(key), std::move(value));
        }

        std::string text;
        auto flush = [&] {
            if (not text.empty()) {
                e->children.emplace_back(std::move(text));
                text.clear();
            }
        };
        for (;;) {
            if (at_end()) fail("unclosed element <" + e->name + ">");
            const char c = s_[pos_];
            if (c == '<') {
                if (looking_at("</")) {
                    flush();
                    pos_ += 2;
                    const std::string closing = parse_name();
                    if (closing != e->name) fail("mismatched closing tag </" + closing + "> for <" + e->name + ">");
                    skip_space();
                    expect(">");
                    return e;
                }
                if (looking_at("<!--")) { pos_ += 4; skip_until("-->", "comment"); continue; }
                if (looking_at("<![CDATA[")) {
                    pos_ += 9;
                    const auto end = s_.find("]]>", pos_);
                    if (end == std::string_view::npos) fail("unterminated CDATA section");
                    text.append(s_.substr(pos_, end - pos_));
                    pos_ = end + 3;
                    continue;
                }
                if (looking_at("<?")) { pos_ += 2; skip_until("?>", "processing instruction"); continue; }
                flush();
                e->children.emplace_back(parse_element());
                continue;
            }
            if (c == '&') { parse_reference(text); continue; }
            text.push_back(c);
            ++pos_;
        }
    }

    std::unique_ptr<Element> parse_document() {
        if (looking_at("\xEF\xBB\xBF")) pos_ += 3;
        skip_misc();
        if (at_end() or s_[pos_] != '<') fail("expected root element");
        auto root = parse_element();
        skip_misc();
        if (not at_end()) fail("content after root element");
        return root;
    }
};

}

std::string Element::text_content() const
{
    std::string out;
    collect_text(*this, out);
    return out;
}

std::unique_ptr<Element> parse(std::string_view text)
{
    if (not unicode::is_valid_utf8(text)) throw ParseError("malformed XML: not valid UTF-8", 0);
    return Parser(text).parse_document();
}

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_xml_space(c)) {
            pending_space = not out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

}
