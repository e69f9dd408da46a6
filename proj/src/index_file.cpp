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
#include "vdc/textindex.hpp"
#include "vdc/unicode.hpp"
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>


namespace vdc {

namespace {

constexpr std::string_view kHeader = "VDCIDX 1";

void escape_into(std::string &out, std::string_view s)
{
    for (char c : s) {
        switch (c) {
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case ';':  out += "\\;"; break;
            case '\\': out += "\\\\"; break;
            default:   out.push_back(c);
        }
    }
}

std::string format_double(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

[[noreturn]] void corrupt(std::size_t line, const std::string &what)
{
    throw IndexFormatError("index line " + std::to_string(line) + ": " + what);
}

/** Splits on unescaped `sep` (if any), decoding escapes. */
std::vector<std::string> split_escaped(std::string_view s, std::optional<char> sep, std::size_t line)
{
    std::vector<std::string> parts(1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '\\') {
            if (++i >= s.size()) corrupt(line, "dangling escape");
            switch (s[i]) {
                case 't':  parts.back().push_back('\t'); break;
                case 'n':  parts.back().push_back('\n'); break;
                case ';':  parts.back().push_back(';'); break;
                case '\\': parts.back().push_back('\\'); break;
                default:   corrupt(line, "unknown escape '\\" + std::string(1, s[i]) + "'");
            }
        } else if (sep and c == *sep) {
            parts.emplace_back();
        } else {
            parts.back().push_back(c);
        }
    }
    return parts;
}

template<typename T>
T parse_number(std::string_view s, std::size_t line, const char *what)
{
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() or ec != std::errc() or p != s.data() + s.size()) corrupt(line, std::string("bad ") + what + " '" + std::string(s) + "'");
    return v;
}

std::optional<double> parse_coordinate(std::string_view s, std::size_t line, double bound)
{
    if (s == "-") return std::nullopt;
    const double v = parse_number<double>(s, line, "coordinate");
    if (not std::isfinite(v) or v < -bound or v > bound) corrupt(line, "coordinate out of range");
    return v;
}

}

std::string write_index(const InvertedIndex &index)
{
    std::string out;
    out += kHeader;
    out += "\nDOCS\n";
    for (std::size_t i = 0; i != index.docs.size(); ++i) {
        const IndexedDoc &d = index.docs[i];
        out += std::to_string(i);
        out += '\t';
        escape_into(out, d.doc_id);
        out += '\t';
        escape_into(out, d.ref.to_string());
        out += '\t';
        out += d.geo ? format_double(d.geo->lat) : "-";
        out += '\t';
        out += d.geo ? format_double(d.geo->lon) : "-";
        out += '\t';
        for (std::size_t f = 0; f != d.stored.size(); ++f) {
            if (f) out += ';';
            escape_into(out, d.stored[f].first);
            out += '=';
            escape_into(out, d.stored[f].second);
        }
        out += '\n';
    }
    for (const auto &[field, postings] : index.fields) {
        out += "FIELD ";
        out += field;
        out += '\n';
        for (const auto &[term, list] : postings) {
            escape_into(out, term);
            out += '\t';
            for (std::size_t i = 0; i != list.size(); ++i) {
                if (i) out += ',';
                out += std::to_string(list[i].ordinal);
                out += ':';
                out += std::to_string(list[i].tf);
            }
            out += '\n';
        }
    }
    out += "END\n";
    return out;
}

void write_index(const InvertedIndex &index, const std::filesystem::path &path)
{
    const std::string bytes = write_index(index);
    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (not out) throw IndexFormatError("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (not out.flush()) throw IndexFormatError("cannot write '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

InvertedIndex read_index(std::string_view bytes)
{
    if (not unicode::is_valid_utf8(bytes)) throw IndexFormatError("index is not valid UTF-8");
    if (bytes.empty() or bytes.back() != '\n') throw IndexFormatError("index is truncated (no final newline)");

    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start < bytes.size();) {
        const std::size_t nl = bytes.find('\n', start);
        lines.push_back(bytes.substr(start, nl - start));
        start = nl + 1;
    }
    if (lines[0] != kHeader) {
        if (lines[0].starts_with("VDCIDX ")) throw IndexFormatError("unsupported index version '" + std::string(lines[0].substr(7)) + "'");
        throw IndexFormatError("not an index file (missing 'VDCIDX 1' header)");
    }
    if (lines.back() != "END") throw IndexFormatError("index is truncated (missing END trailer)");
    if (lines.size() < 2 or lines[1] != "DOCS") corrupt(2, "expected 'DOCS'");

    InvertedIndex index;
    std::size_t i = 2;
    for (; i + 1 < lines.size() and not lines[i].starts_with("FIELD "); ++i) {
        const std::size_t ln = i + 1;
        auto parts = split_escaped(lines[i], '\t', ln);
        if (parts.size() != 6) corrupt(ln, "expected 6 tab-separated fields in a DOCS line");
        if (parse_number<std::size_t>(parts[0], ln, "ordinal") != index.docs.size()) corrupt(ln, "ordinals out of order");
        IndexedDoc d;
        d.doc_id = parts[1];
        if (d.doc_id.empty()) corrupt(ln, "empty doc id");
        if (not index.docs.empty() and not (index.docs.back().doc_id < d.doc_id)) corrupt(ln, "doc ids not strictly ascending");
        try {
            d.ref = ItemRef::parse(parts[2]);
        } catch (const ParseError &e) {
            corrupt(ln, std::string("bad item reference: ") + e.what());
        }
        auto lat = parse_coordinate(parts[3], ln, 90), lon = parse_coordinate(parts[4], ln, 180);
        if (lat.has_value() != lon.has_value()) corrupt(ln, "half a coordinate pair");
        if (lat) d.geo = GeoPoint{ *lat, *lon };
        /* Stored fields: split the raw text on unescaped ';' first, then each on the first '='. */
        std::string_view raw = lines[i];
        for (int tabs = 0; tabs != 5; ++tabs) raw.remove_prefix(raw.find('\t') + 1);
        if (not raw.empty()) {
            std::size_t start = 0;
            for (std::size_t k = 0; k <= raw.size(); ++k) {
                if (k < raw.size() and raw[k] == '\\') { ++k; continue; }
                if (k < raw.size() and raw[k] != ';') continue;
                const std::string_view item = raw.substr(start, k - start);
                const std::size_t eq = item.find('=');
                if (eq == std::string_view::npos) corrupt(ln, "stored field without '='");
                auto name = split_escaped(item.substr(0, eq), std::nullopt, ln);
                auto value = split_escaped(item.substr(eq + 1), std::nullopt, ln);
                d.stored.emplace_back(name[0], value[0]);
                start = k + 1;
            }
        }
        index.docs.push_back(std::move(d));
    }

    std::string previous_field;
    bool any_field = false;
    while (i + 1 < lines.size()) {
        const std::size_t ln = i + 1;
        if (not lines[i].starts_with("FIELD ")) corrupt(ln, "expected 'FIELD <name>'");
        std::string field(lines[i].substr(6));
        if (field.empty()) corrupt(ln, "empty field name");
        if (any_field and not (previous_field < field)) corrupt(ln, "fields not in ascending order");
        previous_field = field;
        any_field = true;
        PostingMap &postings = index.fields[field];
        ++i;
        std::string previous_term;
        for (; i + 1 < lines.size() and not lines[i].starts_with("FIELD "); ++i) {
            const std::size_t tl = i + 1;
            const std::size_t tab = lines[i].find('\t');
            if (tab == std::string_view::npos) corrupt(tl, "posting line without tab");
            auto term = split_escaped(lines[i].substr(0, tab), std::nullopt, tl);
            if (term[0].empty()) corrupt(tl, "empty term");
            if (not postings.empty() and not (previous_term < term[0])) corrupt(tl, "terms not in ascending order");
            previous_term = term[0];
            std::vector<Posting> list;
            std::string_view rest = lines[i].substr(tab + 1);
            if (rest.empty()) corrupt(tl, "term without postings");
            while (true) {
                const std::size_t comma = rest.find(',');
                const std::string_view item = rest.substr(0, comma);
                const std::size_t colon = item.find(':');
                if (colon == std::string_view::npos) corrupt(tl, "posting without ':'");
                Posting p{ parse_number<std::uint32_t>(item.substr(0, colon), tl, "ordinal"),
                           parse_number<std::uint32_t>(item.substr(colon + 1), tl, "term frequency") };
                if (p.ordinal >= index.docs.size()) corrupt(tl, "posting refers to unknown ordinal");
                if (p.tf == 0) corrupt(tl, "term frequency must be at least 1");
                if (not list.empty() and list.back().ordinal >= p.ordinal) corrupt(tl, "postings not in ascending order");
                list.push_back(p);
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            postings.emplace(std::move(term[0]), std::move(list));
        }
    }
    return index;
}

InvertedIndex read_index_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (not in) throw IndexFormatError("cannot read index '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_index(ss.str());
}

}
