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


#include "vdc/csv.hpp"

#include "vdc/error.hpp"
#include <sstream>


namespace vdc::csv {

std::optional<std::vector<std::string>> Reader::next()
{
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any = false;
    std::size_t offset = 0;

    for (;;) {
        const int ci = in_.get();
        if (ci == std::char_traits<char>::eof()) {
            if (in_quotes) throw ParseError("unterminated quoted field", offset, record_line_ ? record_line_ : line_);
            if (not any) return std::nullopt;
            fields.push_back(std::move(field));
            return fields;
        }
        const char c = static_cast<char>(ci);
        ++offset;

        if (not any) {
            if (c == '\n') { ++line_; continue; }
            if (c == '\r' and in_.peek() == '\n') continue;
            any = true;
            record_line_ = line_;
        }

        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }

        switch (c) {
            case '"':
                if (not field.empty() or field_was_quoted)
                    throw ParseError("quote inside unquoted field", offset, line_);
                in_quotes = true;
                field_was_quoted = true;
                break;

            case ',':
                fields.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
                break;

            case '\r':
                if (in_.peek() != '\n') throw ParseError("bare carriage return", offset, line_);
                break;

            case '\n':
                ++line_;
                fields.push_back(std::move(field));
                return fields;

            default:
                if (field_was_quoted) throw ParseError("characters after closing quote", offset, line_);
                field.push_back(c);
        }
    }
}

std::vector<std::vector<std::string>> parse(std::string_view text)
{
    std::istringstream in{std::string(text)};
    Reader reader(in);
    std::vector<std::vector<std::string>> records;
    while (auto r = reader.next()) records.push_back(std::move(*r));
    return records;
}

void append_field(std::string &out, std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        out += field;
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

std::string format_record(const std::vector<std::string> &fields)
{
    std::string out;
    for (std::size_t i = 0; i != fields.size(); ++i) {
        if (i) out.push_back(',');
        append_field(out, fields[i]);
    }
    out.push_back('\n');
    return out;
}

}
