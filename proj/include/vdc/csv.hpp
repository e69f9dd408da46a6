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

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>


namespace vdc::csv {

/** Streaming RFC-4180 reader: UTF-8, LF or CRLF record terminators, double-quote escaping, quoted fields may span
 * lines.  Blank lines are skipped.  Malformed input throws `ParseError` with the 1-based line of the offending
 * record. */
class Reader
{
    std::istream &in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;

    public:
    explicit Reader(std::istream &in) : in_(in) { }

    /** Reads the next record, or returns `std::nullopt` at end of input. */
    std::optional<std::vector<std::string>> next();

    /** Line on which the most recently returned record started. */
    std::size_t record_line() const { return record_line_; }
};

/** Parses a whole in-memory document. */
std::vector<std::vector<std::string>> parse(std::string_view text);

/** Appends `field`, quoted when it contains a comma, quote, CR or LF. */
void append_field(std::string &out, std::string_view field);

/** Formats one LF-terminated record. */
std::string format_record(const std::vector<std::string> &fields);

}
