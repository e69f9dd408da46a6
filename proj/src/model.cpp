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


#include "vdc/model.hpp"

#include "vdc/error.hpp"
#include "vdc/unicode.hpp"
#include <charconv>
#include <stdexcept>
#include <unordered_set>


namespace vdc {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) and ((a < 0) != (b < 0))) --q;
    return q;
}

/** Day number of 1 January of `year`. */
DayNumber first_day_of_year(std::int64_t year)
{
    return 365 * (year - 1) + floor_div(year - 1, 4);
}

constexpr int kMonthDays[12] = { 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31 };

bool is_digit(char c) { return c >= '0' and c <= '9'; }

struct Bound
{
    DayNumber earliest;
    DayNumber latest;
};

/** Recursive-descent parser over the date grammar.  Offsets are reported relative to the original input. */
class DateParser
{
    std::string_view s_;
    std::size_t pos_;
    std::size_t end_;

    public:
    DateParser(std::string_view s, std::size_t begin, std::size_t end) : s_(s), pos_(begin), end_(end) { }

    [[noreturn]] void fail(const std::string &what) const { throw ParseError("invalid date: " + what, pos_); }

    bool at_end() const { return pos_ >= end_; }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }

    std::int64_t parse_year() {
        bool negative = false;
        if (peek() == '-') { negative = true; ++pos_; }
        const std::size_t start = pos_;
        while (not at_end() and is_digit(peek())) ++pos_;
        if (pos_ == start) fail("expected year digits");
        if (pos_ - start > 9) { pos_ = start; fail("year out of range"); }
        std::int64_t year = 0;
        std::from_chars(s_.data() + start, s_.data() + pos_, year);
        return negative ? -year : year;
    }

    int parse_two_digits(const char *what) {
        if (end_ - pos_ < 2 or not is_digit(s_[pos_]) or not is_digit(s_[pos_ + 1]))
            fail(std::string("expected two-digit ") + what);
        const int value = (s_[pos_] - '0') * 10 + (s_[pos_ + 1] - '0');
        pos_ += 2;
        if (not at_end() and is_digit(peek())) fail(std::string("too many digits in ") + what);
        return value;
    }

    Bound parse_bound() {
        const std::int64_t year = parse_year();
        if (peek() != '-')
            return { first_day_of_year(year), first_day_of_year(year + 1) - 1 };
        ++pos_;
        const std::size_t month_pos = pos_;
        const int month = parse_two_digits("month");
        if (month < 1 or month > 12) { pos_ = month_pos; fail("month out of range"); }
        if (peek() != '-') {
            const DayNumber first = day_number({ year, month, 1 });
            return { first, first + days_in_month(year, month) - 1 };
        }
        ++pos_;
        const std::size_t day_pos = pos_;
        const int day = parse_two_digits("day");
        if (day < 1 or day > days_in_month(year, month)) { pos_ = day_pos; fail("no such day in month"); }
        const DayNumber d = day_number({ year, month, day });
        return { d, d };
    }

    Bound parse_interval() {
        const Bound lo = parse_bound();
        if (at_end()) return lo;
        if (peek() != '/') fail("unexpected character");
        ++pos_;
        const std::size_t hi_pos = pos_;
        const Bound hi = parse_bound();
        if (not at_end()) fail("trailing characters");
        if (lo.earliest > hi.earliest or lo.latest > hi.latest) { pos_ = hi_pos; fail("reversed range"); }
        return { lo.earliest, hi.latest };
    }
};

bool is_space(char c) { return c == ' ' or c == '\t' or c == '\n' or c == '\r'; }

void append_padded_year(std::string &out, std::int64_t year)
{
    if (year < 0) out.push_back('-');
    const std::string digits = std::to_string(year < 0 ? -year : year);
    if (digits.size() < 4) out.append(4 - digits.size(), '0');
    out += digits;
}

void append_two(std::string &out, int v)
{
    out.push_back(static_cast<char>('0' + v / 10));
    out.push_back(static_cast<char>('0' + v % 10));
}

void append_civil(std::string &out, const CivilDate &c)
{
    append_padded_year(out, c.year);
    out.push_back('-');
    append_two(out, c.month);
    out.push_back('-');
    append_two(out, c.day);
}

}

bool is_leap_year(std::int64_t year) { return year % 4 == 0; }

int days_in_month(std::int64_t year, int month)
{
    if (month == 2 and is_leap_year(year)) return 29;
    return kMonthDays[month - 1];
}

DayNumber day_number(const CivilDate &date)
{
    DayNumber d = first_day_of_year(date.year);
    for (int m = 1; m < date.month; ++m)
        d += days_in_month(date.year, m);
    return d + date.day - 1;
}

CivilDate civil_from_day(DayNumber day)
{
    std::int64_t year = floor_div(day, 1461) * 4 + 1;
    while (first_day_of_year(year + 1) <= day) ++year;
    while (first_day_of_year(year) > day) --year;
    DayNumber rest = day - first_day_of_year(year);
    int month = 1;
    while (rest >= days_in_month(year, month)) {
        rest -= days_in_month(year, month);
        ++month;
    }
    return { year, month, static_cast<int>(rest) + 1 };
}

UncertainDate parse_uncertain_date(std::string_view s, const DateOptions &options)
{
    std::size_t begin = 0, end = s.size();
    while (begin < end and is_space(s[begin])) ++begin;
    while (end > begin and is_space(s[end - 1])) --end;
    if (begin == end) throw ParseError("invalid date: empty text", begin);

    bool circa = false;
    if (s.substr(begin, end - begin).starts_with("ca.")) {
        std::size_t p = begin + 3;
        if (p >= end or not is_space(s[p])) throw ParseError("invalid date: expected space after 'ca.'", p);
        while (p < end and is_space(s[p])) ++p;
        begin = p;
        circa = true;
    }

    DateParser parser(s, begin, end);
    Bound b = parser.parse_interval();
    if (circa) {
        b.earliest -= options.circa_widening_days;
        b.latest += options.circa_widening_days;
    }
    return UncertainDate{ b.earliest, b.latest, std::string(s) };
}

std::optional<UncertainDate> try_parse_uncertain_date(std::string_view s, const DateOptions &options)
{
    try {
        return parse_uncertain_date(s, options);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

std::string format_uncertain_date(const UncertainDate &d)
{
    std::string out;
    out.reserve(22);
    append_civil(out, civil_from_day(d.earliest_day));
    out.push_back('/');
    append_civil(out, civil_from_day(d.latest_day));
    return out;
}

DayNumber date_gap_days(const UncertainDate &a, const UncertainDate &b)
{
    if (a.latest_day < b.earliest_day) return b.earliest_day - a.latest_day;
    if (b.latest_day < a.earliest_day) return a.earliest_day - b.latest_day;
    return 0;
}

bool date_near(const UncertainDate &a, const UncertainDate &b, std::int64_t k_years)
{
    return date_gap_days(a, b) <= k_years * kDaysPerYearForProximity;
}

bool date_within(const UncertainDate &a, const UncertainDate &lo, const UncertainDate &hi)
{
    return lo.earliest_day <= a.earliest_day and a.latest_day <= hi.latest_day;
}


/*----- Values -------------------------------------------------------------------------------------------------------*/

const char * to_string(ValueKind kind)
{
    switch (kind) {
        case ValueKind::Null: return "null";
        case ValueKind::Int:  return "int";
        case ValueKind::Text: return "text";
        case ValueKind::Date: return "date";
    }
    return "?";
}

const char * to_string(ColumnKind kind)
{
    switch (kind) {
        case ColumnKind::Int:  return "int";
        case ColumnKind::Text: return "text";
        case ColumnKind::Date: return "date";
    }
    return "?";
}

Value Value::text(std::string_view s) { return Value(variant_type(unicode::nfc(s))); }

std::string Value::to_display() const
{
    switch (kind()) {
        case ValueKind::Null: return {};
        case ValueKind::Int:  return std::to_string(as_int());
        case ValueKind::Text: return as_text();
        case ValueKind::Date: return format_uncertain_date(as_date());
    }
    return {};
}

std::strong_ordering compare_values(const Value &a, const Value &b)
{
    if (a.kind() != b.kind())
        return static_cast<int>(a.kind()) <=> static_cast<int>(b.kind());
    switch (a.kind()) {
        case ValueKind::Null: return std::strong_ordering::equal;
        case ValueKind::Int:  return a.as_int() <=> b.as_int();
        case ValueKind::Text: {
            /* UTF-8 byte order coincides with code-point order. */
            const int c = a.as_text().compare(b.as_text());
            return c < 0 ? std::strong_ordering::less
                         : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
        }
        case ValueKind::Date: {
            const auto &x = a.as_date(), &y = b.as_date();
            if (auto c = x.earliest_day <=> y.earliest_day; c != 0) return c;
            return x.latest_day <=> y.latest_day;
        }
    }
    return std::strong_ordering::equal;
}

std::strong_ordering compare_rows(const Row &a, const Row &b)
{
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i != n; ++i)
        if (auto c = compare_values(a[i], b[i]); c != 0) return c;
    return a.size() <=> b.size();
}


/*----- Schemas ------------------------------------------------------------------------------------------------------*/

std::optional<std::size_t> TableSchema::find(std::string_view column) const
{
    for (std::size_t i = 0; i != columns.size(); ++i)
        if (columns[i].name == column) return i;
    return std::nullopt;
}

void TableSchema::validate() const
{
    if (columns.empty()) throw std::invalid_argument("schema '" + name + "' has no columns");
    std::unordered_set<std::string> seen;
    for (const auto &c : columns) {
        if (c.name.empty()) throw std::invalid_argument("schema '" + name + "' has an unnamed column");
        if (not seen.insert(c.name).second)
            throw std::invalid_argument("schema '" + name + "' has duplicate column '" + c.name + "'");
    }
}

bool conforms(const TableSchema &schema, const Row &row)
{
    if (row.size() != schema.arity()) return false;
    for (std::size_t i = 0; i != row.size(); ++i) {
        const ValueKind k = row[i].kind();
        if (k == ValueKind::Null) continue;
        switch (schema.columns[i].kind) {
            case ColumnKind::Int:  if (k != ValueKind::Int) return false; break;
            case ColumnKind::Text: if (k != ValueKind::Text) return false; break;
            case ColumnKind::Date: if (k != ValueKind::Date) return false; break;
        }
    }
    return true;
}


/*----- Item references ----------------------------------------------------------------------------------------------*/

ItemRef ItemRef::parse(std::string_view text)
{
    const auto first = text.find('/');
    if (first == std::string_view::npos or first == 0) throw ParseError("malformed item reference '" + std::string(text) + "'", 0);
    const auto second = text.find('/', first + 1);
    if (second == std::string_view::npos or second == first + 1)
        throw ParseError("malformed item reference '" + std::string(text) + "'", first + 1);
    if (second + 1 >= text.size())
        throw ParseError("malformed item reference '" + std::string(text) + "'", second + 1);
    return ItemRef{ std::string(text.substr(0, first)), std::string(text.substr(first + 1, second - first - 1)),
                    std::string(text.substr(second + 1)) };
}

}
