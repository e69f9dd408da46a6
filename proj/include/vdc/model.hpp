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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>


namespace vdc {

/*======================================================================================================================
 * Uncertain dates
 *
 * Day numbers count days in the proleptic Julian calendar with astronomical year numbering (year 0 is 1 BC).  Day 0 is
 * 1 January of year 1; every year divisible by 4 is a leap year, including year 0 and negative multiples of 4.
 *====================================================================================================================*/

using DayNumber = std::int64_t;

struct CivilDate
{
    std::int64_t year;
    int month; ///< 1..12
    int day;   ///< 1..31

    bool operator==(const CivilDate&) const = default;
};

bool is_leap_year(std::int64_t year);
int days_in_month(std::int64_t year, int month);
DayNumber day_number(const CivilDate &date);
CivilDate civil_from_day(DayNumber day);

/** An inclusive interval of days standing for a date that is known only up to some precision. */
struct UncertainDate
{
    DayNumber earliest_day = 0;
    DayNumber latest_day = 0;
    std::string source_text;

    DayNumber width_days() const { return latest_day - earliest_day; }

    /** Interval equality; `source_text` is provenance and does not participate. */
    bool operator==(const UncertainDate &other) const {
        return earliest_day == other.earliest_day and latest_day == other.latest_day;
    }
};

struct DateOptions
{
    /** Half-width added on both sides of a date prefixed with `ca.`. */
    DayNumber circa_widening_days = 3650;
};

/** Parses `Y-MM-DD`, `Y-MM`, `Y`, or `<bound>/<bound>`, optionally prefixed by `ca. `.  Throws `ParseError` carrying
 * the byte offset of the problem within `s`. */
UncertainDate parse_uncertain_date(std::string_view s, const DateOptions &options = {});

/** Like `parse_uncertain_date()` but returns `std::nullopt` instead of throwing. */
std::optional<UncertainDate> try_parse_uncertain_date(std::string_view s, const DateOptions &options = {});

/** Canonical `Y-MM-DD/Y-MM-DD` form. */
std::string format_uncertain_date(const UncertainDate &d);

/** 0 if the intervals intersect, else the distance in days between their nearest endpoints. */
DayNumber date_gap_days(const UncertainDate &a, const UncertainDate &b);
bool date_near(const UncertainDate &a, const UncertainDate &b, std::int64_t k_years);
bool date_within(const UncertainDate &a, const UncertainDate &lo, const UncertainDate &hi);

constexpr DayNumber kDaysPerYearForProximity = 365;


/*======================================================================================================================
 * Values
 *====================================================================================================================*/

enum class ValueKind { Null, Int, Text, Date };

const char * to_string(ValueKind kind);

/** A single cell.  Text is always held in NFC. */
class Value
{
    using variant_type = std::variant<std::monostate, std::int64_t, std::string, UncertainDate>;
    variant_type v_;

    explicit Value(variant_type v) : v_(std::move(v)) { }

    public:
    Value() = default;

    static Value null() { return Value(); }
    static Value integer(std::int64_t i) { return Value(variant_type(i)); }
    static Value text(std::string_view s);
    static Value date(UncertainDate d) { return Value(variant_type(std::move(d))); }

    ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }
    bool is_null() const { return kind() == ValueKind::Null; }

    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    const std::string & as_text() const { return std::get<std::string>(v_); }
    const UncertainDate & as_date() const { return std::get<UncertainDate>(v_); }

    /** Display form: "" for Null, decimal for Int, the text itself, or the canonical date form. */
    std::string to_display() const;

    bool operator==(const Value &other) const = default;
};

/** Total order used for canonical result ordering: Null < Int < Text < Date, then by content.  Never used to evaluate
 * predicates. */
std::strong_ordering compare_values(const Value &a, const Value &b);

using Row = std::vector<Value>;

/** Lexicographic `compare_values()` over whole rows. */
std::strong_ordering compare_rows(const Row &a, const Row &b);


/*======================================================================================================================
 * Schemas
 *====================================================================================================================*/

enum class ColumnKind { Int, Text, Date };

const char * to_string(ColumnKind kind);

struct ColumnDescriptor
{
    std::string name;
    ColumnKind kind = ColumnKind::Text;
    /** Stored as text but eligible for coercion to a date by a view. Only meaningful when `kind` is `Text`. */
    bool date_text = false;

    bool operator==(const ColumnDescriptor&) const = default;
};

struct TableSchema
{
    std::string name;
    std::vector<ColumnDescriptor> columns;

    std::size_t arity() const { return columns.size(); }
    std::optional<std::size_t> find(std::string_view column) const;

    /** Throws `std::invalid_argument` unless the schema has ≥1 column with non-empty unique names. */
    void validate() const;

    bool operator==(const TableSchema&) const = default;
};

/** True iff `row` has the schema's arity and each value is Null or of the column kind. */
bool conforms(const TableSchema &schema, const Row &row);


/*======================================================================================================================
 * Item references
 *====================================================================================================================*/

struct ItemRef
{
    std::string source_id;
    std::string container;
    std::string item_id;

    std::string to_string() const { return source_id + '/' + container + '/' + item_id; }

    /** Parses `source_id/container/item_id`; the item id is everything after the second slash.  Throws `ParseError`
     * if a part is empty. */
    static ItemRef parse(std::string_view text);

    auto operator<=>(const ItemRef&) const = default;
};

}
