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


#include "vdc/predicate.hpp"

#include "vdc/unicode.hpp"
#include <stdexcept>


namespace vdc {

const char * to_string(CompareOp op)
{
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Gt: return ">";
        case CompareOp::Le: return "<=";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

namespace {

std::string quote(const std::string &s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out.push_back('\'');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string literal_to_string(const Value &v)
{
    switch (v.kind()) {
        case ValueKind::Null: return "NULL";
        case ValueKind::Int:  return std::to_string(v.as_int());
        case ValueKind::Text: return quote(v.as_text());
        case ValueKind::Date: return quote(format_uncertain_date(v.as_date()));
    }
    return "?";
}

template<typename T>
bool apply(CompareOp op, const T &a, const T &b)
{
    switch (op) {
        case CompareOp::Eq: return a == b;
        case CompareOp::Ne: return a != b;
        case CompareOp::Lt: return a < b;
        case CompareOp::Gt: return a > b;
        case CompareOp::Le: return a <= b;
        case CompareOp::Ge: return a >= b;
    }
    return false;
}

}

std::vector<std::string> referenced_columns(const Predicate &p)
{
    return std::visit([](const auto &x) -> std::vector<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DateNearPredicate>)
            return { x.column_a, x.column_b };
        else
            return { x.column };
    }, p);
}

std::string to_string(const Predicate &p)
{
    return std::visit([](const auto &x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ComparePredicate>)
            return x.column + ' ' + to_string(x.op) + ' ' + literal_to_string(x.literal);
        else if constexpr (std::is_same_v<T, ContainsPredicate>)
            return x.column + " CONTAINS " + quote(x.needle);
        else if constexpr (std::is_same_v<T, DateNearPredicate>)
            return "DATE_NEAR(" + x.column_a + ", " + x.column_b + ", " + std::to_string(x.k_years) + ')';
        else
            return "DATE_WITHIN(" + x.column + ", " + quote(format_uncertain_date(x.lo)) + ", "
                   + quote(format_uncertain_date(x.hi)) + ')';
    }, p);
}

std::optional<BoundPredicate>
BoundPredicate::bind(const Predicate &p, const std::function<std::optional<std::size_t>(const std::string&)> &position_of)
{
    if (auto *c = std::get_if<ComparePredicate>(&p)) {
        auto pos = position_of(c->column);
        if (not pos) return std::nullopt;
        BoundPredicate b(Tag::Compare);
        b.col_a_ = *pos;
        b.op_ = c->op;
        b.literal_ = c->literal;
        return b;
    }
    if (auto *c = std::get_if<ContainsPredicate>(&p)) {
        auto pos = position_of(c->column);
        if (not pos) return std::nullopt;
        BoundPredicate b(Tag::Contains);
        b.col_a_ = *pos;
        b.folded_needle_ = unicode::fold(c->needle);
        return b;
    }
    if (auto *c = std::get_if<DateNearPredicate>(&p)) {
        auto a = position_of(c->column_a), bb = position_of(c->column_b);
        if (not a or not bb) return std::nullopt;
        BoundPredicate b(Tag::DateNear);
        b.col_a_ = *a;
        b.col_b_ = *bb;
        b.k_years_ = c->k_years;
        return b;
    }
    const auto &c = std::get<DateWithinPredicate>(p);
    auto pos = position_of(c.column);
    if (not pos) return std::nullopt;
    BoundPredicate b(Tag::DateWithin);
    b.col_a_ = *pos;
    b.lo_ = c.lo;
    b.hi_ = c.hi;
    return b;
}

bool BoundPredicate::eval(const Row &row) const
{
    const Value &a = row[col_a_];
    if (a.is_null()) return false;
    switch (tag_) {
        case Tag::Compare:
            if (a.kind() != literal_.kind()) return false;
            switch (a.kind()) {
                case ValueKind::Int:  return apply(op_, a.as_int(), literal_.as_int());
                case ValueKind::Text: return apply(op_, a.as_text(), literal_.as_text());
                case ValueKind::Date:
                    if (op_ == CompareOp::Eq) return a.as_date() == literal_.as_date();
                    if (op_ == CompareOp::Ne) return not (a.as_date() == literal_.as_date());
                    throw std::logic_error("ordering comparison on dates");
                case ValueKind::Null: return false;
            }
            return false;

        case Tag::Contains:
            if (a.kind() != ValueKind::Text) return false;
            return unicode::fold(a.as_text()).find(folded_needle_) != std::string::npos;

        case Tag::DateNear: {
            const Value &b = row[col_b_];
            if (a.kind() != ValueKind::Date or b.kind() != ValueKind::Date) return false;
            return date_near(a.as_date(), b.as_date(), k_years_);
        }

        case Tag::DateWithin:
            if (a.kind() != ValueKind::Date) return false;
            return date_within(a.as_date(), lo_, hi_);
    }
    return false;
}

bool eval_all(std::span<const BoundPredicate> conjunction, const Row &row)
{
    for (const auto &p : conjunction)
        if (not p.eval(row)) return false;
    return true;
}

}
