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

#include "vdc/model.hpp"
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>


namespace vdc {

enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge };

const char * to_string(CompareOp op);

struct ComparePredicate
{
    std::string column;
    CompareOp op = CompareOp::Eq;
    Value literal;
};

struct ContainsPredicate
{
    std::string column;
    std::string needle;
};

struct DateNearPredicate
{
    std::string column_a;
    std::string column_b;
    std::int64_t k_years = 0;
};

struct DateWithinPredicate
{
    std::string column;
    UncertainDate lo;
    UncertainDate hi;
};

/** A predicate over named columns.  Conjunctions are represented as lists of predicates. */
using Predicate = std::variant<ComparePredicate, ContainsPredicate, DateNearPredicate, DateWithinPredicate>;

/** Names of all columns a predicate reads, in order of appearance. */
std::vector<std::string> referenced_columns(const Predicate &p);

std::string to_string(const Predicate &p);


/** A predicate whose columns have been resolved to positions within a row. */
class BoundPredicate
{
    enum class Tag { Compare, Contains, DateNear, DateWithin };

    Tag tag_;
    std::size_t col_a_ = 0;
    std::size_t col_b_ = 0;
    CompareOp op_ = CompareOp::Eq;
    Value literal_;
    std::string folded_needle_;
    std::int64_t k_years_ = 0;
    UncertainDate lo_, hi_;

    explicit BoundPredicate(Tag tag) : tag_(tag) { }

    public:
    /** Resolves column names through `position_of`, which returns `std::nullopt` for unknown names. */
    static std::optional<BoundPredicate>
    bind(const Predicate &p, const std::function<std::optional<std::size_t>(const std::string&)> &position_of);

    /** Null never satisfies a predicate. */
    bool eval(const Row &row) const;
};

/** True iff `row` satisfies every predicate of the conjunction. */
bool eval_all(std::span<const BoundPredicate> conjunction, const Row &row);

}
