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
#include "vdc/model.hpp"
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>


namespace vdc {

/*======================================================================================================================
 * Translation tables
 *====================================================================================================================*/

/** A one-directional term map (a "join table").  Lookup is case-insensitive: keys are compared after NFC and simple
 * case folding. */
class TranslationTable
{
    std::string id_;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::unordered_map<std::string, std::size_t> by_folded_source_;

    public:
    TranslationTable() = default;

    /** Throws `LoadError` on a folded duplicate source term. */
    TranslationTable(std::string id, std::vector<std::pair<std::string, std::string>> entries);

    const std::string & id() const { return id_; }
    const std::vector<std::pair<std::string, std::string>> & entries() const { return entries_; }

    std::optional<std::string> lookup(std::string_view term) const;

    bool operator==(const TranslationTable &other) const { return id_ == other.id_ and entries_ == other.entries_; }
};

/** Parses a CSV with header `source_term,target_term`.  Throws `LoadError`. */
TranslationTable parse_translation_table(std::string id, std::string_view csv_text);
TranslationTable load_translation_table(std::string id, const std::filesystem::path &path);

/** The mapped term, or `term` unchanged when unmapped. */
std::string translate_term(const TranslationTable &table, std::string_view term);


/*======================================================================================================================
 * View definitions
 *====================================================================================================================*/

struct RelationName
{
    std::string source;
    std::string table;

    std::string to_string() const { return source + '.' + table; }
    auto operator<=>(const RelationName&) const = default;
};

struct RenameRule { std::string from; std::string to; bool operator==(const RenameRule&) const = default; };
struct CoerceRule { std::string column; bool operator==(const CoerceRule&) const = default; };
struct TranslateRule
{
    std::string column;
    std::string table;
    std::string to_lang = "en";
    bool operator==(const TranslateRule&) const = default;
};

using MappingRule = std::variant<RenameRule, CoerceRule, TranslateRule>;

/** A declarative view.  `base[0]` is the primary relation; the others are appended by UNION ALL. */
struct ViewDefinition
{
    std::string name;
    std::vector<RelationName> base;
    std::vector<MappingRule> rules;

    bool operator==(const ViewDefinition&) const = default;
};

/** Parses the line-based view grammar.  Structural problems throw `ParseError` with a line number; references are
 * checked later by `resolve_view()`. */
ViewDefinition parse_view_file(std::string_view text);

/** Canonical text form; `parse_view_file(format_view_file(v)) == v`. */
std::string format_view_file(const ViewDefinition &v);


/*======================================================================================================================
 * Resolution and row-level application
 *====================================================================================================================*/

/** A cell that could not be mediated.  Collected alongside results rather than thrown. */
struct CoercionError : Error
{
    CoercionError(ItemRef ref, std::string column, std::string text, const std::string &what)
        : Error(ErrorCode::Coercion, ref.to_string() + ": column '" + column + "': " + what)
        , ref(std::move(ref)), column(std::move(column)), text(std::move(text))
    { }

    ItemRef ref;
    std::string column;
    std::string text;
};

struct MediationContext
{
    /** Schema of a registered base relation; throws if unknown. */
    std::function<TableSchema(const RelationName&)> table_schema;
    /** Registered translation table, or null. */
    std::function<std::shared_ptr<const TranslationTable>(const std::string&)> translation;
    /** Treat unmapped non-empty terms as row-level errors instead of passing them through. */
    bool strict_translate = false;
};

/** Mediated form of one raw row. */
struct MediatedRow
{
    Row values;
    std::vector<std::size_t> errored_columns;  ///< positions in the view schema, ascending
    std::vector<CoercionError> errors;
};

class ResolvedView
{
    public:
    struct ColumnPlan
    {
        std::size_t raw_index = 0;
        bool coerce = false;
        std::shared_ptr<const TranslationTable> translate;
    };

    ViewDefinition definition;
    TableSchema schema;
    /** For each base relation, how to build every view column from a raw row of that relation. */
    std::vector<std::vector<ColumnPlan>> plans;
    bool strict_translate = false;

    /** Rename-only mapping from a view column to the raw column name in base `base`, or `std::nullopt` when the view
     * column is coerced or translated (and so not evaluable against raw rows). */
    std::optional<std::string> raw_name(std::size_t base, std::string_view column) const;

    MediatedRow apply(std::size_t base, const Row &raw) const;

    /** Raw schemas of the base relations, in base order. */
    std::vector<TableSchema> base_schemas;
};

/** Resolves names against the catalogue and checks every rule.  Throws `PlanError` describing the first problem. */
ResolvedView resolve_view(const ViewDefinition &v, const MediationContext &ctx);

inline TableSchema resolve_view_schema(const ViewDefinition &v, const MediationContext &ctx)
{
    return resolve_view(v, ctx).schema;
}

/** Applies the rules of `v` to a row of its primary relation. */
inline MediatedRow apply_rules_to_row(const ResolvedView &v, const Row &r) { return v.apply(0, r); }

}
