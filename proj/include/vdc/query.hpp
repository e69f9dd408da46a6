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

#include "vdc/connectors.hpp"
#include "vdc/mediation.hpp"
#include "vdc/model.hpp"
#include "vdc/predicate.hpp"
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>


namespace vdc {

/*======================================================================================================================
 * Abstract syntax
 *====================================================================================================================*/

/** Half-open byte range into the query text. */
struct SourceSpan
{
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct ColumnRef
{
    std::string qualifier; ///< alias or relation name; empty when unqualified
    std::string name;
    SourceSpan span;

    std::string to_string() const { return qualifier.empty() ? name : qualifier + '.' + name; }
};

struct RelationRef
{
    std::string source;    ///< empty unless written as `source.table`
    std::string name;      ///< view name or table name
    std::string alias;     ///< empty when no alias was given
    SourceSpan span;

    std::string to_string() const { return source.empty() ? name : source + '.' + name; }
    /** The name other clauses use to qualify columns of this relation. */
    const std::string & binding_name() const { return alias.empty() ? name : alias; }
};

struct Literal
{
    enum class Kind { Int, String } kind = Kind::Int;
    std::int64_t int_value = 0;
    std::string string_value;
    SourceSpan span;
};

struct CompareAst { ColumnRef column; CompareOp op; Literal literal; };
struct ContainsAst { ColumnRef column; std::string needle; };
struct DateNearAst { ColumnRef a; ColumnRef b; std::int64_t k_years; };
struct DateWithinAst { ColumnRef column; Literal lo; Literal hi; };

using PredicateAst = std::variant<CompareAst, ContainsAst, DateNearAst, DateWithinAst>;

struct JoinClause
{
    RelationRef relation;
    ColumnRef left;
    ColumnRef right;
};

struct QueryAst
{
    bool select_all = false;
    std::vector<ColumnRef> select;
    RelationRef from;
    std::vector<JoinClause> joins;
    std::vector<PredicateAst> where; ///< conjunction
    std::optional<std::int64_t> limit;
    std::string text;
};

/** Parses `SELECT … FROM … [JOIN … ON a = b]* [WHERE p [AND p]*] [LIMIT n]`.  Keywords are case-insensitive.  Throws
 * `ParseError` with the byte offset of the offending token. */
QueryAst parse_query(std::string_view text);

/** Re-renders an AST as query text that parses back to the same AST (modulo spans). */
std::string format_query(const QueryAst &ast);


/*======================================================================================================================
 * Catalogue view used by planning and evaluation
 *====================================================================================================================*/

class RelationCatalog
{
    public:
    virtual ~RelationCatalog() = default;

    /** Opens the named source for reading.  Throws `NotFound`, `AccessDenied` or `SourceError`. */
    virtual std::shared_ptr<const Source> open(const std::string &source_id) const = 0;
    virtual std::optional<AccessMode> mode(const std::string &source_id) const = 0;
    virtual std::vector<std::string> source_ids() const = 0;
    virtual const ViewDefinition * view(const std::string &name) const = 0;
    virtual MediationContext mediation_context() const = 0;
};


/*======================================================================================================================
 * Plans
 *====================================================================================================================*/

struct PlanOptions
{
    bool pushdown = true;
    /** Joins where either side is estimated below this many rows use a nested-loop join. */
    std::size_t nested_loop_threshold = 64;
    /** Maximum number of rows a hash join may hold in its build table. */
    std::size_t max_hash_rows = 20'000'000;
};

enum class PlanOp { Scan, Filter, Project, NestedLoopJoin, HashJoin, UnionAll, Sort, Limit };

const char * to_string(PlanOp op);

/** Per-relation information shared by the scans of that relation. */
struct PlannedRelation
{
    std::string binding;                          ///< alias or name used to qualify columns
    std::shared_ptr<const ResolvedView> view;     ///< base tables are planned as trivial views
    std::vector<std::shared_ptr<const Source>> sources; ///< one per base
    std::size_t tuple_offset = 0;                 ///< position of this relation's first column in the joined tuple
    std::vector<bool> referenced;                 ///< per view column: read by the query
    std::vector<Predicate> local_predicates;      ///< all single-relation predicates, over view column names
};

struct PlanNode
{
    PlanOp op = PlanOp::Scan;
    std::vector<std::unique_ptr<PlanNode>> children;
    TableSchema schema; ///< output schema; for joins the qualified concatenation

    /* Scan */
    std::shared_ptr<const PlannedRelation> relation;
    std::size_t base_index = 0;
    std::vector<Predicate> pushed;    ///< over raw column names of the base table

    /* Filter: over output column names of the child */
    std::vector<Predicate> predicates;

    /* Joins: key positions within the left and right child schemas */
    std::size_t left_key = 0;
    std::size_t right_key = 0;
    std::size_t max_hash_rows = 0;

    /* Project */
    std::vector<std::size_t> columns;

    /* Limit */
    std::int64_t limit = 0;

    /** Indented one-node-per-line rendering. */
    std::string explain(int indent = 0) const;
};

struct Plan
{
    std::unique_ptr<PlanNode> root;
    std::vector<std::shared_ptr<const PlannedRelation>> relations;

    std::string explain() const { return root ? root->explain() : std::string(); }
};

/** Resolves, type-checks and plans a query.  Throws `PlanError` for unresolvable names and kind mismatches and
 * `AccessDenied` for relations over index-only sources. */
Plan plan_query(const QueryAst &ast, const RelationCatalog &catalog, const PlanOptions &options = {});


/*======================================================================================================================
 * Results
 *====================================================================================================================*/

struct ResultSet
{
    TableSchema schema;
    std::vector<Row> rows;                 ///< canonical order
    std::vector<CoercionError> warnings;   ///< sorted by item reference, then column; no duplicates

    bool operator==(const ResultSet &other) const;
};

ResultSet execute_plan(const Plan &plan);

/** Independent oracle: materializes every relation and evaluates by nested loops, without pushdown or hashing. */
ResultSet reference_eval(const QueryAst &ast, const RelationCatalog &catalog);

/** Sorts and deduplicates warnings into canonical order. */
void canonicalize_warnings(std::vector<CoercionError> &warnings);

/** CSV with a header row; Null prints as an empty field, dates in canonical form. */
std::string format_csv(const ResultSet &result);

/** One JSON object per row, keys in column order. */
std::string format_json_lines(const ResultSet &result);

}
