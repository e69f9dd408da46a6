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
#include "vdc/query.hpp"
#include <algorithm>
#include <set>


namespace vdc {

const char * to_string(PlanOp op)
{
    switch (op) {
        case PlanOp::Scan:           return "Scan";
        case PlanOp::Filter:         return "Filter";
        case PlanOp::Project:        return "Project";
        case PlanOp::NestedLoopJoin: return "NestedLoopJoin";
        case PlanOp::HashJoin:       return "HashJoin";
        case PlanOp::UnionAll:       return "UnionAll";
        case PlanOp::Sort:           return "Sort";
        case PlanOp::Limit:          return "Limit";
    }
    return "?";
}

namespace {

std::string conjunction(const std::vector<Predicate> &preds)
{
    std::string out;
    for (std::size_t i = 0; i != preds.size(); ++i) {
        if (i) out += " AND ";
        out += to_string(preds[i]);
    }
    return out;
}

}

std::string PlanNode::explain(int indent) const
{
    std::string line(static_cast<std::size_t>(indent) * 2, ' ');
    line += to_string(op);
    switch (op) {
        case PlanOp::Scan: {
            const RelationName &base = relation->view->definition.base[base_index];
            line += ' ' + base.to_string() + " as " + relation->binding;
            if (not pushed.empty()) line += " [pushed: " + conjunction(pushed) + ']';
            break;
        }
        case PlanOp::Filter:
            line += " [" + conjunction(predicates) + ']';
            break;
        case PlanOp::NestedLoopJoin:
        case PlanOp::HashJoin:
            line += " [" + children[0]->schema.columns[left_key].name + " = "
                    + children[1]->schema.columns[right_key].name + ']';
            break;
        case PlanOp::Project: {
            line += " [";
            for (std::size_t i = 0; i != schema.columns.size(); ++i) {
                if (i) line += ", ";
                line += schema.columns[i].name;
            }
            line += ']';
            break;
        }
        case PlanOp::Limit:
            line += ' ' + std::to_string(limit);
            break;
        case PlanOp::UnionAll:
        case PlanOp::Sort:
            break;
    }
    line += '\n';
    for (const auto &c : children) line += c->explain(indent + 1);
    return line;
}

namespace {

struct ColumnPos
{
    std::size_t relation;
    std::size_t column;
    bool operator<(const ColumnPos &o) const { return std::tie(relation, column) < std::tie(o.relation, o.column); }
};

struct ClassifiedPredicate
{
    Predicate local;       ///< over view column names; meaningful only when single-relation
    Predicate qualified;   ///< over joined-tuple column names
    std::set<std::size_t> relations;
};

class Planner
{
    const QueryAst &ast_;
    const RelationCatalog &catalog_;
    const PlanOptions &options_;
    MediationContext ctx_;
    std::vector<std::shared_ptr<PlannedRelation>> rels_;
    std::vector<std::size_t> estimates_;

    [[noreturn]] static void fail(const std::string &what) { throw PlanError(what); }

    std::vector<RelationName> bare_table_candidates(const std::string &name) {
        std::vector<RelationName> found;
        for (const auto &id : catalog_.source_ids()) {
            try {
                RelationName rn{ id, name };
                ctx_.table_schema(rn);
                found.push_back(std::move(rn));
            } catch (const Error&) {
            }
        }
        return found;
    }

    std::shared_ptr<PlannedRelation> resolve_relation(const RelationRef &ref) {
        ViewDefinition def;
        if (ref.source.empty()) {
            if (const ViewDefinition *v = catalog_.view(ref.name)) {
                def = *v;
            } else {
                auto candidates = bare_table_candidates(ref.name);
                if (candidates.empty()) fail("unknown relation '" + ref.name + "'");
                if (candidates.size() > 1)
                    fail("relation '" + ref.name + "' is ambiguous: qualify it as " + candidates[0].to_string()
                         + " or " + candidates[1].to_string());
                def.name = ref.name;
                def.base.push_back(candidates[0]);
            }
        } else {
            if (not catalog_.mode(ref.source)) fail("unknown source '" + ref.source + "'");
            def.name = ref.name;
            def.base.push_back(RelationName{ ref.source, ref.name });
        }

        for (const auto &base : def.base) {
            auto mode = catalog_.mode(base.source);
            if (not mode) fail("unknown source '" + base.source + "' in relation '" + ref.to_string() + "'");
            if (*mode == AccessMode::IndexOnly)
                throw AccessDenied("source '" + base.source + "' is index-only; its records cannot be queried");
        }

        auto rel = std::make_shared<PlannedRelation>();
        rel->binding = ref.binding_name();
        rel->view = std::make_shared<const ResolvedView>(resolve_view(def, ctx_));
        for (const auto &base : def.base) rel->sources.push_back(catalog_.open(base.source));
        rel->referenced.assign(rel->view->schema.arity(), false);
        return rel;
    }

    ColumnPos resolve_column(const ColumnRef &ref, std::size_t scope) const {
        if (not ref.qualifier.empty()) {
            for (std::size_t r = 0; r != scope; ++r) {
                if (rels_[r]->binding != ref.qualifier) continue;
                auto pos = rels_[r]->view->schema.find(ref.name);
                if (not pos) fail("unknown column '" + ref.to_string() + "'");
                return { r, *pos };
            }
            fail("unknown relation '" + ref.qualifier + "' in column '" + ref.to_string() + "'");
        }
        std::optional<ColumnPos> found;
        for (std::size_t r = 0; r != scope; ++r) {
            if (auto pos = rels_[r]->view->schema.find(ref.name)) {
                if (found) fail("column '" + ref.name + "' is ambiguous; qualify it with a relation name");
                found = ColumnPos{ r, *pos };
            }
        }
        if (not found) fail("unknown column '" + ref.name + "'");
        return *found;
    }

    const ColumnDescriptor & descriptor(ColumnPos p) const { return rels_[p.relation]->view->schema.columns[p.column]; }

    std::string qualified(ColumnPos p) const { return rels_[p.relation]->binding + '.' + descriptor(p).name; }

    void mark(ColumnPos p) { rels_[p.relation]->referenced[p.column] = true; }

    Value literal_for(const ColumnRef &ref, const ColumnDescriptor &col, const Literal &lit, CompareOp op) const {
        switch (col.kind) {
            case ColumnKind::Int:
                if (lit.kind != Literal::Kind::Int)
                    fail("column '" + ref.to_string() + "' is int but is compared with a string");
                return Value::integer(lit.int_value);
            case ColumnKind::Text:
                if (lit.kind != Literal::Kind::String)
                    fail("column '" + ref.to_string() + "' is text but is compared with an integer");
                return Value::text(lit.string_value);
            case ColumnKind::Date: {
                if (lit.kind != Literal::Kind::String)
                    fail("column '" + ref.to_string() + "' is a date but is compared with an integer");
                if (op != CompareOp::Eq and op != CompareOp::Ne)
                    fail("column '" + ref.to_string() + "' is a date; use DATE_WITHIN or DATE_NEAR instead of "
                         + to_string(op));
                auto d = try_parse_uncertain_date(lit.string_value);
                if (not d) fail("'" + lit.string_value + "' is not a valid date for column '" + ref.to_string() + "'");
                return Value::date(*d);
            }
        }
        fail("unsupported column kind");
    }

    UncertainDate date_literal(const Literal &lit, const char *what) const {
        if (lit.kind != Literal::Kind::String) fail(std::string("DATE_WITHIN ") + what + " bound must be a quoted date");
        auto d = try_parse_uncertain_date(lit.string_value);
        if (not d) fail("'" + lit.string_value + "' is not a valid date");
        return *d;
    }

    void require_date(const ColumnRef &ref, ColumnPos p, const char *fn) const {
        if (descriptor(p).kind != ColumnKind::Date)
            fail(std::string(fn) + " requires a date column, but '" + ref.to_string() + "' is "
                 + to_string(descriptor(p).kind));
    }

    ClassifiedPredicate classify(const PredicateAst &ast) {
        const std::size_t scope = rels_.size();
        ClassifiedPredicate out;
        std::visit([&](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CompareAst>) {
                const ColumnPos c = resolve_column(p.column, scope);
                Value lit = literal_for(p.column, descriptor(c), p.literal, p.op);
                out.local = ComparePredicate{ descriptor(c).name, p.op, lit };
                out.qualified = ComparePredicate{ qualified(c), p.op, lit };
                out.relations = { c.relation };
                mark(c);
            } else if constexpr (std::is_same_v<T, ContainsAst>) {
                const ColumnPos c = resolve_column(p.column, scope);
                if (descriptor(c).kind != ColumnKind::Text)
                    fail("CONTAINS requires a text column, but '" + p.column.to_string() + "' is "
                         + to_string(descriptor(c).kind));
                out.local = ContainsPredicate{ descriptor(c).name, p.needle };
                out.qualified = ContainsPredicate{ qualified(c), p.needle };
                out.relations = { c.relation };
                mark(c);
            } else if constexpr (std::is_same_v<T, DateNearAst>) {
                const ColumnPos a = resolve_column(p.a, scope), b = resolve_column(p.b, scope);
                require_date(p.a, a, "DATE_NEAR");
                require_date(p.b, b, "DATE_NEAR");
                if (p.k_years < 0) fail("DATE_NEAR year distance must not be negative");
                out.local = DateNearPredicate{ descriptor(a).name, descriptor(b).name, p.k_years };
                out.qualified = DateNearPredicate{ qualified(a), qualified(b), p.k_years };
                out.relations = { a.relation, b.relation };
                mark(a);
                mark(b);
            } else {
                const ColumnPos c = resolve_column(p.column, scope);
                require_date(p.column, c, "DATE_WITHIN");
                const UncertainDate lo = date_literal(p.lo, "lower"), hi = date_literal(p.hi, "upper");
                if (lo.earliest_day > hi.latest_day) fail("DATE_WITHIN lower bound lies after upper bound");
                out.local = DateWithinPredicate{ descriptor(c).name, lo, hi };
                out.qualified = DateWithinPredicate{ qualified(c), lo, hi };
                out.relations = { c.relation };
                mark(c);
            }
        }, ast);
        return out;
    }

    /** Whether `p` (over view names) can be evaluated by every base scan of `rel`, and its raw-name rewrites. */
    std::optional<std::vector<Predicate>> pushable(const PlannedRelation &rel, const Predicate &p) const {
        const bool is_contains = std::holds_alternative<ContainsPredicate>(p);
        if (not std::holds_alternative<ComparePredicate>(p) and not is_contains) return std::nullopt;
        std::vector<Predicate> per_base;
        for (std::size_t b = 0; b != rel.sources.size(); ++b) {
            if (is_contains and not rel.sources[b]->supports_contains()) return std::nullopt;
            Predicate raw = p;
            std::string &col = is_contains ? std::get<ContainsPredicate>(raw).column : std::get<ComparePredicate>(raw).column;
            auto name = rel.view->raw_name(b, col);
            if (not name) return std::nullopt;
            col = *name;
            per_base.push_back(std::move(raw));
        }
        return per_base;
    }

    TableSchema qualified_schema(const PlannedRelation &rel) const {
        TableSchema s;
        s.name = rel.binding;
        for (const auto &c : rel.view->schema.columns) s.columns.push_back({ rel.binding + '.' + c.name, c.kind, c.date_text });
        return s;
    }

    std::unique_ptr<PlanNode> relation_subtree(const std::shared_ptr<const PlannedRelation> &rel) {
        const TableSchema schema = qualified_schema(*rel);
        std::vector<Predicate> central;
        std::vector<std::vector<Predicate>> pushed(rel->sources.size());
        for (const auto &p : rel->local_predicates) {
            std::optional<std::vector<Predicate>> raw;
            if (options_.pushdown) raw = pushable(*rel, p);
            if (raw) {
                for (std::size_t b = 0; b != raw->size(); ++b) pushed[b].push_back(std::move((*raw)[b]));
            } else {
                central.push_back(p);
            }
        }

        std::vector<std::unique_ptr<PlanNode>> scans;
        for (std::size_t b = 0; b != rel->sources.size(); ++b) {
            auto scan = std::make_unique<PlanNode>();
            scan->op = PlanOp::Scan;
            scan->schema = schema;
            scan->relation = rel;
            scan->base_index = b;
            scan->pushed = std::move(pushed[b]);
            scans.push_back(std::move(scan));
        }
        std::unique_ptr<PlanNode> node;
        if (scans.size() == 1) {
            node = std::move(scans[0]);
        } else {
            node = std::make_unique<PlanNode>();
            node->op = PlanOp::UnionAll;
            node->schema = schema;
            node->children = std::move(scans);
        }
        if (not central.empty()) {
            auto filter = std::make_unique<PlanNode>();
            filter->op = PlanOp::Filter;
            filter->schema = schema;
            for (auto &p : central) {
                Predicate q = p;
                std::visit([&](auto &x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, DateNearPredicate>) {
                        x.column_a = rel->binding + '.' + x.column_a;
                        x.column_b = rel->binding + '.' + x.column_b;
                    } else {
                        x.column = rel->binding + '.' + x.column;
                    }
                }, q);
                filter->predicates.push_back(std::move(q));
            }
            filter->children.push_back(std::move(node));
            node = std::move(filter);
        }
        return node;
    }

    std::size_t estimate(const PlannedRelation &rel) const {
        std::size_t n = 0;
        for (std::size_t b = 0; b != rel.sources.size(); ++b)
            n += rel.sources[b]->estimate_rows(rel.view->definition.base[b].table);
        return n;
    }

    public:
    Planner(const QueryAst &ast, const RelationCatalog &catalog, const PlanOptions &options)
        : ast_(ast), catalog_(catalog), options_(options), ctx_(catalog.mediation_context())
    { }

    Plan plan() {
        /* Relations, in written order. */
        std::vector<const RelationRef*> refs{ &ast_.from };
        for (const auto &j : ast_.joins) refs.push_back(&j.relation);
        std::set<std::string> bindings;
        for (const RelationRef *ref : refs) {
            if (not bindings.insert(ref->binding_name()).second)
                fail("relation name '" + ref->binding_name() + "' used twice; give one an alias");
            rels_.push_back(resolve_relation(*ref));
        }
        std::size_t offset = 0;
        for (auto &rel : rels_) {
            rel->tuple_offset = offset;
            offset += rel->view->schema.arity();
        }

        /* Join keys. */
        struct Key { ColumnPos left, right; };
        std::vector<Key> keys;
        for (std::size_t j = 0; j != ast_.joins.size(); ++j) {
            const std::size_t r = j + 1;
            const JoinClause &clause = ast_.joins[j];
            ColumnPos a = resolve_column(clause.left, r + 1), b = resolve_column(clause.right, r + 1);
            if (a.relation == r and b.relation != r) std::swap(a, b);
            if (b.relation != r or a.relation == r)
                fail("join condition '" + clause.left.to_string() + " = " + clause.right.to_string()
                     + "' must compare a column of '" + rels_[r]->binding + "' with an earlier relation");
            if (descriptor(a).kind != descriptor(b).kind)
                fail("join columns '" + qualified(a) + "' (" + to_string(descriptor(a).kind) + ") and '" + qualified(b)
                     + "' (" + to_string(descriptor(b).kind) + ") have different kinds");
            mark(a);
            mark(b);
            keys.push_back({ a, b });
        }

        /* Predicates. */
        std::vector<ClassifiedPredicate> cross;
        for (const auto &p : ast_.where) {
            ClassifiedPredicate c = classify(p);
            if (c.relations.size() == 1) rels_[*c.relations.begin()]->local_predicates.push_back(std::move(c.local));
            else cross.push_back(std::move(c));
        }

        /* Output columns. */
        std::vector<std::size_t> out_columns;
        TableSchema out_schema;
        out_schema.name = "result";
        if (ast_.select_all) {
            for (std::size_t r = 0; r != rels_.size(); ++r) {
                for (std::size_t c = 0; c != rels_[r]->view->schema.arity(); ++c) {
                    ColumnDescriptor d = rels_[r]->view->schema.columns[c];
                    if (rels_.size() > 1) d.name = qualified({ r, c });
                    out_schema.columns.push_back(d);
                    out_columns.push_back(rels_[r]->tuple_offset + c);
                    rels_[r]->referenced[c] = true;
                }
            }
        } else {
            for (const auto &ref : ast_.select) {
                const ColumnPos p = resolve_column(ref, rels_.size());
                ColumnDescriptor d = descriptor(p);
                d.name = ref.to_string();
                out_schema.columns.push_back(d);
                out_columns.push_back(rels_[p.relation]->tuple_offset + p.column);
                mark(p);
            }
        }
        {
            std::set<std::string> names;
            for (const auto &c : out_schema.columns)
                if (not names.insert(c.name).second) fail("output column '" + c.name + "' selected twice");
        }

        /* Operator tree: left-deep joins in written order. */
        Plan plan;
        for (const auto &rel : rels_) plan.relations.push_back(rel);
        for (const auto &rel : rels_) estimates_.push_back(estimate(*rel));

        std::unique_ptr<PlanNode> node = relation_subtree(rels_[0]);
        std::size_t left_estimate = estimates_[0];
        std::vector<bool> applied(cross.size(), false);
        for (std::size_t j = 0; j != keys.size(); ++j) {
            const std::size_t r = j + 1;
            auto right = relation_subtree(rels_[r]);
            auto join = std::make_unique<PlanNode>();
            const bool small = std::min(left_estimate, estimates_[r]) < options_.nested_loop_threshold;
            join->op = small ? PlanOp::NestedLoopJoin : PlanOp::HashJoin;
            join->left_key = rels_[keys[j].left.relation]->tuple_offset + keys[j].left.column;
            join->right_key = keys[j].right.column;
            join->max_hash_rows = options_.max_hash_rows;
            join->schema = node->schema;
            join->schema.name = "join";
            for (const auto &c : right->schema.columns) join->schema.columns.push_back(c);
            join->children.push_back(std::move(node));
            join->children.push_back(std::move(right));
            node = std::move(join);
            left_estimate = std::max(left_estimate, estimates_[r]);

            std::vector<Predicate> ready;
            for (std::size_t i = 0; i != cross.size(); ++i) {
                if (applied[i] or *cross[i].relations.rbegin() > r) continue;
                applied[i] = true;
                ready.push_back(cross[i].qualified);
            }
            if (not ready.empty()) {
                auto filter = std::make_unique<PlanNode>();
                filter->op = PlanOp::Filter;
                filter->schema = node->schema;
                filter->predicates = std::move(ready);
                filter->children.push_back(std::move(node));
                node = std::move(filter);
            }
        }

        auto project = std::make_unique<PlanNode>();
        project->op = PlanOp::Project;
        project->schema = out_schema;
        project->columns = out_columns;
        project->children.push_back(std::move(node));

        auto sort = std::make_unique<PlanNode>();
        sort->op = PlanOp::Sort;
        sort->schema = out_schema;
        sort->children.push_back(std::move(project));
        node = std::move(sort);

        if (ast_.limit) {
            auto limit = std::make_unique<PlanNode>();
            limit->op = PlanOp::Limit;
            limit->schema = out_schema;
            limit->limit = *ast_.limit;
            limit->children.push_back(std::move(node));
            node = std::move(limit);
        }
        plan.root = std::move(node);
        return plan;
    }
};

}

Plan plan_query(const QueryAst &ast, const RelationCatalog &catalog, const PlanOptions &options)
{
    return Planner(ast, catalog, options).plan();
}

}
