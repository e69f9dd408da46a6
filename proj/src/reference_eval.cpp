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
#include "vdc/unicode.hpp"
#include <algorithm>
#include <functional>
#include <set>


namespace vdc {

namespace {

struct Rel
{
    std::string binding;
    ResolvedView view;
    std::vector<MediatedRow> rows;
    std::vector<bool> used;
};

struct Col
{
    std::size_t rel;
    std::size_t pos;
};

using Tuple = std::vector<const Row*>;

struct Condition
{
    std::set<std::size_t> rels;
    std::set<std::pair<std::size_t, std::size_t>> cols;
    std::function<bool(const Tuple&)> test;
};

bool ordered(std::strong_ordering c, CompareOp op)
{
    switch (op) {
        case CompareOp::Eq: return c == 0;
        case CompareOp::Ne: return c != 0;
        case CompareOp::Lt: return c < 0;
        case CompareOp::Gt: return c > 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Ge: return c >= 0;
    }
    return false;
}

class Evaluator
{
    const QueryAst &q_;
    const RelationCatalog &cat_;
    MediationContext ctx_;
    std::vector<Rel> rels_;

    ViewDefinition definition_for(const RelationRef &ref) {
        if (not ref.source.empty()) {
            if (not cat_.mode(ref.source)) throw PlanError("no source named '" + ref.source + "'");
            return ViewDefinition{ ref.name, { RelationName{ ref.source, ref.name } }, {} };
        }
        if (const ViewDefinition *v = cat_.view(ref.name)) return *v;
        std::vector<std::string> owners;
        for (const auto &id : cat_.source_ids()) {
            try {
                ctx_.table_schema(RelationName{ id, ref.name });
                owners.push_back(id);
            } catch (const Error&) {
            }
        }
        if (owners.size() != 1) throw PlanError("cannot resolve relation '" + ref.name + "'");
        return ViewDefinition{ ref.name, { RelationName{ owners[0], ref.name } }, {} };
    }

    void load(const RelationRef &ref) {
        ViewDefinition def = definition_for(ref);
        for (const auto &b : def.base) {
            const auto mode = cat_.mode(b.source);
            if (not mode) throw PlanError("no source named '" + b.source + "'");
            if (*mode == AccessMode::IndexOnly) throw AccessDenied("'" + b.source + "' is index-only");
        }
        for (const auto &r : rels_)
            if (r.binding == ref.binding_name()) throw PlanError("duplicate relation name '" + r.binding + "'");
        Rel rel{ ref.binding_name(), resolve_view(def, ctx_), {}, {} };
        rel.used.assign(rel.view.schema.columns.size(), false);
        for (std::size_t b = 0; b != def.base.size(); ++b) {
            auto src = cat_.open(def.base[b].source);
            auto stream = src->scan_table(def.base[b].table);
            Row raw;
            while (stream->next(raw)) rel.rows.push_back(rel.view.apply(b, raw));
        }
        rels_.push_back(std::move(rel));
    }

    Col lookup(const ColumnRef &c, std::size_t visible) {
        std::vector<Col> hits;
        for (std::size_t r = 0; r != visible; ++r) {
            if (not c.qualifier.empty() and rels_[r].binding != c.qualifier) continue;
            const auto &cols = rels_[r].view.schema.columns;
            for (std::size_t i = 0; i != cols.size(); ++i)
                if (cols[i].name == c.name) hits.push_back({ r, i });
        }
        if (hits.size() != 1) throw PlanError("cannot resolve column '" + c.to_string() + "'");
        rels_[hits[0].rel].used[hits[0].pos] = true;
        return hits[0];
    }

    ColumnKind kind(Col c) const { return rels_[c.rel].view.schema.columns[c.pos].kind; }

    static const Value & cell(const Tuple &t, Col c) { return (*t[c.rel])[c.pos]; }

    UncertainDate date_or_fail(const Literal &l) const {
        if (l.kind != Literal::Kind::String) throw PlanError("date literal must be a string");
        auto d = try_parse_uncertain_date(l.string_value);
        if (not d) throw PlanError("bad date literal '" + l.string_value + "'");
        return *d;
    }

    Condition predicate(const PredicateAst &ast) {
        Condition cond;
        auto note = [&](Col c) { cond.rels.insert(c.rel); cond.cols.insert({ c.rel, c.pos }); };
        if (const auto *p = std::get_if<CompareAst>(&ast)) {
            const Col c = lookup(p->column, rels_.size());
            note(c);
            Value lit;
            const ColumnKind k = kind(c);
            if (k == ColumnKind::Int and p->literal.kind == Literal::Kind::Int) {
                lit = Value::integer(p->literal.int_value);
            } else if (k == ColumnKind::Text and p->literal.kind == Literal::Kind::String) {
                lit = Value::text(p->literal.string_value);
            } else if (k == ColumnKind::Date and (p->op == CompareOp::Eq or p->op == CompareOp::Ne)) {
                lit = Value::date(date_or_fail(p->literal));
            } else {
                throw PlanError("literal does not suit column '" + p->column.to_string() + "'");
            }
            const CompareOp op = p->op;
            cond.test = [c, op, lit](const Tuple &t) {
                const Value &v = cell(t, c);
                return not v.is_null() and ordered(compare_values(v, lit), op);
            };
        } else if (const auto *p = std::get_if<ContainsAst>(&ast)) {
            const Col c = lookup(p->column, rels_.size());
            note(c);
            if (kind(c) != ColumnKind::Text) throw PlanError("CONTAINS needs text");
            const std::string needle = unicode::fold(p->needle);
            cond.test = [c, needle](const Tuple &t) {
                const Value &v = cell(t, c);
                return not v.is_null() and unicode::fold(v.as_text()).find(needle) != std::string::npos;
            };
        } else if (const auto *p = std::get_if<DateNearAst>(&ast)) {
            const Col a = lookup(p->a, rels_.size()), b = lookup(p->b, rels_.size());
            note(a);
            note(b);
            if (kind(a) != ColumnKind::Date or kind(b) != ColumnKind::Date or p->k_years < 0)
                throw PlanError("DATE_NEAR needs two date columns and a non-negative distance");
            const std::int64_t limit = p->k_years * 365;
            cond.test = [a, b, limit](const Tuple &t) {
                const Value &x = cell(t, a), &y = cell(t, b);
                if (x.is_null() or y.is_null()) return false;
                const auto &dx = x.as_date(), &dy = y.as_date();
                std::int64_t gap = 0;
                if (dx.latest_day < dy.earliest_day) gap = dy.earliest_day - dx.latest_day;
                else if (dy.latest_day < dx.earliest_day) gap = dx.earliest_day - dy.latest_day;
                return gap <= limit;
            };
        } else {
            const auto &w = std::get<DateWithinAst>(ast);
            const Col c = lookup(w.column, rels_.size());
            note(c);
            if (kind(c) != ColumnKind::Date) throw PlanError("DATE_WITHIN needs a date column");
            const UncertainDate lo = date_or_fail(w.lo), hi = date_or_fail(w.hi);
            if (lo.earliest_day > hi.latest_day) throw PlanError("empty DATE_WITHIN range");
            cond.test = [c, lo, hi](const Tuple &t) {
                const Value &v = cell(t, c);
                if (v.is_null()) return false;
                const auto &d = v.as_date();
                return d.earliest_day >= lo.earliest_day and d.latest_day <= hi.latest_day;
            };
        }
        return cond;
    }

    public:
    Evaluator(const QueryAst &q, const RelationCatalog &cat) : q_(q), cat_(cat), ctx_(cat.mediation_context()) { }

    ResultSet run() {
        load(q_.from);
        for (const auto &j : q_.joins) load(j.relation);
        const std::size_t n = rels_.size();

        std::vector<Condition> conds;
        for (std::size_t j = 0; j != q_.joins.size(); ++j) {
            const Col a = lookup(q_.joins[j].left, j + 2), b = lookup(q_.joins[j].right, j + 2);
            if ((a.rel == j + 1) == (b.rel == j + 1)) throw PlanError("join condition must link the new relation");
            if (kind(a) != kind(b)) throw PlanError("join columns differ in kind");
            Condition c;
            c.rels = { a.rel, b.rel };
            c.cols = { { a.rel, a.pos }, { b.rel, b.pos } };
            c.test = [a, b](const Tuple &t) {
                const Value &x = cell(t, a), &y = cell(t, b);
                return not x.is_null() and not y.is_null() and compare_values(x, y) == 0;
            };
            conds.push_back(std::move(c));
        }
        std::vector<Condition> where;
        for (const auto &p : q_.where) where.push_back(predicate(p));

        ResultSet out;
        out.schema.name = "result";
        std::vector<Col> outputs;
        if (q_.select_all) {
            for (std::size_t r = 0; r != n; ++r) {
                for (std::size_t i = 0; i != rels_[r].view.schema.columns.size(); ++i) {
                    ColumnDescriptor d = rels_[r].view.schema.columns[i];
                    if (n > 1) d.name = rels_[r].binding + "." + d.name;
                    out.schema.columns.push_back(d);
                    outputs.push_back({ r, i });
                    rels_[r].used[i] = true;
                }
            }
        } else {
            for (const auto &c : q_.select) {
                const Col col = lookup(c, n);
                ColumnDescriptor d = rels_[col.rel].view.schema.columns[col.pos];
                d.name = c.to_string();
                out.schema.columns.push_back(d);
                outputs.push_back(col);
            }
        }
        for (std::size_t i = 0; i != out.schema.columns.size(); ++i)
            for (std::size_t k = 0; k != i; ++k)
                if (out.schema.columns[i].name == out.schema.columns[k].name)
                    throw PlanError("duplicate output column '" + out.schema.columns[i].name + "'");

        /* Per relation: the rows that survive mediation, and the warnings they raise. */
        std::vector<std::vector<const Row*>> live(n);
        for (std::size_t r = 0; r != n; ++r) {
            for (const auto &m : rels_[r].rows) {
                bool keep = true, warn = true;
                for (std::size_t c : m.errored_columns) keep = keep and not rels_[r].used[c];
                if (not m.errored_columns.empty()) {
                    Tuple probe(n, nullptr);
                    probe[r] = &m.values;
                    for (const auto &w : where) {
                        if (w.rels != std::set<std::size_t>{ r }) continue;
                        bool touches = false;
                        for (std::size_t c : m.errored_columns) touches = touches or w.cols.count({ r, c });
                        if (not touches and not w.test(probe)) warn = false;
                    }
                    if (warn) out.warnings.insert(out.warnings.end(), m.errors.begin(), m.errors.end());
                }
                if (keep) live[r].push_back(&m.values);
            }
        }

        /* Conditions become checkable once the last relation they mention is bound. */
        std::vector<std::vector<const Condition*>> at(n);
        for (const auto &c : conds) at[*c.rels.rbegin()].push_back(&c);
        for (const auto &w : where) at[*w.rels.rbegin()].push_back(&w);

        Tuple t(n, nullptr);
        std::function<void(std::size_t)> descend = [&](std::size_t r) {
            if (r == n) {
                Row row;
                for (const Col &c : outputs) row.push_back(cell(t, c));
                out.rows.push_back(std::move(row));
                return;
            }
            for (const Row *row : live[r]) {
                t[r] = row;
                bool ok = true;
                for (const Condition *c : at[r]) ok = ok and c->test(t);
                if (ok) descend(r + 1);
            }
            t[r] = nullptr;
        };
        descend(0);

        std::stable_sort(out.rows.begin(), out.rows.end(), [](const Row &a, const Row &b) { return compare_rows(a, b) < 0; });
        if (q_.limit and out.rows.size() > static_cast<std::size_t>(*q_.limit)) out.rows.resize(static_cast<std::size_t>(*q_.limit));
        canonicalize_warnings(out.warnings);
        return out;
    }
};

}

ResultSet reference_eval(const QueryAst &ast, const RelationCatalog &catalog)
{
    return Evaluator(ast, catalog).run();
}

}
