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
#include "vdc/query.hpp"
#include <json.hpp>
#include <algorithm>
#include <unordered_map>


namespace vdc {

namespace {

using WarningSink = std::vector<CoercionError>;

struct Operator
{
    virtual ~Operator() = default;
    virtual bool next(Row &out) = 0;
};

std::unique_ptr<Operator> build(const PlanNode &node, WarningSink &sink);

std::vector<BoundPredicate> bind_all(const std::vector<Predicate> &preds, const TableSchema &schema)
{
    std::vector<BoundPredicate> out;
    for (const auto &p : preds) {
        auto b = BoundPredicate::bind(p, [&](const std::string &c) { return schema.find(c); });
        if (not b) throw ExecutionError("predicate " + to_string(p) + " does not match its input");
        out.push_back(std::move(*b));
    }
    return out;
}

class ScanOp : public Operator
{
    const PlanNode &node_;
    const PlannedRelation &rel_;
    WarningSink &sink_;
    std::unique_ptr<RowStream> stream_;
    std::vector<BoundPredicate> local_;
    std::vector<std::vector<std::string>> local_columns_;
    Row raw_;

    public:
    ScanOp(const PlanNode &node, WarningSink &sink) : node_(node), rel_(*node.relation), sink_(sink) {
        local_ = bind_all(rel_.local_predicates, rel_.view->schema);
        for (const auto &p : rel_.local_predicates) local_columns_.push_back(referenced_columns(p));
    }

    bool next(Row &out) override {
        if (not stream_) {
            const auto &base = rel_.view->definition.base[node_.base_index];
            stream_ = rel_.sources[node_.base_index]->scan_table(base.table, node_.pushed);
        }
        while (stream_->next(raw_)) {
            MediatedRow m = rel_.view->apply(node_.base_index, raw_);
            if (not m.errored_columns.empty()) {
                const auto &schema = rel_.view->schema;
                bool emit = true;
                for (std::size_t i = 0; emit and i != local_.size(); ++i) {
                    const bool touches = std::any_of(local_columns_[i].begin(), local_columns_[i].end(),
                        [&](const std::string &c) {
                            const std::size_t pos = *schema.find(c);
                            return std::find(m.errored_columns.begin(), m.errored_columns.end(), pos)
                                   != m.errored_columns.end();
                        });
                    if (not touches) emit = local_[i].eval(m.values);
                }
                if (emit)
                    for (auto &e : m.errors) sink_.push_back(std::move(e));
                const bool used = std::any_of(m.errored_columns.begin(), m.errored_columns.end(),
                                              [&](std::size_t c) { return rel_.referenced[c]; });
                if (used) continue;
            }
            out = std::move(m.values);
            return true;
        }
        return false;
    }
};

class UnionAllOp : public Operator
{
    std::vector<std::unique_ptr<Operator>> children_;
    std::size_t current_ = 0;

    public:
    UnionAllOp(const PlanNode &node, WarningSink &sink) {
        for (const auto &c : node.children) children_.push_back(build(*c, sink));
    }

    bool next(Row &out) override {
        while (current_ < children_.size()) {
            if (children_[current_]->next(out)) return true;
            ++current_;
        }
        return false;
    }
};

class FilterOp : public Operator
{
    std::unique_ptr<Operator> child_;
    std::vector<BoundPredicate> preds_;

    public:
    FilterOp(const PlanNode &node, WarningSink &sink)
        : child_(build(*node.children[0], sink)), preds_(bind_all(node.predicates, node.children[0]->schema))
    { }

    bool next(Row &out) override {
        while (child_->next(out))
            if (eval_all(preds_, out)) return true;
        return false;
    }
};

std::string hash_key(const Value &v)
{
    switch (v.kind()) {
        case ValueKind::Null: return {};
        case ValueKind::Int:  return 'i' + std::to_string(v.as_int());
        case ValueKind::Text: return 't' + v.as_text();
        case ValueKind::Date:
            return 'd' + std::to_string(v.as_date().earliest_day) + ':' + std::to_string(v.as_date().latest_day);
    }
    return {};
}

Row concat(const Row &a, const Row &b)
{
    Row r;
    r.reserve(a.size() + b.size());
    r.insert(r.end(), a.begin(), a.end());
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

class HashJoinOp : public Operator
{
    const PlanNode &node_;
    std::unique_ptr<Operator> left_, right_;
    std::unordered_map<std::string, std::vector<Row>> table_;
    bool built_ = false;
    Row probe_;
    const std::vector<Row> *matches_ = nullptr;
    std::size_t match_ = 0;

    void build_table() {
        std::size_t n = 0;
        Row r;
        while (right_->next(r)) {
            const Value &k = r[node_.right_key];
            if (k.is_null()) continue;
            if (++n > node_.max_hash_rows)
                throw ExecutionError("hash join build side exceeds " + std::to_string(node_.max_hash_rows) + " rows");
            table_[hash_key(k)].push_back(std::move(r));
        }
        built_ = true;
    }

    public:
    HashJoinOp(const PlanNode &node, WarningSink &sink)
        : node_(node), left_(build(*node.children[0], sink)), right_(build(*node.children[1], sink))
    { }

    bool next(Row &out) override {
        if (not built_) build_table();
        for (;;) {
            if (matches_ and match_ < matches_->size()) {
                out = concat(probe_, (*matches_)[match_++]);
                return true;
            }
            matches_ = nullptr;
            if (not left_->next(probe_)) return false;
            const Value &k = probe_[node_.left_key];
            if (k.is_null()) continue;
            auto it = table_.find(hash_key(k));
            if (it == table_.end()) continue;
            matches_ = &it->second;
            match_ = 0;
        }
    }
};

class NestedLoopJoinOp : public Operator
{
    const PlanNode &node_;
    std::unique_ptr<Operator> left_, right_;
    std::vector<Row> inner_;
    bool built_ = false;
    bool have_outer_ = false;
    Row outer_;
    std::size_t pos_ = 0;

    public:
    NestedLoopJoinOp(const PlanNode &node, WarningSink &sink)
        : node_(node), left_(build(*node.children[0], sink)), right_(build(*node.children[1], sink))
    { }

    bool next(Row &out) override {
        if (not built_) {
            inner_ = collect_rows();
            built_ = true;
        }
        for (;;) {
            if (not have_outer_) {
                if (not left_->next(outer_)) return false;
                have_outer_ = true;
                pos_ = 0;
            }
            const Value &k = outer_[node_.left_key];
            while (not k.is_null() and pos_ < inner_.size()) {
                const Row &r = inner_[pos_++];
                const Value &rk = r[node_.right_key];
                if (not rk.is_null() and compare_values(k, rk) == 0) {
                    out = concat(outer_, r);
                    return true;
                }
            }
            have_outer_ = false;
        }
    }

    private:
    std::vector<Row> collect_rows() {
        std::vector<Row> rows;
        Row r;
        while (right_->next(r)) rows.push_back(r);
        return rows;
    }
};

class ProjectOp : public Operator
{
    const PlanNode &node_;
    std::unique_ptr<Operator> child_;
    Row in_;

    public:
    ProjectOp(const PlanNode &node, WarningSink &sink) : node_(node), child_(build(*node.children[0], sink)) { }

    bool next(Row &out) override {
        if (not child_->next(in_)) return false;
        out.clear();
        out.reserve(node_.columns.size());
        for (std::size_t c : node_.columns) out.push_back(in_[c]);
        return true;
    }
};

class SortOp : public Operator
{
    std::unique_ptr<Operator> child_;
    std::vector<Row> rows_;
    bool sorted_ = false;
    std::size_t pos_ = 0;

    public:
    SortOp(const PlanNode &node, WarningSink &sink) : child_(build(*node.children[0], sink)) { }

    bool next(Row &out) override {
        if (not sorted_) {
            Row r;
            while (child_->next(r)) rows_.push_back(std::move(r));
            std::sort(rows_.begin(), rows_.end(), [](const Row &a, const Row &b) { return compare_rows(a, b) < 0; });
            sorted_ = true;
        }
        if (pos_ >= rows_.size()) return false;
        out = std::move(rows_[pos_++]);
        return true;
    }
};

class LimitOp : public Operator
{
    std::unique_ptr<Operator> child_;
    std::int64_t remaining_;

    public:
    LimitOp(const PlanNode &node, WarningSink &sink) : child_(build(*node.children[0], sink)), remaining_(node.limit) { }

    bool next(Row &out) override {
        if (remaining_ <= 0 or not child_->next(out)) return false;
        --remaining_;
        return true;
    }
};

std::unique_ptr<Operator> build(const PlanNode &node, WarningSink &sink)
{
    switch (node.op) {
        case PlanOp::Scan:           return std::make_unique<ScanOp>(node, sink);
        case PlanOp::UnionAll:       return std::make_unique<UnionAllOp>(node, sink);
        case PlanOp::Filter:         return std::make_unique<FilterOp>(node, sink);
        case PlanOp::HashJoin:       return std::make_unique<HashJoinOp>(node, sink);
        case PlanOp::NestedLoopJoin: return std::make_unique<NestedLoopJoinOp>(node, sink);
        case PlanOp::Project:        return std::make_unique<ProjectOp>(node, sink);
        case PlanOp::Sort:           return std::make_unique<SortOp>(node, sink);
        case PlanOp::Limit:          return std::make_unique<LimitOp>(node, sink);
    }
    throw ExecutionError("unknown plan operator");
}

auto warning_key(const CoercionError &e)
{
    return std::make_tuple(std::cref(e.ref), std::cref(e.column), std::cref(e.text), std::string_view(e.what()));
}

}

void canonicalize_warnings(std::vector<CoercionError> &warnings)
{
    std::sort(warnings.begin(), warnings.end(),
              [](const CoercionError &a, const CoercionError &b) { return warning_key(a) < warning_key(b); });
    warnings.erase(std::unique(warnings.begin(), warnings.end(),
                               [](const CoercionError &a, const CoercionError &b) { return warning_key(a) == warning_key(b); }),
                   warnings.end());
}

bool ResultSet::operator==(const ResultSet &other) const
{
    if (schema != other.schema or rows.size() != other.rows.size() or warnings.size() != other.warnings.size())
        return false;
    for (std::size_t i = 0; i != rows.size(); ++i)
        if (compare_rows(rows[i], other.rows[i]) != 0) return false;
    for (std::size_t i = 0; i != warnings.size(); ++i)
        if (warning_key(warnings[i]) != warning_key(other.warnings[i])) return false;
    return true;
}

ResultSet execute_plan(const Plan &plan)
{
    if (not plan.root) throw ExecutionError("empty plan");
    ResultSet result;
    result.schema = plan.root->schema;
    auto root = build(*plan.root, result.warnings);
    Row r;
    while (root->next(r)) result.rows.push_back(std::move(r));
    canonicalize_warnings(result.warnings);
    return result;
}

std::string format_csv(const ResultSet &result)
{
    std::vector<std::string> fields;
    for (const auto &c : result.schema.columns) fields.push_back(c.name);
    std::string out = csv::format_record(fields);
    for (const auto &row : result.rows) {
        fields.clear();
        for (const auto &v : row) fields.push_back(v.to_display());
        out += csv::format_record(fields);
    }
    return out;
}

std::string format_json_lines(const ResultSet &result)
{
    std::string out;
    for (const auto &row : result.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c != row.size(); ++c) {
            const Value &v = row[c];
            auto &slot = obj[result.schema.columns[c].name];
            switch (v.kind()) {
                case ValueKind::Null: slot = nullptr; break;
                case ValueKind::Int:  slot = v.as_int(); break;
                case ValueKind::Text: slot = v.as_text(); break;
                case ValueKind::Date: slot = v.to_display(); break;
            }
        }
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}
