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
#include "vdc/textindex.hpp"
#include "vdc/unicode.hpp"
#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>


namespace vdc {

const std::string * Document::field(std::string_view name) const
{
    for (const auto &[k, v] : fields)
        if (k == name) return &v;
    return nullptr;
}

const IndexedDoc * InvertedIndex::find(std::string_view doc_id) const
{
    auto it = std::lower_bound(docs.begin(), docs.end(), doc_id,
                               [](const IndexedDoc &d, std::string_view id) { return d.doc_id < id; });
    return it != docs.end() and it->doc_id == doc_id ? &*it : nullptr;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (not s.empty() and (s.front() == ' ' or s.front() == '\t')) s.remove_prefix(1);
    while (not s.empty() and (s.back() == ' ' or s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_degrees(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() or p != s.data() + s.size() or not std::isfinite(v)) return std::nullopt;
    return v;
}

}

IngestResult ingest_documents(const Source &source, const IngestRecipe &recipe)
{
    if (recipe.from.source != source.id())
        throw IngestError("recipe '" + recipe.name + "' reads from '" + recipe.from.source + "', not '" + source.id() + "'");
    if (not source.has_table(recipe.from.table))
        throw IngestError("recipe '" + recipe.name + "': source '" + source.id() + "' has no table '" + recipe.from.table + "'");
    const TableSchema &schema = source.table(recipe.from.table);
    validate_recipe(recipe, schema);

    const std::size_t id_pos = *schema.find(recipe.id_column);
    std::vector<std::pair<std::string, std::size_t>> field_pos;
    for (const auto &[name, column] : recipe.fields) field_pos.emplace_back(name, *schema.find(column));
    std::vector<std::size_t> body_pos;
    for (const auto &c : recipe.body_columns) body_pos.push_back(*schema.find(c));
    std::optional<std::pair<std::size_t, std::size_t>> geo_pos;
    if (recipe.geo) geo_pos.emplace(*schema.find(recipe.geo->first), *schema.find(recipe.geo->second));

    IngestResult out;
    std::unordered_map<std::string, std::size_t> seen;
    auto stream = source.scan_table(recipe.from.table);
    Row row;
    while (stream->next(row)) {
        Document d;
        d.ref = ItemRef{ source.id(), recipe.from.table, row[0].to_display() };
        d.doc_id = row[id_pos].to_display();
        if (d.doc_id.empty()) throw IngestError(d.ref.to_string() + ": empty id column '" + recipe.id_column + "'");
        auto [it, fresh] = seen.emplace(d.doc_id, out.documents.size());
        if (not fresh)
            throw IngestError("duplicate doc id '" + d.doc_id + "': " + out.documents[it->second].ref.to_string()
                              + " and " + d.ref.to_string());
        for (const auto &[name, pos] : field_pos) {
            std::string v = row[pos].to_display();
            if (not v.empty()) d.fields.emplace_back(name, std::move(v));
        }
        for (std::size_t pos : body_pos) {
            const std::string v = row[pos].to_display();
            if (v.empty()) continue;
            if (not d.body.empty()) d.body.push_back(' ');
            d.body += v;
        }
        if (geo_pos) {
            const std::string lat = row[geo_pos->first].to_display(), lon = row[geo_pos->second].to_display();
            if (not trim(lat).empty() or not trim(lon).empty()) {
                auto a = parse_degrees(lat), b = parse_degrees(lon);
                if (a and b and *a >= -90 and *a <= 90 and *b >= -180 and *b <= 180)
                    d.geo = GeoPoint{ *a, *b };
                else
                    out.warnings.push_back(d.ref.to_string() + ": invalid coordinates (lat '" + lat + "', lon '" + lon
                                           + "'); ingested without geo");
            }
        }
        out.documents.push_back(std::move(d));
    }
    return out;
}

InvertedIndex build_index(std::vector<Document> docs, const std::vector<std::string> &indexed_fields)
{
    std::sort(docs.begin(), docs.end(), [](const Document &a, const Document &b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 1; i < docs.size(); ++i)
        if (docs[i].doc_id == docs[i - 1].doc_id)
            throw IngestError("duplicate doc id '" + docs[i].doc_id + "': " + docs[i - 1].ref.to_string() + " and "
                              + docs[i].ref.to_string());

    InvertedIndex index;
    for (const auto &f : indexed_fields) index.fields[f];
    for (std::size_t ord = 0; ord != docs.size(); ++ord) {
        Document &d = docs[ord];
        for (auto &[field, postings] : index.fields) {
            const std::string *text = field == "body" ? &d.body : d.field(field);
            if (not text) continue;
            std::map<std::string, std::uint32_t> counts;
            for (auto &t : unicode::tokenize(*text)) ++counts[std::move(t)];
            for (auto &[term, tf] : counts)
                postings[term].push_back(Posting{ static_cast<std::uint32_t>(ord), tf });
        }
        index.docs.push_back(IndexedDoc{ std::move(d.doc_id), std::move(d.ref), d.geo, std::move(d.fields) });
    }
    return index;
}

SearchQuery SearchQuery::keywords(std::string_view text)
{
    SearchQuery q;
    q.terms = unicode::tokenize(text);
    return q;
}

std::vector<SearchHit> search(const InvertedIndex &index, const SearchQuery &q)
{
    if (q.terms.empty() and not q.bbox) throw UsageError("search needs at least one term or a bounding box");
    if (q.bbox and (q.bbox->min_lat > q.bbox->max_lat or q.bbox->min_lon > q.bbox->max_lon))
        throw UsageError("bounding box minimum exceeds maximum");

    std::vector<const PostingMap*> fields;
    if (q.field) {
        auto it = index.fields.find(*q.field);
        if (it == index.fields.end()) return {};
        fields.push_back(&it->second);
    } else {
        for (const auto &[name, postings] : index.fields) fields.push_back(&postings);
    }

    std::vector<std::pair<std::uint32_t, std::uint64_t>> candidates; // (ordinal, score), ordinal order
    if (q.terms.empty()) {
        for (std::uint32_t i = 0; i != index.docs.size(); ++i) candidates.emplace_back(i, 0);
    } else {
        const std::set<std::string> terms(q.terms.begin(), q.terms.end());
        bool first = true;
        for (const auto &term : terms) {
            std::map<std::uint32_t, std::uint64_t> hits;
            for (const PostingMap *f : fields) {
                auto it = f->find(term);
                if (it == f->end()) continue;
                for (const Posting &p : it->second) hits[p.ordinal] += p.tf;
            }
            if (first) {
                candidates.assign(hits.begin(), hits.end());
                first = false;
            } else {
                std::vector<std::pair<std::uint32_t, std::uint64_t>> kept;
                for (const auto &[ord, score] : candidates) {
                    auto it = hits.find(ord);
                    if (it != hits.end()) kept.emplace_back(ord, score + it->second);
                }
                candidates = std::move(kept);
            }
            if (candidates.empty()) return {};
        }
    }

    std::vector<SearchHit> out;
    for (const auto &[ord, score] : candidates) {
        const IndexedDoc &d = index.docs[ord];
        if (q.bbox and not (d.geo and q.bbox->contains(*d.geo))) continue;
        out.push_back(SearchHit{ d.doc_id, d.ref, score });
    }
    std::stable_sort(out.begin(), out.end(), [](const SearchHit &a, const SearchHit &b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (q.limit and out.size() > *q.limit) out.resize(*q.limit);
    return out;
}

BoundingBox parse_bbox(std::string_view text)
{
    double v[4];
    std::size_t start = 0;
    for (int i = 0; i != 4; ++i) {
        const std::size_t comma = i == 3 ? text.size() : text.find(',', start);
        if (comma == std::string_view::npos) throw UsageError("bounding box needs four comma-separated numbers");
        auto d = parse_degrees(text.substr(start, comma - start));
        if (not d) throw UsageError("bad bounding box coordinate '" + std::string(text.substr(start, comma - start)) + "'");
        v[i] = *d;
        start = comma + 1;
    }
    BoundingBox box{ v[0], v[1], v[2], v[3] };
    if (box.min_lat < -90 or box.max_lat > 90 or box.min_lon < -180 or box.max_lon > 180)
        throw UsageError("bounding box outside the valid coordinate range");
    if (box.min_lat > box.max_lat or box.min_lon > box.max_lon)
        throw UsageError("bounding box minimum exceeds maximum");
    return box;
}

std::size_t VirtualCollection::add(const std::vector<ItemRef> &more)
{
    std::set<ItemRef> present(refs.begin(), refs.end());
    std::size_t added = 0;
    for (const auto &r : more) {
        if (not present.insert(r).second) continue;
        refs.push_back(r);
        ++added;
    }
    return added;
}

}
