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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>


namespace vdc {

/*======================================================================================================================
 * Documents and ingestion
 *====================================================================================================================*/

struct GeoPoint
{
    double lat = 0;
    double lon = 0;

    bool operator==(const GeoPoint&) const = default;
};

/** The generic document every source is mapped into before indexing. */
struct Document
{
    std::string doc_id;
    ItemRef ref;
    std::vector<std::pair<std::string, std::string>> fields; ///< recipe order; absent values omitted
    std::string body;
    std::optional<GeoPoint> geo;

    const std::string * field(std::string_view name) const;
    bool operator==(const Document&) const = default;
};

struct IngestRecipe
{
    std::string name;
    RelationName from;
    std::string id_column;
    std::vector<std::pair<std::string, std::string>> fields; ///< (document field, column)
    std::vector<std::string> body_columns;
    std::optional<std::pair<std::string, std::string>> geo;  ///< (latitude column, longitude column)
    std::vector<std::string> index;                          ///< indexed fields as written

    /** The fields to index: `index` if given, otherwise just `body`. */
    std::vector<std::string> indexed_fields() const;

    bool operator==(const IngestRecipe&) const = default;
};

/** Parses the line-based recipe grammar.  Throws `ParseError` with a line number. */
IngestRecipe parse_recipe(std::string_view text);

/** Canonical text form; `parse_recipe(format_recipe(r)) == r`. */
std::string format_recipe(const IngestRecipe &r);

/** Checks recipe columns against the schema of its table.  Throws `IngestError`. */
void validate_recipe(const IngestRecipe &r, const TableSchema &schema);

struct IngestResult
{
    std::vector<Document> documents; ///< source order
    std::vector<std::string> warnings;
};

/** One document per row of the recipe's table.  Throws `IngestError` for a missing id, or a duplicate id naming both
 * items. */
IngestResult ingest_documents(const Source &source, const IngestRecipe &recipe);


/*======================================================================================================================
 * Inverted index
 *====================================================================================================================*/

struct Posting
{
    std::uint32_t ordinal = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

struct IndexedDoc
{
    std::string doc_id;
    ItemRef ref;
    std::optional<GeoPoint> geo;
    std::vector<std::pair<std::string, std::string>> stored;

    bool operator==(const IndexedDoc&) const = default;
};

using PostingMap = std::map<std::string, std::vector<Posting>>;

struct InvertedIndex
{
    std::vector<IndexedDoc> docs;              ///< ordinal order = ascending doc_id
    std::map<std::string, PostingMap> fields;  ///< indexed field → term → postings

    const IndexedDoc * find(std::string_view doc_id) const;
    bool operator==(const InvertedIndex&) const = default;
};

/** Terms are the tokens of each indexed field (`body` or a document field).  Throws `IngestError` on duplicate
 * doc ids. */
InvertedIndex build_index(std::vector<Document> docs, const std::vector<std::string> &indexed_fields);

/** Serializes to the `VDCIDX 1` text format. */
std::string write_index(const InvertedIndex &index);
void write_index(const InvertedIndex &index, const std::filesystem::path &path);

/** Throws `IndexFormatError` for bad headers, ordering violations and truncation. */
InvertedIndex read_index(std::string_view bytes);
InvertedIndex read_index_file(const std::filesystem::path &path);


/*======================================================================================================================
 * Search
 *====================================================================================================================*/

struct BoundingBox
{
    double min_lat = 0, min_lon = 0, max_lat = 0, max_lon = 0;

    bool contains(const GeoPoint &p) const {
        return min_lat <= p.lat and p.lat <= max_lat and min_lon <= p.lon and p.lon <= max_lon;
    }
};

struct SearchQuery
{
    std::vector<std::string> terms;      ///< already tokenized
    std::optional<std::string> field;
    std::optional<BoundingBox> bbox;
    std::optional<std::size_t> limit;

    /** Tokenizes `text` into terms. */
    static SearchQuery keywords(std::string_view text);
};

struct SearchHit
{
    std::string doc_id;
    ItemRef ref;
    std::uint64_t score = 0;

    bool operator==(const SearchHit&) const = default;
};

/** Docs containing every term; ranked by summed term frequency, then doc id.  Throws `UsageError` for a query
 * with neither terms nor a box, or an inverted box. */
std::vector<SearchHit> search(const InvertedIndex &index, const SearchQuery &q);

/** Parses `min_lat,min_lon,max_lat,max_lon`.  Throws `UsageError`. */
BoundingBox parse_bbox(std::string_view text);


/*======================================================================================================================
 * Virtual collections
 *====================================================================================================================*/

struct VirtualCollection
{
    std::string name;
    std::vector<ItemRef> refs; ///< first-insertion order, no duplicates

    /** Appends refs not yet present; returns how many were added. */
    std::size_t add(const std::vector<ItemRef> &more);

    bool operator==(const VirtualCollection&) const = default;
};

}
