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
#include "vdc/predicate.hpp"
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>


namespace vdc {

enum class SourceKind { Tabular, XmlCorpus };

/** Trust agreement under which the centre holds a source.  Fixed at registration. */
enum class AccessMode { Vault, Live, IndexOnly };

const char * to_string(SourceKind kind);
const char * to_string(AccessMode mode);
std::optional<SourceKind> parse_source_kind(std::string_view s);   ///< "tabular" or "xml"
std::optional<AccessMode> parse_access_mode(std::string_view s);   ///< "vault", "live" or "index-only"

struct SourceDescriptor
{
    std::string source_id;
    SourceKind kind = SourceKind::Tabular;
    std::filesystem::path path;
    AccessMode mode = AccessMode::Live;

    bool operator==(const SourceDescriptor&) const = default;
};


/*======================================================================================================================
 * Row streams
 *====================================================================================================================*/

/** A forward-only cursor over rows.  Each scan owns its cursor. */
struct RowStream
{
    virtual ~RowStream() = default;

    /** Writes the next row into `out`; returns false when exhausted. */
    virtual bool next(Row &out) = 0;
};

/** Drains a stream into a vector. */
std::vector<Row> collect(RowStream &stream);


/*======================================================================================================================
 * Sources
 *
 * The first column of every table is its record key: an `ItemRef` names a row by the display form of that cell.
 *====================================================================================================================*/

class Source
{
    protected:
    SourceDescriptor desc_;
    std::vector<TableSchema> tables_; ///< sorted by name

    explicit Source(SourceDescriptor desc) : desc_(std::move(desc)) { }

    public:
    virtual ~Source() = default;

    const SourceDescriptor & descriptor() const { return desc_; }
    const std::string & id() const { return desc_.source_id; }

    /** Name-sorted list of tables. */
    const std::vector<TableSchema> & list_tables() const { return tables_; }

    /** Throws `SourceError` for an unknown table. */
    const TableSchema & table(std::string_view name) const;
    bool has_table(std::string_view name) const;

    /** Whether pushed `CONTAINS` predicates are evaluated by this connector. */
    virtual bool supports_contains() const = 0;

    /** Returns the rows of `table` in file order that satisfy every predicate of `pushed`.  Throws
     * `CapabilityError` if a pushed predicate is not supported by this connector. */
    virtual std::unique_ptr<RowStream> scan_table(std::string_view table, std::span<const Predicate> pushed = {}) const = 0;

    /** Cheap upper-bound guess at the row count of `table`, used for join-method choice. */
    virtual std::size_t estimate_rows(std::string_view table) const = 0;

    /** Looks up one record by key. */
    std::optional<Row> fetch(std::string_view table, std::string_view item_id) const;
};

/** Opens a source directory read-only.  Throws `SourceError` naming the file and line for missing or malformed
 * content. */
std::shared_ptr<const Source> open_source(const SourceDescriptor &desc);


/*======================================================================================================================
 * Tabular sidecars
 *====================================================================================================================*/

/** Parses a `<table>.schema` sidecar: one `<name> : <kind>` per line, kind ∈ {int, text, date_text}; names with
 * spaces, quotes, colons or non-ASCII characters are double-quoted (`""` escapes a quote).  `#` starts a comment
 * line. */
TableSchema parse_sidecar(std::string_view table_name, std::string_view text);

/** Inverse of `parse_sidecar()`.  Date columns are written as `date_text`. */
std::string format_sidecar(const TableSchema &schema);


/*======================================================================================================================
 * XML corpus documents
 *====================================================================================================================*/

struct CorpusDoc
{
    std::string id;
    /** Present fields only, in the order title, findspot, not_before, not_after, category, persons. */
    std::vector<std::pair<std::string, std::string>> meta;
    std::string body;

    const std::string * field(std::string_view name) const;
};

/** Parses one document of the corpus subset: `<doc id>` with children `<meta>` (`title`, `findspot`, `date` with
 * `notBefore`/`notAfter`, `category`, any number of `persName`) and `<text>`. */
CorpusDoc parse_xml_doc(std::string_view bytes);

/** Schema of the single `docs` table every corpus exposes. */
const TableSchema & corpus_docs_schema();

Row corpus_doc_row(const CorpusDoc &doc);

}
