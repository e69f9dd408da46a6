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
#include "vdc/query.hpp"
#include "vdc/textindex.hpp"
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>


namespace vdc {

struct CatalogueOptions
{
    bool strict_translate = false;
    /** Stored fields an index over an index-only source may publish. */
    std::vector<std::string> manifest_fields{ "title" };

    bool operator==(const CatalogueOptions&) const = default;
};

/** Result of resolving one reference of a virtual collection. */
struct ResolvedRef
{
    enum class Status { Record, Stub, Error };

    ItemRef ref;
    Status status = Status::Error;
    TableSchema schema;                                      ///< Record
    Row row;                                                 ///< Record
    std::string doc_id;                                      ///< Stub
    std::vector<std::pair<std::string, std::string>> stub;   ///< Stub: published manifest fields
    std::string error;                                       ///< Error
};

struct FetchedRecord
{
    TableSchema schema;
    Row row;
};

class FileLock;

namespace detail { struct CatalogueState; }

/** An immutable view of the catalogue.  Cheap to copy; stays valid across later mutations. */
class CatalogueSnapshot : public RelationCatalog
{
    std::shared_ptr<const detail::CatalogueState> state_;

    public:
    explicit CatalogueSnapshot(std::shared_ptr<const detail::CatalogueState> state) : state_(std::move(state)) { }

    std::shared_ptr<const Source> open(const std::string &source_id) const override;
    std::optional<AccessMode> mode(const std::string &source_id) const override;
    std::vector<std::string> source_ids() const override;
    const ViewDefinition * view(const std::string &name) const override;
    MediationContext mediation_context() const override;

    std::optional<SourceDescriptor> source(const std::string &id) const;
    std::vector<std::string> view_names() const;
    std::vector<std::string> index_names() const;
    std::vector<std::string> collection_names() const;
    std::shared_ptr<const TranslationTable> translation(const std::string &id) const;
    const VirtualCollection * collection(const std::string &name) const;
    const IngestRecipe * recipe(const std::string &name) const;
    bool sealed(const std::string &source_id) const;
    const CatalogueOptions & options() const;

    /** Loads (once) and returns the named index.  Throws `NotFound` or `IndexFormatError`. */
    std::shared_ptr<const InvertedIndex> index(const std::string &collection) const;

    /** Parses, plans and executes a query. */
    ResultSet query(std::string_view text, const PlanOptions &options = {}) const;
    std::vector<SearchHit> search(const std::string &collection, const SearchQuery &q) const;

    /** Throws `NotFound` for an unknown source, table or item and `AccessDenied` for index-only sources. */
    FetchedRecord fetch_record(const ItemRef &ref) const;

    /** Resolves every reference; problems are reported per reference.  Throws `NotFound` for an unknown
     * collection. */
    std::vector<ResolvedRef> collection_resolve(const std::string &name) const;

    /** Reads a source through its recipe without retaining anything.  Index-only sources are denied. */
    IngestResult ingest(const std::string &source_id, const IngestRecipe &recipe) const;
};

/** The centre's registry of sources, views, translation tables, recipes, indexes and collections.
 *
 * Storage lives next to the catalogue file in `<file>.d/`.  Mutations are serialized; readers work on snapshots. */
class Catalogue
{
    std::filesystem::path path_;
    mutable std::mutex state_mutex_;
    std::shared_ptr<const detail::CatalogueState> state_;
    std::mutex write_mutex_;
    std::unique_ptr<FileLock> lock_;

    template<typename Fn> void mutate(Fn &&fn);

    public:
    /** An empty catalogue that will be saved at `path`. */
    explicit Catalogue(std::filesystem::path path);
    ~Catalogue();

    Catalogue(const Catalogue&) = delete;
    Catalogue & operator=(const Catalogue&) = delete;

    /** Loads `path`.  Throws `LoadError` for format problems and `IntegrityError` for dangling references. */
    static std::unique_ptr<Catalogue> load(const std::filesystem::path &path);
    /** Loads `path` if it exists, otherwise returns an empty catalogue for it. */
    static std::unique_ptr<Catalogue> open(const std::filesystem::path &path);
    /** Takes the writer lock first, then behaves like `open()`. */
    static std::unique_ptr<Catalogue> open_locked(const std::filesystem::path &path, bool wait);

    const std::filesystem::path & path() const { return path_; }
    std::filesystem::path storage_dir() const;

    CatalogueSnapshot snapshot() const;

    /** Takes the writer lock file.  With `wait == false`, throws `LockedError` if another process holds it. */
    void lock(bool wait);
    void unlock();

    /** Throws `RegistrationError` for a bad or duplicate id and `SourceError` for unreadable content; a failed vault
     * snapshot leaves no trace. */
    void register_source(const SourceDescriptor &desc);
    /** Throws `RegistrationError` while views or recipes still use the source. */
    void deregister_source(const std::string &id);

    void add_translation(const std::string &id, const std::filesystem::path &file);
    /** Returns the view name. */
    std::string define_view(const std::filesystem::path &file);
    void set_options(const CatalogueOptions &options);

    /** Ingests every recipe, builds one joint index and stores it under `collection`.  Index-only sources may be
     * indexed once; afterwards they are sealed. */
    IngestResult build_index(const std::string &collection, const std::vector<std::filesystem::path> &recipe_files);

    /** Adds references by text.  Throws `CollectionError` naming the first malformed or unresolvable one. */
    VirtualCollection collection_update(const std::string &name, const std::vector<std::string> &refs);

    /** Writes the catalogue file atomically. */
    void save();

    /** Canonical catalogue file bytes. */
    std::string serialize() const;
};

}
