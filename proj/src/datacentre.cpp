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


#include "vdc/datacentre.hpp"

#include "vdc/error.hpp"
#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <sys/file.h>
#include <unistd.h>


namespace fs = std::filesystem;

namespace vdc {

/*----- Lock file ----------------------------------------------------------------------------------------------------*/

class FileLock
{
    int fd_ = -1;

    public:
    FileLock(const fs::path &path, bool wait) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw LockedError("cannot open lock file '" + path.string() + "': " + std::strerror(errno));
        int rc;
        do {
            rc = ::flock(fd_, LOCK_EX | (wait ? 0 : LOCK_NB));
        } while (rc != 0 and errno == EINTR);
        if (rc != 0) {
            const int err = errno;
            ::close(fd_);
            fd_ = -1;
            if (err == EWOULDBLOCK) throw LockedError("catalogue '" + path.string() + "' is locked by another process");
            throw LockedError("cannot lock '" + path.string() + "': " + std::strerror(err));
        }
    }

    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

    FileLock(const FileLock&) = delete;
    FileLock & operator=(const FileLock&) = delete;
};


/*----- State --------------------------------------------------------------------------------------------------------*/

namespace detail {

struct SourceSlot
{
    std::mutex mutex;
    std::shared_ptr<const Source> source;
};

struct SourceEntry
{
    SourceDescriptor desc;      ///< path is the snapshot for vault sources
    std::string stored_path;
    std::shared_ptr<SourceSlot> slot = std::make_shared<SourceSlot>();
};

struct IndexSlot
{
    std::mutex mutex;
    std::shared_ptr<const InvertedIndex> index;
};

struct IndexEntry
{
    std::string stored_path;
    std::shared_ptr<IndexSlot> slot = std::make_shared<IndexSlot>();
};

struct ViewEntry { ViewDefinition definition; std::string stored_path; };
struct XlateEntry { std::shared_ptr<const TranslationTable> table; std::string stored_path; };
struct RecipeEntry { IngestRecipe recipe; std::string stored_path; };

struct CatalogueState
{
    fs::path base_dir;
    std::map<std::string, SourceEntry> sources;
    std::map<std::string, ViewEntry> views;
    std::map<std::string, XlateEntry> xlates;
    std::map<std::string, RecipeEntry> recipes;
    std::map<std::string, IndexEntry> indexes;
    std::map<std::string, VirtualCollection> collections;
    std::set<std::string> sealed;
    CatalogueOptions options;

    fs::path resolve(const std::string &stored) const {
        const fs::path p(stored);
        return p.is_absolute() ? p : base_dir / p;
    }

    const SourceEntry & source_entry(const std::string &id) const {
        auto it = sources.find(id);
        if (it == sources.end()) throw NotFound("no source named '" + id + "'");
        return it->second;
    }
};

}

using detail::CatalogueState;

namespace {

bool is_identifier(std::string_view s)
{
    if (s.empty() or not (std::isalpha(static_cast<unsigned char>(s[0])) or s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) or c == '_'; });
}

void require_identifier(std::string_view s, const char *what)
{
    if (not is_identifier(s))
        throw RegistrationError(std::string(what) + " '" + std::string(s) + "' is not an identifier ([A-Za-z_][A-Za-z0-9_]*)");
}

std::string read_bytes(const fs::path &path, const char *what)
{
    std::ifstream in(path, std::ios::binary);
    if (not in) throw SourceError(std::string("cannot read ") + what + " '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomically(const fs::path &path, std::string_view bytes)
{
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (not out) throw SourceError("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (not out) throw SourceError("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string escape_ref(const std::string &s)
{
    std::string out;
    for (char c : s) {
        if (c == ',' or c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_refs(std::string_view s)
{
    std::vector<std::string> out;
    if (s.empty()) return out;
    out.emplace_back();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' and i + 1 < s.size()) out.back().push_back(s[++i]);
        else if (s[i] == ',') out.emplace_back();
        else out.back().push_back(s[i]);
    }
    return out;
}

std::string join(const std::vector<std::string> &items, char sep)
{
    std::string out;
    for (std::size_t i = 0; i != items.size(); ++i) {
        if (i) out.push_back(sep);
        out += items[i];
    }
    return out;
}

std::vector<std::pair<std::string, std::string>>
published_fields(const std::vector<std::pair<std::string, std::string>> &stored, const CatalogueOptions &options)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto &f : stored)
        if (std::find(options.manifest_fields.begin(), options.manifest_fields.end(), f.first) != options.manifest_fields.end())
            out.push_back(f);
    return out;
}

std::shared_ptr<const Source> open_entry(const detail::SourceEntry &e)
{
    if (e.desc.mode == AccessMode::IndexOnly)
        throw AccessDenied("source '" + e.desc.source_id + "' is index-only; its records cannot be read");
    std::lock_guard lock(e.slot->mutex);
    if (not e.slot->source) e.slot->source = open_source(e.desc);
    return e.slot->source;
}

}


/*----- Snapshot -----------------------------------------------------------------------------------------------------*/

std::shared_ptr<const Source> CatalogueSnapshot::open(const std::string &source_id) const
{
    return open_entry(state_->source_entry(source_id));
}

std::optional<AccessMode> CatalogueSnapshot::mode(const std::string &source_id) const
{
    auto it = state_->sources.find(source_id);
    if (it == state_->sources.end()) return std::nullopt;
    return it->second.desc.mode;
}

std::vector<std::string> CatalogueSnapshot::source_ids() const
{
    std::vector<std::string> out;
    for (const auto &[id, e] : state_->sources) out.push_back(id);
    return out;
}

const ViewDefinition * CatalogueSnapshot::view(const std::string &name) const
{
    auto it = state_->views.find(name);
    return it == state_->views.end() ? nullptr : &it->second.definition;
}

MediationContext CatalogueSnapshot::mediation_context() const
{
    MediationContext ctx;
    auto state = state_;
    ctx.table_schema = [state](const RelationName &rel) -> TableSchema {
        auto src = open_entry(state->source_entry(rel.source));
        if (not src->has_table(rel.table)) throw NotFound("source '" + rel.source + "' has no table '" + rel.table + "'");
        return src->table(rel.table);
    };
    ctx.translation = [state](const std::string &id) -> std::shared_ptr<const TranslationTable> {
        auto it = state->xlates.find(id);
        return it == state->xlates.end() ? nullptr : it->second.table;
    };
    ctx.strict_translate = state_->options.strict_translate;
    return ctx;
}

std::optional<SourceDescriptor> CatalogueSnapshot::source(const std::string &id) const
{
    auto it = state_->sources.find(id);
    if (it == state_->sources.end()) return std::nullopt;
    return it->second.desc;
}

std::vector<std::string> CatalogueSnapshot::view_names() const
{
    std::vector<std::string> out;
    for (const auto &[name, e] : state_->views) out.push_back(name);
    return out;
}

std::vector<std::string> CatalogueSnapshot::index_names() const
{
    std::vector<std::string> out;
    for (const auto &[name, e] : state_->indexes) out.push_back(name);
    return out;
}

std::vector<std::string> CatalogueSnapshot::collection_names() const
{
    std::vector<std::string> out;
    for (const auto &[name, e] : state_->collections) out.push_back(name);
    return out;
}

std::shared_ptr<const TranslationTable> CatalogueSnapshot::translation(const std::string &id) const
{
    auto it = state_->xlates.find(id);
    return it == state_->xlates.end() ? nullptr : it->second.table;
}

const VirtualCollection * CatalogueSnapshot::collection(const std::string &name) const
{
    auto it = state_->collections.find(name);
    return it == state_->collections.end() ? nullptr : &it->second;
}

const IngestRecipe * CatalogueSnapshot::recipe(const std::string &name) const
{
    auto it = state_->recipes.find(name);
    return it == state_->recipes.end() ? nullptr : &it->second.recipe;
}

bool CatalogueSnapshot::sealed(const std::string &source_id) const { return state_->sealed.count(source_id) != 0; }

const CatalogueOptions & CatalogueSnapshot::options() const { return state_->options; }

std::shared_ptr<const InvertedIndex> CatalogueSnapshot::index(const std::string &collection) const
{
    auto it = state_->indexes.find(collection);
    if (it == state_->indexes.end()) throw NotFound("no index named '" + collection + "'");
    const auto &e = it->second;
    std::lock_guard lock(e.slot->mutex);
    if (not e.slot->index)
        e.slot->index = std::make_shared<const InvertedIndex>(read_index_file(state_->resolve(e.stored_path)));
    return e.slot->index;
}

ResultSet CatalogueSnapshot::query(std::string_view text, const PlanOptions &options) const
{
    const QueryAst ast = parse_query(text);
    return execute_plan(plan_query(ast, *this, options));
}

std::vector<SearchHit> CatalogueSnapshot::search(const std::string &collection, const SearchQuery &q) const
{
    return vdc::search(*index(collection), q);
}

FetchedRecord CatalogueSnapshot::fetch_record(const ItemRef &ref) const
{
    auto src = open(ref.source_id);
    if (not src->has_table(ref.container))
        throw NotFound("source '" + ref.source_id + "' has no table '" + ref.container + "'");
    auto row = src->fetch(ref.container, ref.item_id);
    if (not row) throw NotFound("no item '" + ref.to_string() + "'");
    return { src->table(ref.container), std::move(*row) };
}

std::vector<ResolvedRef> CatalogueSnapshot::collection_resolve(const std::string &name) const
{
    const VirtualCollection *coll = collection(name);
    if (not coll) throw NotFound("no collection named '" + name + "'");
    std::vector<ResolvedRef> out;
    for (const auto &ref : coll->refs) {
        ResolvedRef r;
        r.ref = ref;
        auto m = mode(ref.source_id);
        try {
            if (not m) {
                r.error = "source '" + ref.source_id + "' is not registered";
            } else if (*m == AccessMode::IndexOnly) {
                for (const auto &idx : index_names()) {
                    auto index_ptr = index(idx);
                    auto doc = std::find_if(index_ptr->docs.begin(), index_ptr->docs.end(),
                                            [&](const IndexedDoc &d) { return d.ref == ref; });
                    if (doc == index_ptr->docs.end()) continue;
                    r.status = ResolvedRef::Status::Stub;
                    r.doc_id = doc->doc_id;
                    r.stub = published_fields(doc->stored, state_->options);
                    break;
                }
                if (r.status != ResolvedRef::Status::Stub) r.error = "no published index entry for '" + ref.to_string() + "'";
            } else {
                FetchedRecord rec = fetch_record(ref);
                r.status = ResolvedRef::Status::Record;
                r.schema = std::move(rec.schema);
                r.row = std::move(rec.row);
            }
        } catch (const Error &e) {
            r.status = ResolvedRef::Status::Error;
            r.error = e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

IngestResult CatalogueSnapshot::ingest(const std::string &source_id, const IngestRecipe &recipe) const
{
    if (recipe.from.source != source_id)
        throw IngestError("recipe '" + recipe.name + "' reads from '" + recipe.from.source + "', not '" + source_id + "'");
    return ingest_documents(*open(source_id), recipe);
}


/*----- Catalogue ----------------------------------------------------------------------------------------------------*/

Catalogue::Catalogue(fs::path path) : path_(fs::absolute(std::move(path)).lexically_normal())
{
    auto state = std::make_shared<CatalogueState>();
    state->base_dir = path_.parent_path();
    state_ = std::move(state);
}

Catalogue::~Catalogue() = default;

fs::path Catalogue::storage_dir() const
{
    fs::path d = path_;
    d += ".d";
    return d;
}

CatalogueSnapshot Catalogue::snapshot() const
{
    std::lock_guard lock(state_mutex_);
    return CatalogueSnapshot(state_);
}

void Catalogue::lock(bool wait)
{
    if (lock_) return;
    fs::path p = path_;
    p += ".lock";
    lock_ = std::make_unique<FileLock>(p, wait);
}

void Catalogue::unlock() { lock_.reset(); }

template<typename Fn>
void Catalogue::mutate(Fn &&fn)
{
    std::lock_guard writer(write_mutex_);
    std::shared_ptr<const CatalogueState> current;
    {
        std::lock_guard lock(state_mutex_);
        current = state_;
    }
    auto next = std::make_shared<CatalogueState>(*current);
    fn(*next);
    std::lock_guard lock(state_mutex_);
    state_ = std::move(next);
}

namespace {

std::string relative_to(const fs::path &p, const fs::path &base) { return p.lexically_relative(base).generic_string(); }

}

void Catalogue::register_source(const SourceDescriptor &d)
{
    require_identifier(d.source_id, "source id");
    if (snapshot().mode(d.source_id)) throw RegistrationError("source '" + d.source_id + "' is already registered");
    const std::string path_text = d.path.string();
    if (path_text.empty() or path_text.find('\n') != std::string::npos)
        throw RegistrationError("invalid source path '" + path_text + "'");
    std::error_code ec;
    const fs::path original = fs::absolute(d.path).lexically_normal();
    if (not fs::is_directory(original, ec)) throw SourceError("source path '" + original.string() + "' is not a readable directory");

    detail::SourceEntry entry;
    entry.desc = d;
    entry.desc.path = original;
    entry.stored_path = original.generic_string();

    if (d.mode == AccessMode::Vault) {
        const fs::path snap = storage_dir() / "vault" / d.source_id;
        try {
            fs::remove_all(snap);
            fs::create_directories(snap);
            std::vector<fs::path> files;
            for (const auto &f : fs::directory_iterator(original))
                if (f.is_regular_file()) files.push_back(f.path());
            std::sort(files.begin(), files.end());
            for (const auto &f : files)
                write_atomically(snap / f.filename(), read_bytes(f, "source file"));
            entry.desc.path = snap;
            entry.stored_path = relative_to(snap, path_.parent_path());
            entry.slot->source = open_source(entry.desc);
        } catch (const fs::filesystem_error &e) {
            fs::remove_all(snap, ec);
            throw SourceError("snapshot of '" + d.source_id + "' failed: " + e.what());
        } catch (...) {
            fs::remove_all(snap, ec);
            throw;
        }
    } else if (d.mode == AccessMode::Live) {
        entry.slot->source = open_source(entry.desc);
    }
    mutate([&](CatalogueState &s) { s.sources.emplace(d.source_id, std::move(entry)); });
}

void Catalogue::deregister_source(const std::string &id)
{
    auto snap = snapshot();
    auto desc = snap.source(id);
    if (not desc) throw NotFound("no source named '" + id + "'");
    for (const auto &name : snap.view_names())
        for (const auto &b : snap.view(name)->base)
            if (b.source == id) throw RegistrationError("source '" + id + "' is used by view '" + name + "'");
    mutate([&](CatalogueState &s) {
        for (const auto &[name, r] : s.recipes)
            if (r.recipe.from.source == id) throw RegistrationError("source '" + id + "' is used by recipe '" + name + "'");
        s.sources.erase(id);
        s.sealed.erase(id);
    });
    if (desc->mode == AccessMode::Vault) {
        std::error_code ec;
        fs::remove_all(storage_dir() / "vault" / id, ec);
    }
}

void Catalogue::add_translation(const std::string &id, const fs::path &file)
{
    require_identifier(id, "translation table id");
    if (snapshot().translation(id)) throw RegistrationError("translation table '" + id + "' is already registered");
    const std::string bytes = read_bytes(file, "translation table");
    auto table = std::make_shared<const TranslationTable>(parse_translation_table(id, bytes));
    const fs::path stored = storage_dir() / "xlate" / (id + ".csv");
    write_atomically(stored, bytes);
    mutate([&](CatalogueState &s) {
        s.xlates[id] = detail::XlateEntry{ table, relative_to(stored, path_.parent_path()) };
    });
}

std::string Catalogue::define_view(const fs::path &file)
{
    const std::string bytes = read_bytes(file, "view file");
    ViewDefinition v = parse_view_file(bytes);
    auto snap = snapshot();
    if (snap.view(v.name)) throw RegistrationError("view '" + v.name + "' is already defined");
    for (const auto &b : v.base) {
        auto m = snap.mode(b.source);
        if (not m) throw PlanError("view '" + v.name + "': unknown source '" + b.source + "'");
        if (*m == AccessMode::IndexOnly)
            throw AccessDenied("view '" + v.name + "': source '" + b.source + "' is index-only");
    }
    resolve_view(v, snap.mediation_context());
    const fs::path stored = storage_dir() / "views" / (v.name + ".view");
    write_atomically(stored, bytes);
    mutate([&](CatalogueState &s) {
        s.views[v.name] = detail::ViewEntry{ v, relative_to(stored, path_.parent_path()) };
    });
    return v.name;
}

void Catalogue::set_options(const CatalogueOptions &options)
{
    for (const auto &f : options.manifest_fields) require_identifier(f, "manifest field");
    mutate([&](CatalogueState &s) { s.options = options; });
}

IngestResult Catalogue::build_index(const std::string &collection, const std::vector<fs::path> &recipe_files)
{
    require_identifier(collection, "index name");
    if (recipe_files.empty()) throw UsageError("index build needs at least one recipe");
    auto snap = snapshot();

    struct Loaded { IngestRecipe recipe; std::string bytes; };
    std::vector<Loaded> recipes;
    std::set<std::string> names;
    for (const auto &file : recipe_files) {
        Loaded l;
        l.bytes = read_bytes(file, "recipe");
        l.recipe = parse_recipe(l.bytes);
        if (not names.insert(l.recipe.name).second) throw IngestError("recipe '" + l.recipe.name + "' given twice");
        recipes.push_back(std::move(l));
    }

    IngestResult all;
    std::vector<std::string> fields;
    std::set<std::string> index_only;
    for (const auto &l : recipes) {
        const auto desc = snap.source(l.recipe.from.source);
        if (not desc) throw NotFound("recipe '" + l.recipe.name + "': no source named '" + l.recipe.from.source + "'");
        IngestResult part;
        if (desc->mode == AccessMode::IndexOnly) {
            if (snap.sealed(desc->source_id))
                throw AccessDenied("index-only source '" + desc->source_id + "' has already been indexed; its content is no longer readable");
            auto src = open_source(*desc);
            part = ingest_documents(*src, l.recipe);
            for (auto &d : part.documents) d.fields = published_fields(d.fields, snap.options());
            for (auto &w : part.warnings) w = w.substr(0, w.find(" ("));
            index_only.insert(desc->source_id);
        } else {
            part = ingest_documents(*snap.open(desc->source_id), l.recipe);
        }
        for (auto &d : part.documents) all.documents.push_back(std::move(d));
        for (auto &w : part.warnings) all.warnings.push_back(std::move(w));
        for (const auto &f : l.recipe.indexed_fields())
            if (std::find(fields.begin(), fields.end(), f) == fields.end()) fields.push_back(f);
    }

    const InvertedIndex index = vdc::build_index(all.documents, fields);
    const fs::path index_path = storage_dir() / "indexes" / (collection + ".idx");
    fs::create_directories(index_path.parent_path());
    write_index(index, index_path);

    std::vector<std::pair<std::string, std::string>> stored_recipes;
    for (const auto &l : recipes) {
        const fs::path p = storage_dir() / "recipes" / (l.recipe.name + ".recipe");
        write_atomically(p, l.bytes);
        stored_recipes.emplace_back(l.recipe.name, relative_to(p, path_.parent_path()));
    }
    auto loaded = std::make_shared<const InvertedIndex>(index);
    mutate([&](CatalogueState &s) {
        for (std::size_t i = 0; i != recipes.size(); ++i)
            s.recipes[recipes[i].recipe.name] = detail::RecipeEntry{ recipes[i].recipe, stored_recipes[i].second };
        detail::IndexEntry e;
        e.stored_path = relative_to(index_path, path_.parent_path());
        e.slot->index = loaded;
        s.indexes[collection] = std::move(e);
        for (const auto &id : index_only) s.sealed.insert(id);
    });
    for (auto &d : all.documents)
        if (index_only.count(d.ref.source_id)) d.body.clear();
    return all;
}

VirtualCollection Catalogue::collection_update(const std::string &name, const std::vector<std::string> &refs)
{
    if (not is_identifier(name)) throw CollectionError("collection name '" + name + "' is not an identifier");
    auto snap = snapshot();
    std::vector<ItemRef> parsed;
    for (const auto &text : refs) {
        ItemRef ref;
        try {
            ref = ItemRef::parse(text);
        } catch (const ParseError &e) {
            throw CollectionError("malformed item reference '" + text + "': " + e.what());
        }
        const auto m = snap.mode(ref.source_id);
        if (not m) throw CollectionError("cannot add '" + text + "': source '" + ref.source_id + "' is not registered");
        if (*m == AccessMode::IndexOnly) {
            bool found = false;
            for (const auto &idx : snap.index_names()) {
                const auto index = snap.index(idx);
                found = std::any_of(index->docs.begin(), index->docs.end(), [&](const IndexedDoc &d) { return d.ref == ref; });
                if (found) break;
            }
            if (not found) throw CollectionError("cannot add '" + text + "': no published index contains it");
        } else {
            try {
                snap.fetch_record(ref);
            } catch (const Error &e) {
                throw CollectionError("cannot add '" + text + "': " + e.what());
            }
        }
        parsed.push_back(std::move(ref));
    }
    VirtualCollection result;
    mutate([&](CatalogueState &s) {
        auto &coll = s.collections[name];
        coll.name = name;
        coll.add(parsed);
        result = coll;
    });
    return result;
}

std::string Catalogue::serialize() const
{
    std::shared_ptr<const CatalogueState> s;
    {
        std::lock_guard lock(state_mutex_);
        s = state_;
    }
    std::string out = "VDCCAT 1\n";
    out += "OPTION manifest_fields " + (s->options.manifest_fields.empty() ? std::string("-") : join(s->options.manifest_fields, ',')) + "\n";
    out += std::string("OPTION strict_translate ") + (s->options.strict_translate ? "true" : "false") + "\n";
    for (const auto &[id, e] : s->sources)
        out += "SOURCE " + id + " " + to_string(e.desc.kind) + " " + to_string(e.desc.mode) + " " + e.stored_path + "\n";
    for (const auto &id : s->sealed) out += "SEALED " + id + "\n";
    for (const auto &[id, e] : s->xlates) out += "XLATE " + id + " " + e.stored_path + "\n";
    for (const auto &[name, e] : s->views) out += "VIEWFILE " + e.stored_path + "\n";
    for (const auto &[name, e] : s->recipes) out += "RECIPE " + e.stored_path + "\n";
    for (const auto &[name, e] : s->indexes) out += "INDEX " + name + " " + e.stored_path + "\n";
    for (const auto &[name, c] : s->collections) {
        std::vector<std::string> refs;
        for (const auto &r : c.refs) refs.push_back(escape_ref(r.to_string()));
        out += "COLL " + name + (refs.empty() ? std::string() : " " + join(refs, ',')) + "\n";
    }
    return out;
}

void Catalogue::save()
{
    std::lock_guard writer(write_mutex_);
    std::unique_ptr<FileLock> temporary;
    if (not lock_) {
        fs::path p = path_;
        p += ".lock";
        temporary = std::make_unique<FileLock>(p, true);
    }
    write_atomically(path_, serialize());
}

std::unique_ptr<Catalogue> Catalogue::open(const fs::path &path)
{
    std::error_code ec;
    if (fs::exists(path, ec)) return load(path);
    return std::make_unique<Catalogue>(path);
}

std::unique_ptr<Catalogue> Catalogue::open_locked(const fs::path &path, bool wait)
{
    auto cat = std::make_unique<Catalogue>(path);
    cat->lock(wait);
    std::error_code ec;
    if (fs::exists(cat->path_, ec)) cat->state_ = load(cat->path_)->state_;
    return cat;
}

std::unique_ptr<Catalogue> Catalogue::load(const fs::path &path)
{
    auto cat = std::make_unique<Catalogue>(path);
    std::string text;
    try {
        text = read_bytes(cat->path_, "catalogue");
    } catch (const SourceError &e) {
        throw LoadError(e.what());
    }
    auto state = std::make_shared<CatalogueState>();
    state->base_dir = cat->path_.parent_path();

    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    if (lines.empty() or not lines[0].starts_with("VDCCAT "))
        throw LoadError("'" + cat->path_.string() + "' is not a catalogue file");
    if (lines[0] != "VDCCAT 1") throw LoadError("unsupported catalogue version '" + lines[0].substr(7) + "'");

    auto fail = [&](std::size_t ln, const std::string &what) -> LoadError {
        return LoadError(cat->path_.string() + ":" + std::to_string(ln) + ": " + what);
    };
    auto integrity = [&](std::size_t ln, const std::string &what) -> IntegrityError {
        return IntegrityError(cat->path_.string() + ":" + std::to_string(ln) + ": " + what);
    };
    auto read_stored = [&](std::size_t ln, const std::string &stored, const char *what) {
        const fs::path p = state->resolve(stored);
        std::error_code e;
        if (not fs::is_regular_file(p, e)) throw integrity(ln, std::string(what) + " '" + p.string() + "' is missing");
        return read_bytes(p, what);
    };

    struct Deferred { std::size_t line; std::string kind; std::string rest; };
    std::vector<Deferred> deferred;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        const std::string &line = lines[i];
        if (line.empty()) continue;
        const std::size_t sp = line.find(' ');
        const std::string kind = line.substr(0, sp);
        const std::string rest = sp == std::string::npos ? std::string() : line.substr(sp + 1);
        if (kind == "OPTION") {
            const std::size_t sp2 = rest.find(' ');
            if (sp2 == std::string::npos) throw fail(ln, "malformed OPTION record");
            const std::string key = rest.substr(0, sp2), value = rest.substr(sp2 + 1);
            if (key == "strict_translate") {
                if (value != "true" and value != "false") throw fail(ln, "strict_translate must be true or false");
                state->options.strict_translate = value == "true";
            } else if (key == "manifest_fields") {
                state->options.manifest_fields.clear();
                if (value != "-") {
                    std::stringstream ss(value);
                    std::string f;
                    while (std::getline(ss, f, ',')) state->options.manifest_fields.push_back(f);
                }
            } else {
                throw fail(ln, "unknown option '" + key + "'");
            }
        } else if (kind == "SOURCE") {
            std::istringstream ss(rest);
            std::string id, k, m;
            ss >> id >> k >> m;
            std::string p;
            std::getline(ss, p);
            if (not p.empty() and p[0] == ' ') p.erase(0, 1);
            const auto sk = parse_source_kind(k);
            const auto sm = parse_access_mode(m);
            if (id.empty() or not sk or not sm or p.empty()) throw fail(ln, "malformed SOURCE record");
            if (state->sources.count(id)) throw fail(ln, "duplicate source '" + id + "'");
            detail::SourceEntry e;
            e.desc = SourceDescriptor{ id, *sk, state->resolve(p), *sm };
            e.stored_path = p;
            std::error_code err;
            if (*sm == AccessMode::Vault and not fs::is_directory(e.desc.path, err))
                throw integrity(ln, "vault snapshot '" + e.desc.path.string() + "' of source '" + id + "' is missing");
            state->sources.emplace(id, std::move(e));
        } else if (kind == "SEALED" or kind == "XLATE" or kind == "VIEWFILE" or kind == "RECIPE" or kind == "INDEX"
                   or kind == "COLL") {
            deferred.push_back({ ln, kind, rest });
        } else {
            throw fail(ln, "unknown record '" + kind + "'");
        }
    }

    for (const auto &d : deferred) {
        if (d.kind == "SEALED") {
            auto it = state->sources.find(d.rest);
            if (it == state->sources.end()) throw integrity(d.line, "sealed source '" + d.rest + "' is not registered");
            if (it->second.desc.mode != AccessMode::IndexOnly) throw integrity(d.line, "only index-only sources can be sealed");
            state->sealed.insert(d.rest);
        } else if (d.kind == "XLATE") {
            const std::size_t sp = d.rest.find(' ');
            if (sp == std::string::npos) throw fail(d.line, "malformed XLATE record");
            const std::string id = d.rest.substr(0, sp), p = d.rest.substr(sp + 1);
            if (state->xlates.count(id)) throw fail(d.line, "duplicate translation table '" + id + "'");
            const std::string bytes = read_stored(d.line, p, "translation table");
            try {
                state->xlates[id] = detail::XlateEntry{ std::make_shared<const TranslationTable>(parse_translation_table(id, bytes)), p };
            } catch (const Error &e) {
                throw integrity(d.line, e.what());
            }
        }
    }
    for (const auto &d : deferred) {
        if (d.kind == "VIEWFILE") {
            ViewDefinition v;
            try {
                v = parse_view_file(read_stored(d.line, d.rest, "view file"));
            } catch (const ParseError &e) {
                throw integrity(d.line, std::string("view file '") + d.rest + "': " + e.what());
            }
            if (state->views.count(v.name)) throw fail(d.line, "duplicate view '" + v.name + "'");
            for (const auto &b : v.base)
                if (not state->sources.count(b.source))
                    throw integrity(d.line, "view '" + v.name + "' references unregistered source '" + b.source + "'");
            for (const auto &r : v.rules)
                if (const auto *t = std::get_if<TranslateRule>(&r); t and not state->xlates.count(t->table))
                    throw integrity(d.line, "view '" + v.name + "' references unregistered translation table '" + t->table + "'");
            const std::string name = v.name;
            state->views[name] = detail::ViewEntry{ std::move(v), d.rest };
        } else if (d.kind == "RECIPE") {
            IngestRecipe r;
            try {
                r = parse_recipe(read_stored(d.line, d.rest, "recipe"));
            } catch (const ParseError &e) {
                throw integrity(d.line, std::string("recipe '") + d.rest + "': " + e.what());
            }
            if (state->recipes.count(r.name)) throw fail(d.line, "duplicate recipe '" + r.name + "'");
            if (not state->sources.count(r.from.source))
                throw integrity(d.line, "recipe '" + r.name + "' references unregistered source '" + r.from.source + "'");
            const std::string name = r.name;
            state->recipes[name] = detail::RecipeEntry{ std::move(r), d.rest };
        } else if (d.kind == "INDEX") {
            const std::size_t sp = d.rest.find(' ');
            if (sp == std::string::npos) throw fail(d.line, "malformed INDEX record");
            const std::string name = d.rest.substr(0, sp), p = d.rest.substr(sp + 1);
            if (state->indexes.count(name)) throw fail(d.line, "duplicate index '" + name + "'");
            std::error_code e;
            if (not fs::is_regular_file(state->resolve(p), e))
                throw integrity(d.line, "index file '" + state->resolve(p).string() + "' is missing");
            detail::IndexEntry entry;
            entry.stored_path = p;
            state->indexes[name] = std::move(entry);
        } else if (d.kind == "COLL") {
            const std::size_t sp = d.rest.find(' ');
            const std::string name = d.rest.substr(0, sp);
            if (name.empty()) throw fail(d.line, "malformed COLL record");
            if (state->collections.count(name)) throw fail(d.line, "duplicate collection '" + name + "'");
            VirtualCollection c;
            c.name = name;
            std::vector<ItemRef> refs;
            if (sp != std::string::npos) {
                for (const auto &t : split_refs(d.rest.substr(sp + 1))) {
                    try {
                        refs.push_back(ItemRef::parse(t));
                    } catch (const ParseError &e) {
                        throw fail(d.line, "malformed reference '" + t + "'");
                    }
                }
            }
            c.add(refs);
            state->collections[name] = std::move(c);
        }
    }
    cat->state_ = std::move(state);
    return cat;
}

}
