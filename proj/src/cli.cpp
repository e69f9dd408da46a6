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


#include "vdc/cli.hpp"

#include "vdc/csv.hpp"
#include "vdc/datacentre.hpp"
#include "vdc/error.hpp"
#include "vdc/fixtures.hpp"
#include "vdc/query.hpp"
#include "vdc/textindex.hpp"
#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>


namespace vdc::cli {

namespace fs = std::filesystem;

namespace {

fs::path default_catalogue()
{
    if (const char *env = std::getenv("VDC_CATALOGUE"); env and *env) return env;
    return "catalogue.vdc";
}

std::string read_file(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (not in) throw UsageError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int exit_code(const Error &e)
{
    switch (e.code()) {
        case ErrorCode::Usage:
        case ErrorCode::Locked: return kUsage;
        case ErrorCode::AccessDenied: return kDenied;
        default: return kData;
    }
}

std::string join_fields(const std::vector<std::pair<std::string, std::string>> &fields)
{
    std::string out;
    for (const auto &[k, v] : fields) {
        if (not out.empty()) out.push_back(';');
        out += k + "=" + v;
    }
    return out;
}

void print_warnings(const std::vector<CoercionError> &warnings, std::ostream &err)
{
    for (const auto &w : warnings) err << "warning: " << w.what() << '\n';
}

void print_warnings(const std::vector<std::string> &warnings, std::ostream &err)
{
    for (const auto &w : warnings) err << "warning: " << w << '\n';
}

struct Options
{
    std::string catalogue;

    std::string source_id, kind = "tabular", path, mode = "live";
    std::string file, xlate_id;
    std::string query_text, format = "csv";
    bool no_pushdown = false, explain = false;
    std::string recipe;
    std::vector<std::string> recipes;
    std::string collection, terms, field, bbox;
    std::size_t limit = 0;
    std::vector<std::string> add_refs;
    std::string ref;
    std::uint64_t seed = 42;
    std::string scale = "desk", out_dir;
    std::string strict_translate, manifest_fields;
};

}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    Options o;
    CLI::App app{ "Virtual data centre: federated queries, mediated views and text indexes over autonomous sources", "vdc" };
    app.fallthrough();
    app.require_subcommand(1, 1);
    app.add_option("--catalogue", o.catalogue, "Catalogue file (default: $VDC_CATALOGUE or ./catalogue.vdc)");

    auto *source = app.add_subcommand("source", "Manage registered sources");
    source->require_subcommand(1, 1);
    auto *source_add = source->add_subcommand("add", "Register a source");
    source_add->add_option("id", o.source_id)->required();
    source_add->add_option("--kind", o.kind, "tabular or xml")->check(CLI::IsMember({ "tabular", "xml" }));
    source_add->add_option("--path", o.path)->required();
    source_add->add_option("--mode", o.mode, "vault, live or index-only")->check(CLI::IsMember({ "vault", "live", "index-only" }));
    auto *source_remove = source->add_subcommand("remove", "Deregister a source");
    source_remove->add_option("id", o.source_id)->required();
    auto *source_list = source->add_subcommand("list", "List sources");

    auto *view = app.add_subcommand("view", "Manage views");
    view->require_subcommand(1, 1);
    auto *view_define = view->add_subcommand("define", "Define a view from a file");
    view_define->add_option("file", o.file)->required();
    auto *view_list = view->add_subcommand("list", "List views with their schemas");

    auto *xlate = app.add_subcommand("xlate", "Manage translation tables");
    xlate->require_subcommand(1, 1);
    auto *xlate_add = xlate->add_subcommand("add", "Register a translation table");
    xlate_add->add_option("id", o.xlate_id)->required();
    xlate_add->add_option("file", o.file)->required();

    auto *config = app.add_subcommand("config", "Set catalogue options");
    config->add_option("--strict-translate", o.strict_translate)->check(CLI::IsMember({ "true", "false" }));
    config->add_option("--manifest-fields", o.manifest_fields, "Comma-separated stored fields published for index-only sources ('-' for none)");

    auto *query = app.add_subcommand("query", "Run a query");
    query->add_option("query", o.query_text)->required();
    query->add_option("--format", o.format)->check(CLI::IsMember({ "csv", "json" }));
    query->add_flag("--no-pushdown", o.no_pushdown);
    query->add_flag("--explain", o.explain, "Print the plan instead of running it");

    auto *ingest = app.add_subcommand("ingest", "Ingest a source through a recipe and list the documents");
    ingest->add_option("source", o.source_id)->required();
    ingest->add_option("--recipe", o.recipe)->required();

    auto *index = app.add_subcommand("index", "Manage indexes");
    index->require_subcommand(1, 1);
    auto *index_build = index->add_subcommand("build", "Build a collection index");
    index_build->add_option("collection", o.collection)->required();
    index_build->add_option("--recipe", o.recipes)->required();

    auto *search = app.add_subcommand("search", "Search a collection index");
    search->add_option("collection", o.collection)->required();
    search->add_option("terms", o.terms);
    search->add_option("--field", o.field);
    search->add_option("--bbox", o.bbox, "min_lat,min_lon,max_lat,max_lon");
    search->add_option("--limit", o.limit)->check(CLI::PositiveNumber);

    auto *fetch = app.add_subcommand("fetch", "Fetch one record by reference");
    fetch->add_option("ref", o.ref)->required();

    auto *coll = app.add_subcommand("coll", "Manage virtual collections");
    coll->require_subcommand(1, 1);
    auto *coll_update = coll->add_subcommand("update", "Add references to a collection");
    coll_update->add_option("name", o.collection)->required();
    coll_update->add_option("--add", o.add_refs)->required();
    auto *coll_resolve = coll->add_subcommand("resolve", "Resolve every reference of a collection");
    coll_resolve->add_option("name", o.collection)->required();

    auto *fixtures = app.add_subcommand("fixtures", "Synthetic fixtures");
    fixtures->require_subcommand(1, 1);
    auto *fixtures_generate = fixtures->add_subcommand("generate", "Generate a fixture tree");
    fixtures_generate->add_option("--seed", o.seed);
    fixtures_generate->add_option("--scale", o.scale)->check(CLI::IsMember({ "desk", "paper" }));
    fixtures_generate->add_option("--out", o.out_dir)->required();
    auto *fixtures_verify = fixtures->add_subcommand("verify", "Re-derive a fixture manifest from the files");
    fixtures_verify->add_option("dir", o.out_dir)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp &e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "vdc: " << e.what() << '\n';
        return kUsage;
    }

    const fs::path catalogue_path = o.catalogue.empty() ? default_catalogue() : fs::path(o.catalogue);

    auto mutating = [&](auto &&fn) {
        auto cat = Catalogue::open_locked(catalogue_path, false);
        fn(*cat);
        cat->save();
    };
    auto reading = [&] { return Catalogue::open(catalogue_path)->snapshot(); };

    try {
        if (source_add->parsed()) {
            mutating([&](Catalogue &c) {
                c.register_source({ o.source_id, *parse_source_kind(o.kind), fs::absolute(o.path), *parse_access_mode(o.mode) });
            });
        } else if (source_remove->parsed()) {
            mutating([&](Catalogue &c) { c.deregister_source(o.source_id); });
        } else if (source_list->parsed()) {
            const auto snap = reading();
            out << csv::format_record({ "id", "kind", "mode", "sealed", "path" });
            for (const auto &id : snap.source_ids()) {
                const auto d = *snap.source(id);
                out << csv::format_record({ id, to_string(d.kind), to_string(d.mode), snap.sealed(id) ? "true" : "false",
                                            d.path.string() });
            }
        } else if (view_define->parsed()) {
            mutating([&](Catalogue &c) { out << c.define_view(o.file) << '\n'; });
        } else if (view_list->parsed()) {
            const auto snap = reading();
            out << csv::format_record({ "view", "column", "kind" });
            for (const auto &name : snap.view_names()) {
                const auto schema = resolve_view_schema(*snap.view(name), snap.mediation_context());
                for (const auto &c : schema.columns) out << csv::format_record({ name, c.name, to_string(c.kind) });
            }
        } else if (xlate_add->parsed()) {
            mutating([&](Catalogue &c) { c.add_translation(o.xlate_id, o.file); });
        } else if (config->parsed()) {
            mutating([&](Catalogue &c) {
                CatalogueOptions opts = c.snapshot().options();
                if (not o.strict_translate.empty()) opts.strict_translate = o.strict_translate == "true";
                if (not o.manifest_fields.empty()) {
                    opts.manifest_fields.clear();
                    if (o.manifest_fields != "-") {
                        std::stringstream ss(o.manifest_fields);
                        std::string f;
                        while (std::getline(ss, f, ','))
                            if (not f.empty()) opts.manifest_fields.push_back(f);
                    }
                }
                c.set_options(opts);
            });
        } else if (query->parsed()) {
            const auto snap = reading();
            PlanOptions po;
            po.pushdown = not o.no_pushdown;
            if (o.explain) {
                out << plan_query(parse_query(o.query_text), snap, po).root->explain();
            } else {
                const ResultSet rs = snap.query(o.query_text, po);
                out << (o.format == "json" ? format_json_lines(rs) : format_csv(rs));
                print_warnings(rs.warnings, err);
            }
        } else if (ingest->parsed()) {
            const auto snap = reading();
            const IngestRecipe recipe = parse_recipe(read_file(o.recipe));
            const IngestResult res = snap.ingest(o.source_id, recipe);
            out << csv::format_record({ "doc_id", "ref", "fields" });
            for (const auto &d : res.documents) out << csv::format_record({ d.doc_id, d.ref.to_string(), join_fields(d.fields) });
            print_warnings(res.warnings, err);
        } else if (index_build->parsed()) {
            std::vector<fs::path> files(o.recipes.begin(), o.recipes.end());
            mutating([&](Catalogue &c) {
                const IngestResult res = c.build_index(o.collection, files);
                print_warnings(res.warnings, err);
                out << "indexed " << res.documents.size() << " documents into '" << o.collection << "'\n";
            });
        } else if (search->parsed()) {
            const auto snap = reading();
            SearchQuery q = SearchQuery::keywords(o.terms);
            if (not o.field.empty()) q.field = o.field;
            if (not o.bbox.empty()) q.bbox = parse_bbox(o.bbox);
            if (o.limit) q.limit = o.limit;
            out << csv::format_record({ "doc_id", "ref", "score" });
            for (const auto &h : snap.search(o.collection, q))
                out << csv::format_record({ h.doc_id, h.ref.to_string(), std::to_string(h.score) });
        } else if (fetch->parsed()) {
            const auto snap = reading();
            const FetchedRecord rec = snap.fetch_record(ItemRef::parse(o.ref));
            ResultSet rs;
            rs.schema = rec.schema;
            rs.rows.push_back(rec.row);
            out << format_csv(rs);
        } else if (coll_update->parsed()) {
            mutating([&](Catalogue &c) {
                const auto before = c.snapshot();
                const std::size_t had = before.collection(o.collection) ? before.collection(o.collection)->refs.size() : 0;
                const VirtualCollection vc = c.collection_update(o.collection, o.add_refs);
                out << "collection '" << vc.name << "': " << vc.refs.size() - had << " added, " << vc.refs.size()
                    << " total\n";
            });
        } else if (coll_resolve->parsed()) {
            const auto snap = reading();
            const auto &published = snap.options().manifest_fields;
            out << csv::format_record({ "ref", "status", "doc_id", "fields" });
            for (const auto &r : snap.collection_resolve(o.collection)) {
                switch (r.status) {
                    case ResolvedRef::Status::Record: {
                        std::vector<std::pair<std::string, std::string>> fields;
                        for (std::size_t i = 0; i != r.schema.arity(); ++i)
                            fields.emplace_back(r.schema.columns[i].name, r.row[i].to_display());
                        out << csv::format_record({ r.ref.to_string(), "record", "-", join_fields(fields) });
                        break;
                    }
                    case ResolvedRef::Status::Stub: {
                        std::vector<std::pair<std::string, std::string>> fields;
                        for (const auto &name : published) {
                            auto it = std::find_if(r.stub.begin(), r.stub.end(), [&](const auto &p) { return p.first == name; });
                            fields.emplace_back(name, it == r.stub.end() ? "-" : it->second);
                        }
                        fields.emplace_back("record", "-");
                        out << csv::format_record({ r.ref.to_string(), "stub", r.doc_id, join_fields(fields) });
                        break;
                    }
                    case ResolvedRef::Status::Error:
                        out << csv::format_record({ r.ref.to_string(), "error", "-", r.error });
                        break;
                }
            }
        } else if (fixtures_generate->parsed()) {
            const OverlapManifest m = generate_fixtures({ o.seed, *parse_fixture_scale(o.scale), o.out_dir });
            out << "wrote fixtures to '" << o.out_dir << "' (" << m.entries.size() << " manifest entries, "
                << m.count("homonym_near").value_or(0) << " near homonym pairs)\n";
        } else if (fixtures_verify->parsed()) {
            const VerifyReport rep = verify_manifest(o.out_dir);
            for (const auto &p : rep.problems) err << "mismatch: " << p << '\n';
            out << rep.summary << '\n';
            return rep.ok ? kOk : kData;
        }
    } catch (const Error &e) {
        err << "vdc: " << to_string(e.code()) << " error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception &e) {
        err << "vdc: " << e.what() << '\n';
        return kData;
    }
    return kOk;
}

}
