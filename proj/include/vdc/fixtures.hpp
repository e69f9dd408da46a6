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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>


namespace vdc {

class Catalogue;

enum class FixtureScale { Desk, Paper };

std::optional<FixtureScale> parse_fixture_scale(std::string_view s); ///< "desk" or "paper"

struct FixtureSpec
{
    std::uint64_t seed = 42;
    FixtureScale scale = FixtureScale::Desk;
    std::filesystem::path out;
};

/** Row counts per source for a scale. */
struct FixtureSizes
{
    std::size_t hgv;
    std::size_t volterra;
    std::size_t iaph;
    std::size_t homonyms_near;
    std::size_t homonyms_far;
};

FixtureSizes fixture_sizes(FixtureScale scale);

/** One line of `manifest.csv` (`class,key,ref_a,ref_b,value`).
 *
 * Classes: `homonym_near` / `homonym_far` (key = person, refs = volterra and iaph items, value = gap in whole years,
 * rounded up), `shared_findspot` / `shared_category` (value = `source=count` pairs joined by `;`) and `count`. */
struct ManifestEntry
{
    std::string cls;
    std::string key;
    std::string ref_a;
    std::string ref_b;
    std::string value;

    auto operator<=>(const ManifestEntry&) const = default;
};

struct OverlapManifest
{
    std::vector<ManifestEntry> entries; ///< sorted

    std::vector<ManifestEntry> of_class(std::string_view cls) const;
    std::optional<std::size_t> count(std::string_view key) const;

    std::string to_csv() const;
    static OverlapManifest parse(std::string_view csv_text);
};

/** Writes the `hgv`, `volterra` and `iaph` sources, `translations/de_en.csv`, `views/`, `recipes/` and
 * `manifest.csv` under `params.out`, then re-verifies the tree.  Throws `UsageError` if `params.out` is a non-empty
 * directory. */
OverlapManifest generate_fixtures(const FixtureSpec &params);

struct VerifyReport
{
    bool ok = false;
    std::vector<std::string> problems;
    std::string summary;
};

/** Re-derives every manifest class from the files alone and compares. */
VerifyReport verify_manifest(const std::filesystem::path &dir);

/** Registers the three fixture sources under `mode`, the translation table and the views. */
void register_fixtures(Catalogue &catalogue, const std::filesystem::path &dir, AccessMode mode = AccessMode::Vault);

}
