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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>


namespace vdc::xml {

struct Element;

/** A child node: either character data or a nested element. */
using Node = std::variant<std::string, std::unique_ptr<Element>>;

struct Element
{
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Node> children;
    std::size_t offset = 0; ///< byte offset of the start tag

    const std::string * attribute(std::string_view key) const;

    /** All character data below this element, in document order, with tags removed. */
    std::string text_content() const;
};

/** Parses a well-formed document: one root element, optional XML declaration, comments, processing instructions,
 * CDATA sections, and the five predefined plus numeric character references.  DOCTYPE declarations are rejected.
 * Throws `ParseError` with the byte offset of the problem. */
std::unique_ptr<Element> parse(std::string_view text);

/** Collapses runs of XML whitespace to single spaces and trims both ends. */
std::string collapse_whitespace(std::string_view s);

}
