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

#include <string>
#include <string_view>
#include <vector>


namespace vdc::unicode {

/** Returns true iff `s` is well-formed UTF-8. */
bool is_valid_utf8(std::string_view s);

/** NFC-normalizes UTF-8 text.  Ill-formed sequences are replaced by U+FFFD. */
std::string nfc(std::string_view s);

/** NFC followed by per-code-point simple case folding (CaseFolding.txt status C and S). */
std::string fold(std::string_view s);

/** Splits `s` into folded tokens.  Token boundaries are all code points that are neither letters (general category L)
 * nor decimal digits (Nd). */
std::vector<std::string> tokenize(std::string_view s);

/** Substring test on folded text, as used by the `CONTAINS` predicate. */
bool folded_contains(std::string_view haystack, std::string_view needle);

}
