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


#include "vdc/unicode.hpp"

#include "vdc/error.hpp"
#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/utf8.h>
#include <unicode/ustring.h>
#include <algorithm>


namespace vdc {

const char * to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::Parse:        return "ParseError";
        case ErrorCode::Source:       return "SourceError";
        case ErrorCode::Capability:   return "CapabilityError";
        case ErrorCode::Load:         return "LoadError";
        case ErrorCode::Coercion:     return "CoercionError";
        case ErrorCode::Plan:         return "PlanError";
        case ErrorCode::Execution:    return "ExecutionError";
        case ErrorCode::Ingest:       return "IngestError";
        case ErrorCode::IndexFormat:  return "IndexFormatError";
        case ErrorCode::Collection:   return "CollectionError";
        case ErrorCode::AccessDenied: return "AccessDenied";
        case ErrorCode::NotFound:     return "NotFound";
        case ErrorCode::Integrity:    return "IntegrityError";
        case ErrorCode::Registration: return "RegistrationError";
        case ErrorCode::Usage:        return "UsageError";
        case ErrorCode::Locked:       return "LockedError";
    }
    return "Error";
}

}


namespace vdc::unicode {

namespace {

bool is_ascii(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

std::u16string to_utf16(std::string_view s)
{
    std::u16string out;
    out.reserve(s.size());
    int32_t i = 0;
    const int32_t len = static_cast<int32_t>(s.size());
    const auto *bytes = reinterpret_cast<const uint8_t*>(s.data());
    while (i < len) {
        UChar32 c;
        U8_NEXT(bytes, i, len, c);
        if (c < 0) c = 0xFFFD;
        if (c <= 0xFFFF) {
            out.push_back(static_cast<char16_t>(c));
        } else {
            out.push_back(static_cast<char16_t>(U16_LEAD(c)));
            out.push_back(static_cast<char16_t>(U16_TRAIL(c)));
        }
    }
    return out;
}

void append_utf8(std::string &out, UChar32 c)
{
    char buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(reinterpret_cast<uint8_t*>(buf), n, c);
    out.append(buf, static_cast<std::size_t>(n));
}

std::string to_utf8(const char16_t *s, std::size_t len)
{
    std::string out;
    out.reserve(len);
    std::size_t i = 0;
    while (i < len) {
        UChar32 c;
        U16_NEXT(s, i, len, c);
        append_utf8(out, c);
    }
    return out;
}

/** Calls `fn(code_point)` for every code point of `s`; ill-formed bytes decode to U+FFFD. */
template<typename Fn>
void for_each_code_point(std::string_view s, Fn &&fn)
{
    int32_t i = 0;
    const int32_t len = static_cast<int32_t>(s.size());
    const auto *bytes = reinterpret_cast<const uint8_t*>(s.data());
    while (i < len) {
        UChar32 c;
        U8_NEXT(bytes, i, len, c);
        if (c < 0) c = 0xFFFD;
        fn(c);
    }
}

}

bool is_valid_utf8(std::string_view s)
{
    int32_t i = 0;
    const int32_t len = static_cast<int32_t>(s.size());
    const auto *bytes = reinterpret_cast<const uint8_t*>(s.data());
    while (i < len) {
        UChar32 c;
        U8_NEXT(bytes, i, len, c);
        if (c < 0) return false;
    }
    return true;
}

std::string nfc(std::string_view s)
{
    if (is_ascii(s)) return std::string(s);

    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2 *norm = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");

    const std::u16string src = to_utf16(s);
    const auto *usrc = reinterpret_cast<const UChar*>(src.data());
    const int32_t ulen = static_cast<int32_t>(src.size());
    if (unorm2_isNormalized(norm, usrc, ulen, &status) && U_SUCCESS(status))
        return to_utf8(src.data(), src.size());

    status = U_ZERO_ERROR;
    std::u16string dst(src.size() * 3 + 16, u'\0');
    int32_t n = unorm2_normalize(norm, usrc, ulen, reinterpret_cast<UChar*>(dst.data()),
                                 static_cast<int32_t>(dst.size()), &status);
    if (status == U_BUFFER_OVERFLOW_ERROR) {
        status = U_ZERO_ERROR;
        dst.assign(static_cast<std::size_t>(n), u'\0');
        n = unorm2_normalize(norm, usrc, ulen, reinterpret_cast<UChar*>(dst.data()), n, &status);
    }
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalization failed");
    return to_utf8(dst.data(), static_cast<std::size_t>(n));
}

std::string fold(std::string_view s)
{
    if (is_ascii(s)) {
        std::string out(s);
        for (char &c : out)
            if (c >= 'A' and c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return out;
    }
    const std::string normalized = nfc(s);
    std::string out;
    out.reserve(normalized.size());
    for_each_code_point(normalized, [&](UChar32 c) { append_utf8(out, u_foldCase(c, U_FOLD_CASE_DEFAULT)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view s)
{
    std::vector<std::string> tokens;
    std::string current;
    const std::string folded = fold(s);
    for_each_code_point(folded, [&](UChar32 c) {
        if (u_isalpha(c) or u_isdigit(c)) {
            append_utf8(current, c);
        } else if (not current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    });
    if (not current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool folded_contains(std::string_view haystack, std::string_view needle)
{
    return fold(haystack).find(fold(needle)) != std::string::npos;
}

}
