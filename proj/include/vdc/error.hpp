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

#include <cstddef>
#include <stdexcept>
#include <string>


namespace vdc {

/** Coarse error classes.  The CLI maps these onto process exit codes. */
enum class ErrorCode {
    Parse,
    Source,
    Capability,
    Load,
    Coercion,
    Plan,
    Execution,
    Ingest,
    IndexFormat,
    Collection,
    AccessDenied,
    NotFound,
    Integrity,
    Registration,
    Usage,
    Locked,
};

const char * to_string(ErrorCode code);

struct Error : std::runtime_error
{
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) { }

    ErrorCode code() const { return code_; }

    private:
    ErrorCode code_;
};

/** A syntax or grammar violation.  `offset` is a byte offset into the parsed text; `line` is 1-based when the input
 * format is line oriented and 0 otherwise. */
struct ParseError : Error
{
    ParseError(const std::string &what, std::size_t offset, std::size_t line = 0)
        : Error(ErrorCode::Parse, decorate(what, offset, line)), offset(offset), line(line)
    { }

    std::size_t offset;
    std::size_t line;

    private:
    static std::string decorate(const std::string &what, std::size_t offset, std::size_t line) {
        if (line)
            return "line " + std::to_string(line) + ": " + what;
        return "offset " + std::to_string(offset) + ": " + what;
    }
};

#define VDC_DECLARE_ERROR(NAME, CODE) \
    struct NAME : Error { explicit NAME(const std::string &what) : Error(ErrorCode::CODE, what) { } }

VDC_DECLARE_ERROR(SourceError, Source);
VDC_DECLARE_ERROR(CapabilityError, Capability);
VDC_DECLARE_ERROR(LoadError, Load);
VDC_DECLARE_ERROR(PlanError, Plan);
VDC_DECLARE_ERROR(ExecutionError, Execution);
VDC_DECLARE_ERROR(IngestError, Ingest);
VDC_DECLARE_ERROR(IndexFormatError, IndexFormat);
VDC_DECLARE_ERROR(CollectionError, Collection);
VDC_DECLARE_ERROR(AccessDenied, AccessDenied);
VDC_DECLARE_ERROR(NotFound, NotFound);
VDC_DECLARE_ERROR(IntegrityError, Integrity);
VDC_DECLARE_ERROR(RegistrationError, Registration);
VDC_DECLARE_ERROR(UsageError, Usage);
VDC_DECLARE_ERROR(LockedError, Locked);

#undef VDC_DECLARE_ERROR

}
