#pragma once

#include <stdexcept>
#include <string>

namespace panens {

// Base for all library errors. `kind` is a stable machine-readable tag that
// the CLI prints in its single-line diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define PANENS_DEFINE_ERROR(Name)                                 \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& msg) : Error(#Name, msg) {} \
    }

PANENS_DEFINE_ERROR(DimsMismatch);
PANENS_DEFINE_ERROR(LengthMismatch);
PANENS_DEFINE_ERROR(RunSumMismatch);
PANENS_DEFINE_ERROR(NonFiniteCost);
PANENS_DEFINE_ERROR(InconsistentQueryCount);
PANENS_DEFINE_ERROR(ClassLogitLengthMismatch);
PANENS_DEFINE_ERROR(InvalidWindow);
PANENS_DEFINE_ERROR(SpecInvalid);
PANENS_DEFINE_ERROR(FormatError);
PANENS_DEFINE_ERROR(IoError);

#undef PANENS_DEFINE_ERROR

}  // namespace panens
