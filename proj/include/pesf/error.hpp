#pragma once

#include <stdexcept>
#include <string>

namespace pesf {

// Every failure the library can report. The CLI maps these onto exit codes;
// tests match on them.
enum class ErrorCode {
    // pe
    NotMz,
    NotPe,
    Truncated,
    UnsupportedPe32Plus,
    MalformedSectionTable,
    RvaNotMapped,
    OffsetNotMapped,
    // carrier
    InsufficientCapacity,
    // crypto
    EmptyPassword,
    BadKeyLength,
    AuthenticationFailed,
    InvalidKdfParams,
    // container
    BadMagic,
    UnsupportedVersion,
    TruncatedContainer,
    // stego
    NoContainerFound,
    LengthMismatch,
    // corpus
    InvalidSpec,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace pesf
