#include "pesf/error.hpp"

namespace pesf {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotMz: return "NotMz";
    case ErrorCode::NotPe: return "NotPe";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::UnsupportedPe32Plus: return "UnsupportedPe32Plus";
    case ErrorCode::MalformedSectionTable: return "MalformedSectionTable";
    case ErrorCode::RvaNotMapped: return "RvaNotMapped";
    case ErrorCode::OffsetNotMapped: return "OffsetNotMapped";
    case ErrorCode::InsufficientCapacity: return "InsufficientCapacity";
    case ErrorCode::EmptyPassword: return "EmptyPassword";
    case ErrorCode::BadKeyLength: return "BadKeyLength";
    case ErrorCode::AuthenticationFailed: return "AuthenticationFailed";
    case ErrorCode::InvalidKdfParams: return "InvalidKdfParams";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedContainer: return "TruncatedContainer";
    case ErrorCode::NoContainerFound: return "NoContainerFound";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    }
    return "UnknownError";
}

} // namespace pesf
