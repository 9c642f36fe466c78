// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sagsin {

enum class ErrorCode {
    InvalidArgument,
    ZeroDistance,
    InsufficientTrials,
    FreeSpaceDivergence,
    MissingCalibration,
    InvalidRegion,
    DegenerateFit,
    InfeasibleLink,
    ZeroRate,
    Unreachable,
    CombinatorialBlowup,
    NoFeasibleTree,
    ParseError,
    EmptyDataset,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::InsufficientTrials: return "InsufficientTrials";
    case ErrorCode::FreeSpaceDivergence: return "FreeSpaceDivergence";
    case ErrorCode::MissingCalibration: return "MissingCalibration";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InfeasibleLink: return "InfeasibleLink";
    case ErrorCode::ZeroRate: return "ZeroRate";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::NoFeasibleTree: return "NoFeasibleTree";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

// All library failures surface as this type; code() is stable for callers.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) fail(code, what);
}

} // namespace sagsin
