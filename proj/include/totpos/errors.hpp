#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace totpos {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonPositiveEntry : Error {
    using Error::Error;
};

struct SupportViolation : Error {
    using Error::Error;
};

struct CoordinateOutOfRange : Error {
    using Error::Error;
};

struct InvalidParameters : Error {
    using Error::Error;
};

struct QuadratureFailure : Error {
    using Error::Error;
};

struct SizeLimit : Error {
    using Error::Error;
};

struct DegenerateRegression : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// Thrown by build_box when some counts are zero; carries the offending cells
/// so the caller can decide on a fallback.
struct ZeroCount : Error {
    std::vector<std::pair<int, int>> cells;

    explicit ZeroCount(std::vector<std::pair<int, int>> bad)
        : Error("count grid has " + std::to_string(bad.size()) + " zero cell(s)"),
          cells(std::move(bad)) {}
};

}  // namespace totpos
