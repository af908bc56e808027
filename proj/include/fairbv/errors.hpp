#pragma once

#include <stdexcept>
#include <string>

namespace fairbv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyClassError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct LabelError : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct InfeasiblePolicyError : Error { using Error::Error; };
struct ZeroDenominatorError : Error { using Error::Error; };
struct PlanError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

}  // namespace fairbv
