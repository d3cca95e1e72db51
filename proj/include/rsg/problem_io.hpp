#pragma once

#include <string>

#include "rsg/model.hpp"

namespace rsg {

/// Parses a problem description (see docs/problem_format.md). Throws
/// Error{kParseError} for malformed JSON or wrongly shaped entries, and the
/// generator / model validation errors for inconsistent data.
ProblemSpec parse_problem(const std::string& json_text);

/// Reads and parses a problem file. Throws Error{kParseError} when the file
/// cannot be read.
ProblemSpec load_problem(const std::string& path);

}  // namespace rsg
