#pragma once

#include <string>
#include <variant>

#include "parric/problem.hpp"

namespace parric {

using AnyProblem = std::variant<UftocProblem, MheProblem>;

/// Reads a problem file ("kind": "uftoc" or "mhe", schema version 1).
/// Numeric payloads round-trip bit-identically (decimal storage with up to 17
/// significant digits).  Square weight blocks are symmetrized on load; an
/// asymmetry above 1e-10 relative gets a one-line warning on stderr.  Parse
/// and schema failures throw ParseError naming the offending field.
AnyProblem load_problem(const std::string& path);

void save_problem(const UftocProblem& p, const std::string& path);
void save_problem(const MheProblem& m, const std::string& path);

/// Solution files are written deterministically: identical trajectories
/// produce identical bytes.
void save_solution(const Solution& s, const std::string& path);
Solution load_solution(const std::string& path);

}  // namespace parric
