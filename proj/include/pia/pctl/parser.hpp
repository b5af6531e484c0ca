#pragma once

#include <string_view>

#include "pia/pctl/formula.hpp"

namespace pia::pctl {

/// Parses the PRISM-like concrete syntax, e.g. `P=? [ F<=100 "collision" ]`.
///
/// Prefix operators (!, X, F, G) bind tighter than &, which binds tighter
/// than |; U is loosest and right-associative. X, F, G and U are reserved.
/// Quoted names and bare
/// identifiers are atoms; `name op int` compares a feature. Boolean
/// combinations of state formulas collapse into a single state formula.
/// Throws SyntaxError carrying the byte offset of the problem.
Query parse_formula(std::string_view text);

}  // namespace pia::pctl
