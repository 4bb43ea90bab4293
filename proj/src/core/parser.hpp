#pragma once

#include <string>
#include <string_view>

#include "core/term.hpp"

namespace rmpc {

// Parses a bare term. Grammar, loosest binding last:
//
//   term    := par
//   par     := cho ( "|[" names? "]|" cho )*        left associative
//   cho     := pre ( "+" pre )*                     left associative
//   pre     := "0" | NAME | "(" term ")"
//            | "<" NAME "," RATE ">" ( "[" INT "]" )? "." pre
//
// "#" starts a comment that runs to the end of the line. Throws ParseError
// with 1-based line/column on malformed input.
TermPtr parse_term(std::string_view text);

// Parses either a bare term or a model file of the shape
//
//   ("def" NAME "=" term)*  "system" "=" term
//
// Definitions are non-recursive abbreviations, expanded where referenced;
// a definition may only mention names introduced before it.
TermPtr parse_model(std::string_view text);

}  // namespace rmpc
