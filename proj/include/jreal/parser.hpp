#pragma once

#include <stdexcept>
#include <string>

#include "jreal/syntax.hpp"

namespace jreal {

class ParseError : public std::runtime_error {
   public:
    ParseError(const std::string& msg, int line, int col)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg),
          line(line),
          col(col) {}
    int line, col;
};

// Modal formulas; annotated modalities are written [3]p and <3>p.
Fm parse_formula(const std::string& src);
// Justification formulas: TERM : F in addition to the propositional connectives.
JFm parse_jformula(const std::string& src);
Tm parse_term(const std::string& src);

}  // namespace jreal
