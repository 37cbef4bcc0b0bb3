#pragma once

#include <string>

#include "deltaflow/poly.hpp"

namespace deltaflow {

// Integer polynomial in the given variables: + - * ^, parentheses, integer
// literals. Whitespace is ignored. Throws DomainError on malformed input.
ZPoly parse_polynomial(const std::string& text, const Variables& vars);
ZPoly parse_polynomial(const std::string& text);

}  // namespace deltaflow
