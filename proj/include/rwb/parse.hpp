#pragma once

#include <map>
#include <string>

#include "rwb/expression.hpp"

namespace rwb {

/// Calculator grammar over the generator constructors:
///
///   sum     := prod (('+' | '-') prod)*
///   prod    := factor ('*' factor)*
///   factor  := '-' factor | primary
///   primary := number | 'i' | call | '(' sum ')'
///   call    := ('cliff' | 'field' | 'zeta') '(' name ')'
///            | 'res' '(' sum ',' name ')'
///
/// `name` refers to a bound test function; the first argument of `res` must
/// evaluate to a real scalar. Parse failures raise std::invalid_argument as
/// "parse error at position N: ..." with 1-based byte positions; domain
/// errors from the constructors propagate unchanged.
Expression parse_expression(const std::string& text, const ModelPtr& model,
                            const std::map<std::string, Vec>& names);

}  // namespace rwb
