#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rwslow/group.hpp"
#include "rwslow/measures.hpp"

namespace rwslow {

/// `head(arg, arg, ...)` split at top-level commas; a bare word has no args.
struct Token {
  std::string head;
  std::vector<std::string> args;
  bool has_parens = false;
};

Token split_token(std::string_view text);

/// Measure descriptors:
///   delta | lazy | radialV(ell,R) | radialD(ell,R) | genpow(ell,R)
///   | stable(alpha,R) | lazify(desc) | subord(coeffs,base=desc,N,cap[,complete])
/// with ell a slowly varying token and coeffs a coefficient token. The built
/// measure's descriptor() reproduces the normalized token.
Measure parse_measure(const Group& group, std::string_view descriptor);

/// Normalized text of a descriptor (numbers reformatted, spaces removed).
std::string normalize_measure(std::string_view descriptor);

}  // namespace rwslow
