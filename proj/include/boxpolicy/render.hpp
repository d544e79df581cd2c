#pragma once

#include <cstddef>
#include <string>

#include "boxpolicy/policy_io.hpp"

namespace boxpolicy {

// IF / ELSE IF rules, one per box, then the fallback. Bounds print with two
// decimals; a dimension whose bounds cover the observed range is left out.
std::string render_text(const PolicyDocument& doc);

// Chain graph in DOT: condition nodes rule_1..rule_k, terminals `treat` and
// `fallback`.
std::string render_dot(const PolicyDocument& doc);

// CSV `x0,...,x{d-1},decision` over a lattice with `points` values per
// dimension spanning `region`. Throws PreconditionError beyond `guard` rows.
std::string render_grid(const PolicyDocument& doc, const Hyperbox& region, std::size_t points,
                        std::size_t guard = 1000000);

}  // namespace boxpolicy
