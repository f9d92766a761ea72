#pragma once

#include <string>

#include "synth/ir.hpp"

namespace synth {

// Pseudo-C for a frozen solution (no open holes or unbound placeholders).
// Loop and branch skeletons come from fn.structure; loop headers and
// latches render as for/while lines rather than labeled blocks.
std::string pseudo_c(const ir::Function& fn);

}  // namespace synth
