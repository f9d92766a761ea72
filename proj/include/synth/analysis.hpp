#pragma once

#include <cstdint>
#include <vector>

#include "synth/ir.hpp"

namespace synth::ir {

// Dominator tree over a Function's block graph. Blocks are assumed reachable
// from block 0; preds must be current (recompute_preds).
struct DomTree {
  std::vector<uint32_t> idom;      // idom[0] == 0
  std::vector<std::vector<uint32_t>> children;
  std::vector<uint32_t> preorder;  // root-first walk of the tree
};

DomTree dominance_tree(const Function& f);

// True when block a dominates block b (a == b counts).
bool dominates(const DomTree& dt, uint32_t a, uint32_t b);

// Values usable at segment `seg_limit` of `block`'s body: parameters, phis
// of the block itself, defs in body segments before seg_limit, and every
// value defined in a strictly dominating block. Placeholder values are
// excluded; fills bind them later.
std::vector<uint32_t> live_values_at(const Function& f, const DomTree& dt, uint32_t block,
                                     uint32_t seg_limit = 0);

}  // namespace synth::ir
