#pragma once

#include "synth/fragment.hpp"
#include "synth/ir.hpp"

namespace synth {

struct Sketch {
  ir::Function fn;
  std::vector<Fragment> sequence;  // composition order that produced fn
};

// Total for any well-formed fragment tree; the result passes ir::validate.
Sketch compile_sketch(const Fragment& tree, const Signature& sig);
Sketch compile_sequence(const std::vector<Fragment>& seq, const Signature& sig);

// Value ids of loop counter phis, outermost loops first.
std::vector<uint32_t> induction_values(const ir::Function& fn);

}  // namespace synth
