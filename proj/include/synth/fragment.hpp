#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synth/types.hpp"

namespace synth {

// Structural building blocks. Computation kinds occupy a block and chain
// through their single continuation slot (linear and affine-index end a
// chain); iteration and control-flow kinds open nested regions.
enum class FragmentKind : uint8_t {
  Linear,
  AffineIndex,
  GatherIndex,
  Accumulate,
  StoreOutput,
  FixedLoop,
  ArgLoop,
  WhileLoop,
  If,
  IfElse,
  Seq,
  Start,
  End,
};

constexpr uint32_t kNoArg = 0xffffffffu;

int slot_count(FragmentKind k);
const char* kind_name(FragmentKind k);

struct Fragment {
  FragmentKind kind = FragmentKind::Linear;
  uint32_t arg = kNoArg;  // param index bound by gather/store-output/arg-loop
  int64_t bound = 0;      // fixed-loop trip count
  std::vector<Fragment> children;

  bool operator==(const Fragment& o) const;
};

// Total: b lands in a's first empty slot (depth-first, left to right); a
// full tree overflows into seq(a, b). Start and End are identities.
Fragment compose(Fragment a, Fragment b);
Fragment compose_sequence(const std::vector<Fragment>& seq);

// Preorder flattening; for trees built by compose_sequence this recovers
// the original sequence.
std::vector<Fragment> flatten(const Fragment& tree);

// Abstraction used by the models: kind plus the bound argument's type
// shape, e.g. "gather(ptr-float)", "arg-loop(int)", "fixed-loop(const)".
std::string fragment_key(const Fragment& f, const Signature& sig);
inline const char* start_key() { return "f_start"; }
inline const char* end_key() { return "f_end"; }

// Concrete notation, e.g. "arg-loop(c)" or "fixed-loop(5)".
std::string print_fragment(const Fragment& f, const Signature& sig);
std::string print_sequence(const std::vector<Fragment>& seq, const Signature& sig);
std::vector<Fragment> parse_sequence(const std::string& text, const Signature& sig);

struct FragmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every kind instantiated over every type-compatible argument choice.
std::vector<Fragment> instantiate_population(const Signature& sig);

}  // namespace synth
