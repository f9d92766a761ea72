#pragma once

#include <functional>
#include <optional>

#include "synth/analysis.hpp"
#include "synth/compile.hpp"
#include "synth/interp.hpp"
#include "synth/models.hpp"
#include "synth/spec.hpp"

namespace synth {

enum class Mode : uint8_t { Markov, IidOnly, Uniform };

struct SearchConfig {
  Mode mode = Mode::Markov;
  int max_sketches = 2000;
  long max_candidates_per_sketch = 50000;
  int max_instrs_per_hole = 4;  // enumeration units; clamped to ir::kMaxFillUnits
  std::vector<int64_t> constant_pool{0, 1, 2, -1};
  std::vector<int64_t> placeholder_value_pool{0, 1, 2, -1};
  double time_budget = 60.0;  // seconds
  uint64_t seed = 0;
  int workers = 1;  // candidates are evaluated serially regardless
};

// Buffer extent used for every pointer argument while searching; grows by
// doubling whenever a candidate faults, up to L_max.
struct MemoryEnv {
  uint32_t L = 4;
  uint32_t L_max = 32;
};

struct Verdict {
  enum class Kind : uint8_t { Pass, FailAt, OOB, Diverged };
  Kind kind = Kind::Pass;
  int example = -1;  // FailAt only
};

enum class Status : uint8_t { Solved, Exhausted, Timeout };
const char* to_string(Status s);

struct SynthesisReport {
  Status status = Status::Timeout;
  std::vector<Fragment> sequence;            // of the solution, when solved
  std::optional<ir::Function> solution;      // frozen, checks stripped
  long candidates = 0;
  int sketches = 0;
  double wall_time = 0.0;
  uint32_t mem_len = 4;  // buffer extent the solution verified at
  std::string pseudo_c_text, ir_text;
};

// Materializes both constant pools in the function's constant table so
// enumeration can reference them. Call once per sketch, before search.
void add_pool_constants(ir::Function& fn, const SearchConfig& cfg);

// One assignment of instruction sequences to a sketch's holes. unit_vals
// records the value id each enumeration unit exposes, per hole in order;
// unit_tys carries each exposed value's type. Hole ids stay untyped in the
// function's value table until a candidate is frozen, so the types must
// travel with the fill.
struct FillInfo {
  std::vector<std::vector<ir::Instr>> fills;
  std::vector<std::vector<uint32_t>> unit_vals;
  std::vector<std::vector<ir::Ty>> unit_tys;
};

// Enumerates every fill whose unit counts sum to total_units, in a fixed
// deterministic order. yield returning false stops the walk; the return
// value is false exactly when a yield stopped it.
bool enumerate_fills(const ir::Function& fn, const SearchConfig& cfg, int total_units,
                     const std::function<bool(const FillInfo&)>& yield);

// Enumerates placeholder bindings and pending phi inputs for one fill.
// Combinations that leave a hole's final value unused are skipped.
bool enumerate_bindings(const ir::Function& fn, const SearchConfig& cfg, const FillInfo& fi,
                        const std::function<bool(const interp::CandidateView&)>& yield);

// Runs every spec example at extent mem.L; stops at the first miss.
Verdict evaluate_candidate(const interp::CandidateView& view, const ProblemSpec& spec,
                           const MemoryEnv& mem, interp::ExecEnv& env);

// Inlines fills and scratch into a plain function, resolves redirects and
// pending inputs, drops unused pure instructions, strips check markers.
ir::Function freeze_candidate(const ir::Function& fn, const interp::CandidateView& view);

SynthesisReport synthesize(const ProblemSpec& spec, const IidModel* iid,
                           const MarkovModel* markov, const SearchConfig& cfg);

}  // namespace synth
