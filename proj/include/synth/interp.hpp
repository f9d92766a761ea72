#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "synth/ir.hpp"
#include "synth/types.hpp"

namespace synth::interp {

enum class Outcome : uint8_t { Done, OutOfBounds, DivByZero, StepLimit };

const char* to_string(Outcome o);

// A candidate program: a sketch plus everything the search chose for it.
// The Function itself is shared and never mutated; fills, redirects and
// scratch live here so thousands of candidates can reuse one sketch.
struct CandidateView {
  const ir::Function* fn = nullptr;
  std::vector<std::vector<ir::Instr>> fills;      // indexed by hole id
  std::vector<uint32_t> redirect;                 // indexed by value id
  std::vector<uint32_t> pending_vals;             // indexed by pending slot
  std::vector<std::vector<ir::Instr>> ph_scratch; // indexed by placeholder

  // Identity redirects, empty fills and scratch, pending slots unresolved.
  void reset(const ir::Function& f);
};

struct RunResult {
  Outcome outcome = Outcome::Done;
  bool has_ret = false;
  Word ret = word_i(0);
};

// Reusable register file and buffer storage. load() copies one example's
// inputs in; run() mutates buffers, so reload before every run.
struct ExecEnv {
  std::vector<Word> regs;
  std::vector<std::vector<Word>> bufs; // indexed by param, empty for scalars
  std::vector<uint32_t> logical;       // example extent per param
  std::vector<uint32_t> alloc;         // usable cells per param, >= logical
  std::vector<Scalar> elem;            // element kind per pointer param
  std::vector<Word> args;              // scalar values, or the param's own index
  std::vector<Word> phi_buf;
  uint64_t step_limit = 100000;

  // min_alloc is the memory bound in effect; each buffer gets
  // max(min_alloc, its logical length) cells, zero beyond the extent.
  void load(const Signature& sig, const Example& ex, uint32_t min_alloc);
};

RunResult run(const CandidateView& view, ExecEnv& env);

// For functions with no holes or unresolved placeholders.
RunResult run_function(const ir::Function& fn, ExecEnv& env);

// Compares a finished run against the example's observed outputs.
bool matches(const Signature& sig, const Example& ex, const RunResult& res, const ExecEnv& env,
             double float_tol);

}  // namespace synth::interp
