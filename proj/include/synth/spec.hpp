#pragma once

#include <random>

#include "synth/oracle.hpp"
#include "synth/types.hpp"

namespace synth {

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SampledInputs {
  std::vector<Value> args;
  std::vector<std::optional<BufferData>> bufs;
};

// Draws one argument list. All buffers in a single call share one length
// draw, so an int argument used as a loop bound can be kept below every
// buffer's extent by the sampling intervals alone. Char cells are drawn
// from char_range (printable by default, hence never zero); string mode
// additionally plants a zero terminator at a uniform position.
SampledInputs sample_inputs(const Signature& sig, std::mt19937_64& rng,
                            const SamplingConfig& cfg);

// Runs the oracle on one sampled input. Input buffers are copied first, so
// the example keeps both the before and after contents.
Example observe(Oracle& oracle, const SampledInputs& in);

// Samples cfg.examples inputs and records the oracle's behavior on each.
// The first input is evaluated twice; if the two observations differ the
// oracle is nondeterministic and spec construction fails.
ProblemSpec build_spec(Oracle& oracle, const SamplingConfig& cfg);

// Relative float comparison with an absolute floor: values whose magnitudes
// both sit below 1e-6 compare equal regardless of tol.
bool float_close(double a, double b, double tol);

// Does (got_ret, got_bufs) reproduce the expected example? Buffer contents
// are compared over the example's logical length; got buffers may be longer.
bool equivalent(const Signature& sig, const Example& expected,
                const std::optional<Value>& got_ret,
                const std::vector<std::optional<BufferData>>& got_bufs, double tol);

// Pointer params whose contents changed in at least one example.
std::vector<uint32_t> detect_output_params(const ProblemSpec& spec);

}  // namespace synth
