#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "synth/types.hpp"

namespace synth {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  std::optional<Value> ret;
  // Final contents of every pointer parameter, indexed by param position.
  std::vector<std::optional<BufferData>> bufs;
};

// An executable reference implementation. The synthesizer only ever calls
// evaluate(); it never sees source code or internals.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual const Signature& signature() const = 0;
  // `bufs` holds the input contents of pointer params (by param index) and
  // is taken by value: implementations mutate and return it.
  virtual OracleResult evaluate(const std::vector<Value>& args,
                                std::vector<std::optional<BufferData>> bufs) = 0;
};

// Oracle ids:
//   "builtin:<name>"  one of the registered reference functions
//   "proc:<command>"  external process speaking the line-JSON protocol
// Builtins carry their own signature; a proc oracle needs one supplied.
std::unique_ptr<Oracle> make_oracle(const std::string& id,
                                    const std::optional<Signature>& sig = std::nullopt);

std::vector<std::string> builtin_oracle_names();

// Exposed for the benchmark suite, which names builtins directly.
std::unique_ptr<Oracle> make_builtin_oracle(const std::string& name);

}  // namespace synth
