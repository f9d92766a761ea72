#pragma once

#include <memory>
#include <string>

#include "synth/oracle.hpp"
#include "synth/types.hpp"

namespace synth {

// Wraps an external command as an oracle. The child is spawned once and
// queried with one JSON object per line on stdin:
//   {"args":[{"kind":"int","v":3},{"kind":"buf","elem":"float","data":[...]}]}
// and must answer with one JSON object per line on stdout:
//   {"ret":{"kind":"float","v":-6.72},"bufs":[[...],...]}
// "ret" is null for void functions; "bufs" lists the final contents of the
// pointer parameters in parameter order. A crash, a malformed line, or a
// response slower than timeout_ms raises OracleError.
std::unique_ptr<Oracle> make_subprocess_oracle(const std::string& command, Signature sig,
                                               int timeout_ms = 10000);

}  // namespace synth
