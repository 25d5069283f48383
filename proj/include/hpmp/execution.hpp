#pragma once

namespace hpmp {

/// Selects the OpenMP kernel or the serial reference loop. Both produce
/// bit-identical results; the serial path is kept for tests and benchmarks.
enum class Execution { Serial, Parallel };

}  // namespace hpmp
