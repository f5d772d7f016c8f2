#pragma once

#include <atomic>
#include <cstdint>

namespace gevrey::trace {

// Lightweight call counters used by the evidence-independence tests: identity
// lhs plans must never touch the oracles, and oracle paths must never touch
// the summation machinery.
inline std::atomic<std::uint64_t> oracle_calls{0};
inline std::atomic<std::uint64_t> laplace_calls{0};
inline std::atomic<std::uint64_t> quadrature_calls{0};

inline void reset() {
    oracle_calls = 0;
    laplace_calls = 0;
    quadrature_calls = 0;
}

}  // namespace gevrey::trace
