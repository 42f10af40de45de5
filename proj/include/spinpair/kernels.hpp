#pragma once

#include <string>

#include "spinpair/mat4.hpp"

namespace spinpair::kernels {

/// One classical RK4 step of dU/dt = -i H(t) U on a 4x4 complex matrix.
/// h0, hh, h1 are H sampled at t, t + dt/2 and t + dt (row-major, 16
/// entries each); u is updated in place.
///
/// This is the inner loop of the stochastic-Liouville oracle, so it exists
/// in a scalar reference version and an AVX2+FMA version selected at
/// runtime. The two differ only in rounding (FMA contraction); equivalence
/// is enforced by tests at 1e-12 on long random runs.
using Rk4StepFn = void (*)(const cplx* h0, const cplx* hh, const cplx* h1, cplx* u, double dt);

enum class Backend { scalar, avx2 };

/// True when the backend can run on this CPU (scalar always can).
bool available(Backend b);

/// Best backend the CPU supports.
Backend best_available();

/// Kernel entry point; throws std::runtime_error for an unavailable backend.
Rk4StepFn get(Backend b);

const char* name(Backend b);

/// Parses "auto" | "scalar" | "avx2".
Backend parse_backend(const std::string& s);

namespace detail {
void rk4_step_scalar(const cplx* h0, const cplx* hh, const cplx* h1, cplx* u, double dt);
#if defined(__x86_64__)
void rk4_step_avx2(const cplx* h0, const cplx* hh, const cplx* h1, cplx* u, double dt);
#endif
}  // namespace detail

}  // namespace spinpair::kernels
