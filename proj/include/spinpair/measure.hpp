#pragma once

#include <array>
#include <functional>
#include <vector>

#include "spinpair/spinops.hpp"

namespace spinpair {

/// Intensities of the two J-doublet peaks of the read spin.
struct PeakPair {
  double i_plus = 0.0, i_minus = 0.0;
};

/// FID-level readout of spin n on the current state (all pulses explicit):
/// sym  = Tr(rho S_nx)        -- total transverse magnetization of spin n
/// anti = Tr(rho 2 S_nx S_mz) -- doublet asymmetry
/// Peak intensities are I_{n,+-} = gain (sym +- anti)/2.
struct FidReading {
  double sym = 0.0, anti = 0.0;
  PeakPair peaks() const { return {0.5 * (sym + anti), 0.5 * (sym - anti)}; }
};

FidReading read_fid(const Mat4& rho, int read_spin, double gain = 1.0);

/// Readout with the (pi/2)_{ny} pulse folded in: intensities evaluate to
/// I_{n,+-} = gain * <S_nz (I/2 +- S_mz)> on the pre-pulse state, so
/// sym -> gain <S_nz> and antisym -> gain <2 S1z S2z> exactly.
PeakPair peak_intensities(const Mat4& rho_pre_readout, int read_spin, double gain = 1.0);

inline double symmetric_component(const PeakPair& p) { return p.i_plus + p.i_minus; }
inline double antisymmetric_component(const PeakPair& p) { return p.i_plus - p.i_minus; }

struct Tomogram {
  // Full reconstructed density matrix, including the I/4 part.
  Mat4 rho;
  std::array<double, 16> element_err{};
  CoherenceVector v;
  bool consistent_source = true;
};

/// Reconstructs all 15 coherence-vector components by measuring each basis
/// operator through a fixed pre-rotation followed by a peak readout, then
/// assembles I/4 + sum v_l P_l. The source must return the same state each
/// call; a repeated-preparation consistency probe flags drift.
Tomogram tomography(const std::function<Mat4()>& source,
                    const std::function<double(double)>& noise = {});

/// Overlap of the unit-normalized pure part of a deviation density matrix
/// with the target Bell state, in [0, 1]. Throws on zero-norm input.
double state_fidelity(const Mat4& rho_deviation, BellId target);

/// Trace distance between the normalized pure part (I/4 + rho/kappa) and the
/// ideal Bell projector; the PPS amplitude kappa is inferred from Tr(rho^2).
double bell_trace_distance(const Mat4& rho_deviation, BellId target);

}  // namespace spinpair
