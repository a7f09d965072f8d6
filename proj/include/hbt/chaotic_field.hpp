#pragma once
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hbt/rng.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Point emitters spread over the source, each with an independent uniform
/// phase. Interference of their spherical (paraxially expanded) waves at
/// the detector plane produces one speckle realization.
struct EmitterEnsemble {
  int dims = 1;
  std::vector<double> positions;  // flattened, dims coordinates per emitter
  std::vector<double> phases;     // [0, 2 pi)
  std::vector<double> amplitudes; // real weights

  int count() const { return static_cast<int>(phases.size()); }
  double position(int j, int axis) const { return positions[static_cast<std::size_t>(j) * dims + axis]; }
};

/// Complex amplitude over the detector grid for one shot. Normalized so
/// the ensemble-mean intensity is 1 at every grid point.
struct FieldRealization {
  GridSpec grid;
  std::uint64_t shot_id = 0;
  double wavelength = 0.0; // synthesis snapshot
  double distance = 0.0;
  std::vector<std::complex<double>> amplitude; // row-major over grid cells

  double intensity(std::size_t idx) const { return std::norm(amplitude[idx]); }
};

/// Positions i.i.d. Gaussian with rms `source_rms` per axis, phases i.i.d.
/// uniform, unit amplitudes. Deterministic given the stream.
EmitterEnsemble draw_ensemble(const SourceModel& source, int count, int dims,
                              rng::Stream& stream);

/// Same positions and amplitudes, fresh phases: a new temporal coherence
/// cell of the same source.
EmitterEnsemble resample_phases(const EmitterEnsemble& ensemble, rng::Stream& stream);

enum class SynthesisRoute {
  Direct,    // per-point phase evaluation; the reference implementation
  Transform, // factored quadratic phase + per-emitter geometric recurrence
};

/// Superpose the emitter waves on the detector grid using the paraxial
/// quadratic phase expansion. Both routes evaluate the same sum; Transform
/// replaces the per-point trigonometry by complex recurrences and agrees
/// with Direct to better than 1e-10 relative.
FieldRealization synthesize_field(const EmitterEnsemble& ensemble, const Geometry& geometry,
                                  double wavelength, std::uint64_t shot_id = 0,
                                  SynthesisRoute route = SynthesisRoute::Transform,
                                  const PhysicalConstants& constants = {});

/// Normalized intensity autocorrelation C(k) = <I(r) I(r + k dx)> / <I>^2
/// along one grid axis, averaged over shots and transverse indices.
struct AutocorrCurve {
  std::vector<double> offset; // separation (m), multiples of the cell width
  std::vector<double> value;
  double mean_intensity = 0.0;
};

AutocorrCurve intensity_autocorrelation(std::span<const FieldRealization> fields,
                                        int axis = 0);

/// Plain-text dump (header: dims, extents, shot id; rows: index, re, im)
/// for debugging and cross-language comparison.
void write_field(const FieldRealization& field, const std::string& path);
FieldRealization read_field(const std::string& path);

} // namespace hbt
