#pragma once
#include <span>
#include <vector>

#include "hbt/chaotic_field.hpp"
#include "hbt/rng.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Doubly stochastic (Cox) sampler for chaotic bosons: conditioned on the
/// speckle intensity, events are an inhomogeneous Poisson process with
/// per-cell rate mean_count * I_c / N_cells, plus uniform jitter within the
/// cell. With <I> = 1 the unconditional mean count is mean_count; bunching
/// comes entirely from the intensity fluctuations.
std::vector<EventRecord> sample_boson_events(const FieldRealization& field,
                                             const Geometry& geometry, double mean_count,
                                             rng::Stream& stream,
                                             const PhysicalConstants& constants = {});

/// Inhomogeneous Poisson process with a fixed (non-fluctuating) density
/// profile over the grid cells; expected total count = mean_count. An empty
/// profile means uniform.
std::vector<EventRecord> sample_coherent_events(const Geometry& geometry,
                                                std::span<const double> profile,
                                                double mean_count, rng::Stream& stream,
                                                long long shot_id = 0,
                                                const PhysicalConstants& constants = {});

/// Fill the vertical coordinate z = v (t - fall_time) with v = g_grav * t.
/// Time-of-flight geometry only.
std::vector<EventRecord> time_of_flight_positions(std::vector<EventRecord> events,
                                                  const Geometry& geometry,
                                                  const PhysicalConstants& constants = {});

/// Map a grid-cell coordinate vector onto an EventRecord via the geometry's
/// axis roles (shared by all samplers).
EventRecord make_event(std::span<const double> coords, const Geometry& geometry,
                       long long shot_id, const PhysicalConstants& constants);

} // namespace hbt
