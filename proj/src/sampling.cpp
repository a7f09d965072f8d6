#include "hbt/sampling.hpp"

#include <array>
#include <cmath>

namespace hbt {

EventRecord make_event(std::span<const double> coords, const Geometry& geometry,
                       long long shot_id, const PhysicalConstants& constants) {
  const auto roles = geometry.axis_roles();
  EventRecord ev;
  ev.shot_id = shot_id;
  for (std::size_t a = 0; a < roles.size(); ++a) {
    switch (roles[a]) {
      case AxisRole::X: ev.x = coords[a]; break;
      case AxisRole::Y: ev.y = coords[a]; break;
      case AxisRole::Z:
        // Arrival time encodes the vertical coordinate; z itself is
        // reconstructed later by time_of_flight_positions.
        ev.t = geometry.fall_time + coords[a] / geometry.mean_speed(constants);
        break;
    }
  }
  return ev;
}

namespace {

// Cell-by-cell Poisson draws with uniform jitter; rate(cell) provided by
// the caller. Cells are visited in flat row-major order, so the event list
// is a deterministic function of the stream.
template <typename RateFn>
std::vector<EventRecord> sample_cells(const Geometry& geometry, double mean_count,
                                      RateFn&& rate, rng::Stream& stream,
                                      const PhysicalConstants& constants,
                                      long long shot_id) {
  if (mean_count < 0.0) throw DomainError("sampling: mean_count must be >= 0");
  geometry.validate();
  const GridSpec& grid = geometry.grid;
  const int dims = grid.dims();
  const long long n = grid.cell_count();
  std::vector<EventRecord> events;
  if (mean_count == 0.0) return events;
  events.reserve(static_cast<std::size_t>(mean_count * 1.5) + 8);
  std::vector<int> idx(dims, 0);
  std::array<double, 3> coords{};
  for (long long flat = 0; flat < n; ++flat) {
    const long long k = stream.poisson(rate(flat));
    for (long long c = 0; c < k; ++c) {
      for (int a = 0; a < dims; ++a) {
        const double w = grid.cell_width(a);
        coords[a] = grid.center(a, idx[a]) + (stream.uniform() - 0.5) * w;
      }
      events.push_back(make_event(std::span<const double>(coords.data(), dims), geometry,
                                  shot_id, constants));
    }
    for (int a = dims - 1; a >= 0; --a) {
      if (++idx[a] < grid.axes[a].cells) break;
      idx[a] = 0;
    }
  }
  return events;
}

} // namespace

std::vector<EventRecord> sample_boson_events(const FieldRealization& field,
                                             const Geometry& geometry, double mean_count,
                                             rng::Stream& stream,
                                             const PhysicalConstants& constants) {
  if (field.grid.cell_count() != geometry.grid.cell_count())
    throw DomainError("sample_boson_events: field/geometry grid mismatch");
  const double per_cell = mean_count / static_cast<double>(field.grid.cell_count());
  return sample_cells(geometry, mean_count,
                      [&](long long flat) { return per_cell * field.intensity(flat); },
                      stream, constants, static_cast<long long>(field.shot_id));
}

std::vector<EventRecord> sample_coherent_events(const Geometry& geometry,
                                                std::span<const double> profile,
                                                double mean_count, rng::Stream& stream,
                                                long long shot_id,
                                                const PhysicalConstants& constants) {
  const long long n = geometry.grid.cell_count();
  if (!profile.empty()) {
    if (static_cast<long long>(profile.size()) != n)
      throw DomainError("sample_coherent_events: profile/grid size mismatch");
    double total = 0.0;
    for (double p : profile) {
      if (p < 0.0) throw DomainError("sample_coherent_events: negative profile value");
      total += p;
    }
    if (!(total > 0.0) && mean_count > 0.0)
      throw DomainError("sample_coherent_events: profile integrates to zero");
    const double scale = mean_count > 0.0 ? mean_count / total : 0.0;
    return sample_cells(geometry, mean_count,
                        [&](long long flat) { return scale * profile[flat]; }, stream,
                        constants, shot_id);
  }
  const double per_cell = mean_count / static_cast<double>(n);
  return sample_cells(geometry, mean_count, [&](long long) { return per_cell; }, stream,
                      constants, shot_id);
}

std::vector<EventRecord> time_of_flight_positions(std::vector<EventRecord> events,
                                                  const Geometry& geometry,
                                                  const PhysicalConstants& constants) {
  if (geometry.mode != Geometry::Mode::TimeOfFlight)
    throw DomainError("time_of_flight_positions: geometry is not time-of-flight");
  const double v = geometry.mean_speed(constants);
  for (auto& ev : events) {
    ev.z = v * (ev.t - geometry.fall_time);
    ev.has_z = true;
  }
  return events;
}

} // namespace hbt
