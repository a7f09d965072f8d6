#include "hbt/chaotic_field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hbt {

EmitterEnsemble draw_ensemble(const SourceModel& source, int count, int dims,
                              rng::Stream& stream) {
  source.validate();
  if (count < 1) throw DomainError("draw_ensemble: count must be >= 1");
  if (dims < 1 || dims > 3) throw DomainError("draw_ensemble: dims must be 1, 2 or 3");
  EmitterEnsemble e;
  e.dims = dims;
  e.positions.resize(static_cast<std::size_t>(count) * dims);
  e.phases.resize(count);
  e.amplitudes.assign(count, 1.0);
  for (int j = 0; j < count; ++j) {
    for (int a = 0; a < dims; ++a)
      e.positions[static_cast<std::size_t>(j) * dims + a] = source.source_rms * stream.gaussian();
    e.phases[j] = stream.uniform(0.0, 2.0 * M_PI);
  }
  return e;
}

EmitterEnsemble resample_phases(const EmitterEnsemble& ensemble, rng::Stream& stream) {
  EmitterEnsemble e = ensemble;
  for (auto& phi : e.phases) phi = stream.uniform(0.0, 2.0 * M_PI);
  return e;
}

namespace {

// Shared synthesis setup: normalization and paraxial checks.
struct SynthSetup {
  double k;        // 2 pi / lambda
  double inv_2L;   // 1 / (2 L)
  double norm;     // amplitude normalization, <I> = 1
};

SynthSetup prepare(const EmitterEnsemble& ensemble, const Geometry& geometry,
                   double wavelength, const PhysicalConstants& pc) {
  geometry.validate();
  if (!(wavelength > 0.0)) throw DomainError("synthesize_field: wavelength must be > 0");
  if (ensemble.count() < 1) throw DomainError("synthesize_field: empty ensemble");
  if (ensemble.dims != geometry.dims())
    throw DomainError("synthesize_field: ensemble/geometry dimensionality mismatch");
  const double L = geometry.effective_distance(pc);
  for (const auto& ax : geometry.grid.axes)
    if (ax.extent >= 0.5 * L)
      throw DomainError("synthesize_field: grid extent >= L/2 violates the paraxial expansion");
  double sum_a2 = 0.0;
  for (double a : ensemble.amplitudes) sum_a2 += a * a;
  if (!(sum_a2 > 0.0)) throw DomainError("synthesize_field: all amplitudes vanish");
  return {2.0 * M_PI / wavelength, 0.5 / L, 1.0 / std::sqrt(sum_a2)};
}

// Reference route: evaluate phi_j + k |r - r_j|^2 / (2L) point by point.
void synth_direct(const EmitterEnsemble& e, const GridSpec& grid, const SynthSetup& su,
                  std::vector<std::complex<double>>& out) {
  const int dims = grid.dims();
  const long long n = grid.cell_count();
  std::vector<int> idx(dims, 0);
  for (long long flat = 0; flat < n; ++flat) {
    std::complex<double> acc{0.0, 0.0};
    for (int j = 0; j < e.count(); ++j) {
      double r2 = 0.0;
      for (int a = 0; a < dims; ++a) {
        const double d = grid.center(a, idx[a]) - e.position(j, a);
        r2 += d * d;
      }
      const double phase = e.phases[j] + su.k * r2 * su.inv_2L;
      acc += e.amplitudes[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[flat] = su.norm * acc;
    for (int a = dims - 1; a >= 0; --a) {
      if (++idx[a] < grid.axes[a].cells) break;
      idx[a] = 0;
    }
  }
}

// Fast route. Expanding |r - r_j|^2 = r^2 - 2 r.r_j + r_j^2 factors the sum
// into a per-point quadratic phase times a separable transform of emitter
// weights: field(n) = Q(n) * sum_j w_j prod_a u_{ja}^{n_a}, with
// u_{ja} = exp(-i k dx_a x_{ja} / L) advanced by multiplication along the
// grid. No trigonometry in the inner loop.
void synth_transform(const EmitterEnsemble& e, const GridSpec& grid, const SynthSetup& su,
                     std::vector<std::complex<double>>& out) {
  using cd = std::complex<double>;
  const int dims = grid.dims();
  const int nj = e.count();
  const double k_over_L = su.k * 2.0 * su.inv_2L;

  // w_j = a_j exp(i (phi_j + k r_j^2 / 2L)), start values fold in the grid origin.
  std::vector<cd> w(nj);
  for (int j = 0; j < nj; ++j) {
    double rj2 = 0.0;
    double phase0 = 0.0;
    for (int a = 0; a < dims; ++a) {
      const double xj = e.position(j, a);
      rj2 += xj * xj;
      phase0 -= k_over_L * grid.center(a, 0) * xj;
    }
    const double phase = e.phases[j] + su.k * rj2 * su.inv_2L + phase0;
    w[j] = e.amplitudes[j] * cd(std::cos(phase), std::sin(phase));
  }

  if (dims == 1) {
    const int nx = grid.axes[0].cells;
    const double dx = grid.cell_width(0);
    std::fill(out.begin(), out.end(), cd{0.0, 0.0});
    for (int j = 0; j < nj; ++j) {
      const double step_phase = -k_over_L * dx * e.position(j, 0);
      const cd step(std::cos(step_phase), std::sin(step_phase));
      cd cur = w[j];
      for (int i = 0; i < nx; ++i) {
        out[i] += cur;
        cur *= step;
      }
    }
  } else {
    // Per-emitter power tables along each axis, then a rank-1 accumulation.
    const int n0 = grid.axes[0].cells;
    const long long tail = grid.cell_count() / n0;
    std::vector<cd> u0(n0), utail(tail);
    std::fill(out.begin(), out.end(), cd{0.0, 0.0});
    for (int j = 0; j < nj; ++j) {
      {
        const double sp = -k_over_L * grid.cell_width(0) * e.position(j, 0);
        const cd step(std::cos(sp), std::sin(sp));
        cd cur{1.0, 0.0};
        for (int i = 0; i < n0; ++i) { u0[i] = cur; cur *= step; }
      }
      if (dims == 2) {
        const int n1 = grid.axes[1].cells;
        const double sp = -k_over_L * grid.cell_width(1) * e.position(j, 1);
        const cd step(std::cos(sp), std::sin(sp));
        cd cur = w[j];
        for (int i = 0; i < n1; ++i) { utail[i] = cur; cur *= step; }
      } else {
        const int n1 = grid.axes[1].cells;
        const int n2 = grid.axes[2].cells;
        const double sp1 = -k_over_L * grid.cell_width(1) * e.position(j, 1);
        const double sp2 = -k_over_L * grid.cell_width(2) * e.position(j, 2);
        const cd step1(std::cos(sp1), std::sin(sp1));
        const cd step2(std::cos(sp2), std::sin(sp2));
        cd cur1 = w[j];
        for (int i1 = 0; i1 < n1; ++i1) {
          cd cur2 = cur1;
          for (int i2 = 0; i2 < n2; ++i2) {
            utail[static_cast<long long>(i1) * n2 + i2] = cur2;
            cur2 *= step2;
          }
          cur1 *= step1;
        }
      }
      for (int i0 = 0; i0 < n0; ++i0) {
        const cd f = u0[i0];
        cd* row = out.data() + static_cast<long long>(i0) * tail;
        for (long long it = 0; it < tail; ++it) row[it] += f * utail[it];
      }
    }
  }

  // Common quadratic phase Q(n) = exp(i k r^2 / 2L) and normalization.
  std::vector<int> idx(dims, 0);
  const long long n = grid.cell_count();
  for (long long flat = 0; flat < n; ++flat) {
    double r2 = 0.0;
    for (int a = 0; a < dims; ++a) {
      const double c = grid.center(a, idx[a]);
      r2 += c * c;
    }
    const double qp = su.k * r2 * su.inv_2L;
    out[flat] *= su.norm * cd(std::cos(qp), std::sin(qp));
    for (int a = dims - 1; a >= 0; --a) {
      if (++idx[a] < grid.axes[a].cells) break;
      idx[a] = 0;
    }
  }
}

} // namespace

FieldRealization synthesize_field(const EmitterEnsemble& ensemble, const Geometry& geometry,
                                  double wavelength, std::uint64_t shot_id,
                                  SynthesisRoute route, const PhysicalConstants& constants) {
  const SynthSetup su = prepare(ensemble, geometry, wavelength, constants);
  FieldRealization field;
  field.grid = geometry.grid;
  field.shot_id = shot_id;
  field.wavelength = wavelength;
  field.distance = geometry.effective_distance(constants);
  field.amplitude.resize(static_cast<std::size_t>(geometry.grid.cell_count()));
  if (route == SynthesisRoute::Direct)
    synth_direct(ensemble, geometry.grid, su, field.amplitude);
  else
    synth_transform(ensemble, geometry.grid, su, field.amplitude);
  return field;
}

AutocorrCurve intensity_autocorrelation(std::span<const FieldRealization> fields, int axis) {
  if (fields.empty()) throw DomainError("intensity_autocorrelation: no fields");
  const GridSpec& grid = fields.front().grid;
  if (axis < 0 || axis >= grid.dims())
    throw DomainError("intensity_autocorrelation: axis out of range");
  const int n_axis = grid.axes[axis].cells;
  const double w = grid.cell_width(axis);

  // Stride of one step along `axis` in the flattened row-major layout.
  long long stride = 1;
  for (int a = grid.dims() - 1; a > axis; --a) stride *= grid.axes[a].cells;
  const long long n_total = grid.cell_count();
  const long long outer = n_total / (static_cast<long long>(n_axis) * stride);

  std::vector<double> sum(n_axis, 0.0);
  std::vector<long long> cnt(n_axis, 0);
  double isum = 0.0;
  long long icnt = 0;
  for (const auto& f : fields) {
    if (f.grid.cell_count() != n_total)
      throw DomainError("intensity_autocorrelation: inconsistent grids");
    for (long long o = 0; o < outer; ++o) {
      for (long long s = 0; s < stride; ++s) {
        const long long base = o * n_axis * stride + s;
        for (int i = 0; i < n_axis; ++i) {
          const double Ii = f.intensity(base + static_cast<long long>(i) * stride);
          isum += Ii;
          ++icnt;
          for (int k = 0; i + k < n_axis; ++k) {
            sum[k] += Ii * f.intensity(base + static_cast<long long>(i + k) * stride);
            ++cnt[k];
          }
        }
      }
    }
  }
  const double ibar = isum / static_cast<double>(icnt);
  AutocorrCurve curve;
  curve.mean_intensity = ibar;
  curve.offset.resize(n_axis);
  curve.value.resize(n_axis);
  for (int k = 0; k < n_axis; ++k) {
    curve.offset[k] = k * w;
    curve.value[k] = (sum[k] / static_cast<double>(cnt[k])) / (ibar * ibar);
  }
  return curve;
}

void write_field(const FieldRealization& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_field: cannot open " + path);
  out << "# hbtsim field v1\n";
  out << "# dims = " << field.grid.dims() << "\n";
  for (int a = 0; a < field.grid.dims(); ++a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# axis%d = %.17g %d\n", a,
                  field.grid.axes[a].extent, field.grid.axes[a].cells);
    out << buf;
  }
  out << "# shot_id = " << field.shot_id << "\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "# wavelength = %.17g\n# distance = %.17g\n",
                field.wavelength, field.distance);
  out << buf;
  for (std::size_t i = 0; i < field.amplitude.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, field.amplitude[i].real(),
                  field.amplitude[i].imag());
    out << buf;
  }
  if (!out) throw IoError("write_field: write failed for " + path);
}

FieldRealization read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_field: cannot open " + path);
  FieldRealization f;
  std::string line;
  int dims = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key, eq;
      ss >> key;
      if (key == "dims") {
        ss >> eq >> dims;
        f.grid.axes.resize(dims);
      } else if (key.rfind("axis", 0) == 0) {
        const int a = std::stoi(key.substr(4));
        ss >> eq >> f.grid.axes[a].extent >> f.grid.axes[a].cells;
      } else if (key == "shot_id") {
        ss >> eq >> f.shot_id;
      } else if (key == "wavelength") {
        ss >> eq >> f.wavelength;
      } else if (key == "distance") {
        ss >> eq >> f.distance;
      }
      continue;
    }
    std::istringstream ss(line);
    std::size_t idx;
    double re, im;
    if (!(ss >> idx >> re >> im))
      throw IoError("read_field: malformed row at line " + std::to_string(line_no));
    if (f.amplitude.size() <= idx) f.amplitude.resize(idx + 1);
    f.amplitude[idx] = {re, im};
  }
  if (dims < 1) throw IoError("read_field: missing dims header in " + path);
  return f;
}

} // namespace hbt
