#include "hbt/dpp.hpp"

#include <array>
#include <cmath>

#include "hbt/sampling.hpp"

namespace hbt {

ThermalKernel build_thermal_kernel(const SourceModel& source, const Geometry& geometry,
                                   const PhysicalConstants& constants) {
  const double l = geometry.predicted_correlation_length(source, constants) *
                   source.temperature_scale.value_or(1.0);
  return build_thermal_kernel(source, geometry, std::vector<double>(geometry.dims(), l));
}

ThermalKernel build_thermal_kernel(const SourceModel& source, const Geometry& geometry,
                                   std::vector<double> correlation_length) {
  source.validate();
  geometry.validate();
  const GridSpec& grid = geometry.grid;
  const int dims = grid.dims();
  if (static_cast<int>(correlation_length.size()) != dims)
    throw DomainError("thermal kernel: one correlation length per axis required");
  for (int a = 0; a < dims; ++a) {
    if (!(correlation_length[a] > 0.0))
      throw DomainError("thermal kernel: correlation lengths must be > 0");
    if (!(grid.cell_width(a) < 0.5 * correlation_length[a]))
      throw DomainError("thermal kernel: grid cell width must be < l/2 (kernel unresolved)");
  }

  const long long n = grid.cell_count();
  ThermalKernel K;
  K.grid = grid;
  K.correlation_length = std::move(correlation_length);
  K.target_mean = source.mean_count;

  // Uniform density profile; trace(K) = sum rho w = mean_count.
  const double w = grid.cell_measure();
  const double rho = source.mean_count / (static_cast<double>(n) * w);
  K.density.assign(static_cast<std::size_t>(n), rho);

  // Cell-center coordinates, flattened row-major.
  std::vector<std::array<double, 3>> coords(static_cast<std::size_t>(n));
  std::vector<int> idx(dims, 0);
  for (long long flat = 0; flat < n; ++flat) {
    for (int a = 0; a < dims; ++a) coords[flat][a] = grid.center(a, idx[a]);
    for (int a = dims - 1; a >= 0; --a) {
      if (++idx[a] < grid.axes[a].cells) break;
      idx[a] = 0;
    }
  }

  K.kernel.resize(n, n);
  for (long long i = 0; i < n; ++i) {
    for (long long j = i; j < n; ++j) {
      double q = 0.0;
      for (int a = 0; a < dims; ++a) {
        const double d = coords[i][a] - coords[j][a];
        q += d * d / (2.0 * K.correlation_length[a] * K.correlation_length[a]);
      }
      const double val = std::sqrt(K.density[i] * K.density[j]) * std::exp(-q) * w;
      K.kernel(i, j) = val;
      K.kernel(j, i) = val;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K.kernel);
  if (solver.info() != Eigen::Success)
    throw KernelError("thermal kernel: eigendecomposition failed");
  K.eigenvalues = solver.eigenvalues();
  K.eigenvectors = solver.eigenvectors();

  // Clamp rounding-level excursions; anything larger is a real occupancy
  // problem (more particles requested than the phase-space volume holds).
  for (long long k = 0; k < n; ++k) {
    double& lam = K.eigenvalues(k);
    if (lam < 0.0) {
      if (lam < -kEigenvalueTolerance)
        throw KernelError("thermal kernel: negative eigenvalue beyond tolerance");
      lam = 0.0;
    } else if (lam > kEigenvalueCap) {
      if (lam > 1.0 + kEigenvalueTolerance)
        throw DomainError(
            "thermal kernel: mean_count exceeds the phase-space capacity of the grid "
            "(eigenvalue > 1); reduce mean_count or enlarge the grid");
      K.applied_rescale = std::max(K.applied_rescale, lam - kEigenvalueCap);
      lam = kEigenvalueCap;
    }
  }
  return K;
}

void validate_kernel(const ThermalKernel& K) {
  const long long n = K.kernel.rows();
  if (K.kernel.cols() != n || K.eigenvalues.size() != n || K.eigenvectors.rows() != n)
    throw KernelError("kernel validation: inconsistent dimensions");
  if (!K.kernel.isApprox(K.kernel.transpose(), kEigenvalueTolerance))
    throw KernelError("kernel validation: matrix is not Hermitian");
  for (long long k = 0; k < n; ++k) {
    const double lam = K.eigenvalues(k);
    if (lam < -kEigenvalueTolerance || lam > 1.0 + kEigenvalueTolerance)
      throw KernelError("kernel validation: eigenvalue outside [0, 1] beyond tolerance");
  }
}

std::vector<long long> sample_fermion_cells(const ThermalKernel& K, rng::Stream& stream) {
  validate_kernel(K);
  const long long n = K.kernel.rows();

  // Bernoulli inclusion of eigenvectors. Every eigenvalue consumes exactly
  // one uniform so the draw sequence is independent of the outcome.
  std::vector<long long> chosen;
  for (long long k = 0; k < n; ++k)
    if (stream.uniform() < K.eigenvalues(k)) chosen.push_back(k);
  const int m = static_cast<int>(chosen.size());
  if (m == 0) return {};

  Eigen::MatrixXd V(n, m);
  for (int c = 0; c < m; ++c) V.col(c) = K.eigenvectors.col(chosen[c]);

  std::vector<long long> cells;
  cells.reserve(m);
  Eigen::VectorXd rownorm(n);
  for (int remaining = m; remaining > 0; --remaining) {
    // Conditional density of the next point: squared row norms of the
    // orthonormal basis.
    double total = 0.0;
    for (long long i = 0; i < n; ++i) {
      rownorm(i) = V.leftCols(remaining).row(i).squaredNorm();
      total += rownorm(i);
    }
    const double u = stream.uniform() * total;
    double acc = 0.0;
    long long pick = n - 1;
    for (long long i = 0; i < n; ++i) {
      acc += rownorm(i);
      if (u < acc) {
        pick = i;
        break;
      }
    }
    cells.push_back(pick);

    if (remaining == 1) break;

    // Restrict the basis to vectors vanishing at the picked cell: rotate the
    // row-of-pick direction onto the first column with a Householder
    // reflection in coefficient space, then drop that column.
    Eigen::VectorXd wrow = V.leftCols(remaining).row(pick).transpose();
    const double wn = wrow.norm();
    Eigen::VectorXd q = wrow;
    q(0) += (wrow(0) >= 0.0 ? wn : -wn);
    const double qn2 = q.squaredNorm();
    if (qn2 > 0.0) {
      // V <- V (I - 2 q q^T / |q|^2), applied to the active columns.
      Eigen::VectorXd Vq = V.leftCols(remaining) * q;
      V.leftCols(remaining).noalias() -= Vq * (2.0 / qn2) * q.transpose();
    }
    // Column 0 now carries the entire row-of-pick weight; shift it out.
    for (int c = 1; c < remaining; ++c) V.col(c - 1) = V.col(c);
  }
  return cells;
}

std::vector<EventRecord> sample_fermion_events(const ThermalKernel& K,
                                               const Geometry& geometry, rng::Stream& stream,
                                               long long shot_id,
                                               const PhysicalConstants& constants) {
  if (K.grid.cell_count() != geometry.grid.cell_count())
    throw DomainError("sample_fermion_events: kernel/geometry grid mismatch");
  const GridSpec& grid = geometry.grid;
  const int dims = grid.dims();
  const auto cells = sample_fermion_cells(K, stream);
  std::vector<EventRecord> events;
  events.reserve(cells.size());
  std::array<double, 3> coords{};
  for (long long flat : cells) {
    long long rem = flat;
    for (int a = dims - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % grid.axes[a].cells);
      rem /= grid.axes[a].cells;
      coords[a] = grid.center(a, i) + (stream.uniform() - 0.5) * grid.cell_width(a);
    }
    events.push_back(make_event(std::span<const double>(coords.data(), dims), geometry,
                                shot_id, constants));
  }
  return events;
}

} // namespace hbt
