#pragma once
#include <Eigen/Dense>
#include <vector>

#include "hbt/rng.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Discretized thermal one-body kernel for an ideal Fermi gas:
/// K(r, r') = sqrt(rho(r) rho(r')) exp(-|r - r'|^2 / (2 l^2)) folded with
/// the cell measure, so trace(K) equals the target mean count and every
/// eigenvalue lies in [0, 1 - 1e-9]. Determinantal samples drawn from this
/// kernel reproduce ideal-fermion statistics, exclusion included.
struct ThermalKernel {
  GridSpec grid;
  std::vector<double> correlation_length; // per axis (m)
  std::vector<double> density;            // rho at cell centers
  Eigen::MatrixXd kernel;
  Eigen::VectorXd eigenvalues;  // ascending, clamped into [0, 1 - 1e-9]
  Eigen::MatrixXd eigenvectors; // columns, same order
  double target_mean = 0.0;
  double applied_rescale = 0.0; // largest eigenvalue clamp applied (0 if none)
};

/// Eigenvalues may brush the unit bound by this much from rounding before
/// the build reports an occupancy error.
constexpr double kEigenvalueTolerance = 1e-8;
constexpr double kEigenvalueCap = 1.0 - 1e-9;

/// Build and validate the kernel on the geometry's grid with a uniform
/// density profile. Correlation lengths default to the source/geometry
/// prediction (one value per axis), scaled by source.temperature_scale if
/// set. Requires cell width < l/2 on every axis.
ThermalKernel build_thermal_kernel(const SourceModel& source, const Geometry& geometry,
                                   const PhysicalConstants& constants = {});

/// Same, with explicit per-axis correlation lengths.
ThermalKernel build_thermal_kernel(const SourceModel& source, const Geometry& geometry,
                                   std::vector<double> correlation_length);

/// Exact determinantal sample via the spectral method: include eigenvector
/// k with probability eigenvalue_k, then draw points one at a time from the
/// projection kernel, removing the sampled direction after each draw.
/// Returns selected cell indices (no jitter).
std::vector<long long> sample_fermion_cells(const ThermalKernel& kernel, rng::Stream& stream);

/// Cell samples mapped to events with uniform jitter inside each cell.
std::vector<EventRecord> sample_fermion_events(const ThermalKernel& kernel,
                                               const Geometry& geometry, rng::Stream& stream,
                                               long long shot_id = 0,
                                               const PhysicalConstants& constants = {});

/// Validation used by the samplers; throws KernelError on a non-Hermitian
/// kernel or eigenvalues outside [0, 1] beyond tolerance.
void validate_kernel(const ThermalKernel& kernel);

} // namespace hbt
