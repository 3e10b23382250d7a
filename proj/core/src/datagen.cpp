#include "hapod/datagen.hpp"

#include "hapod/error.hpp"
#include "hapod/random.hpp"

#include <cmath>
#include <string>

namespace hapod {
namespace {

// Counter streams of the Burgers forcing.
constexpr std::uint32_t kSparkTimeStream = 0;
constexpr std::uint32_t kSparkAmplitudeStream = 1;

constexpr std::uint32_t kLeftFactorStream = 0;
constexpr std::uint32_t kRightFactorStream = 1;

Matrix random_orthonormal(Index rows, Index cols, const CounterRng& rng, std::uint32_t stream) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      g(i, j) = rng.normal(stream, static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(rows) +
                                       static_cast<std::uint64_t>(i));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace

void BurgersConfig::validate() const {
  if (grid_size < 2) throw ParameterError("Burgers grid needs at least 2 nodes");
  if (!(time_step > 0.0) || !std::isfinite(time_step)) throw ParameterError("Burgers time step must be positive");
  if (!(spark_probability >= 0.0 && spark_probability <= 1.0)) {
    throw ParameterError("spark probability must lie in [0, 1]");
  }
  if (!(spark_max >= 0.0) || !std::isfinite(spark_max)) throw ParameterError("spark amplitude must be nonnegative");
}

BurgersTrajectory burgers_snapshots(const BurgersConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Index>(cfg.grid_size);
  const double dx = 1.0 / static_cast<double>(cfg.grid_size);
  const double h = cfg.time_step;
  const CounterRng rng(cfg.seed);

  Vector forcing_shape(n);
  for (Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1) * dx;
    forcing_shape[i] = std::exp(-(x - 0.5) * (x - 0.5) / 20.0);
  }

  Matrix out(n, static_cast<Index>(cfg.step_count));
  Vector z = Vector::Zero(n);
  Vector flux(n);
  std::size_t sparks = 0;
  for (std::size_t k = 0; k < cfg.step_count; ++k) {
    double u = 0.0;
    if (rng.uniform(kSparkTimeStream, k) < cfg.spark_probability) {
      u = cfg.spark_max * rng.uniform(kSparkAmplitudeStream, k);
      ++sparks;
    }
    flux = 0.5 * z.cwiseAbs2();
    // Upwind flux difference with inflow value z_0 = 0; the right end is free outflow.
    double previous = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double q = flux[i];
      z[i] += h * (-(q - previous) / dx + forcing_shape[i] * u);
      previous = q;
    }
    if (!z.allFinite()) {
      throw NumericalError("Burgers trajectory blew up at step " + std::to_string(k));
    }
    out.col(static_cast<Index>(k)) = z;
  }
  return {SnapshotBlock(InnerProductSpace(n), std::move(out)), sparks};
}

SnapshotBlock synthetic_decay(Index d, Index m, double decay_rate, std::uint64_t seed) {
  if (d < 1 || m < 1) throw ParameterError("synthetic_decay needs d, m >= 1");
  if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) throw ParameterError("decay rate must be positive");
  const Index r = std::min(d, m);
  const CounterRng rng(seed);
  const Matrix u = random_orthonormal(d, r, rng, kLeftFactorStream);
  const Matrix v = random_orthonormal(m, r, rng, kRightFactorStream);
  Vector sigma(r);
  for (Index k = 0; k < r; ++k) sigma[k] = std::exp(-decay_rate * static_cast<double>(k + 1));
  return SnapshotBlock(InnerProductSpace(d), u * sigma.asDiagonal() * v.transpose());
}

}  // namespace hapod
