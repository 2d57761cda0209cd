#include "bwretrieve/sensing.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "bwretrieve/error.hpp"
#include "bwretrieve/linalg.hpp"
#include "bwretrieve/rng.hpp"

namespace bwretrieve {

SensingEnsemble SensingEnsemble::from_vectors(Matrix raw, std::uint64_t seed) {
  if (raw.rows() < 1 || raw.cols() < 1) {
    throw Error(ErrorKind::InvalidInput, "ensemble needs at least one vector of dimension ≥ 1");
  }
  SensingEnsemble e;
  e.raw_ = std::move(raw);
  e.seed_ = seed;
  return e;
}

SensingEnsemble generate_ensemble(Index d, Index n, std::uint64_t seed) {
  if (d < 1 || n <= d) {
    throw Error(ErrorKind::InvalidConfiguration,
                "generate_ensemble requires n > d >= 1 (got d=" + std::to_string(d) +
                    ", n=" + std::to_string(n) + ")");
  }
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal;
  Matrix raw(d, n);
  // Column-major fill: vector i is drawn as one contiguous block.
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) raw(k, i) = normal(engine);
  return SensingEnsemble::from_vectors(std::move(raw), seed);
}

Matrix empirical_covariance(const SensingEnsemble& ensemble) {
  const Matrix& a = ensemble.raw();
  Matrix c = Matrix::Zero(a.rows(), a.rows());
  c.selfadjointView<Eigen::Lower>().rankUpdate(a, 1.0 / static_cast<double>(a.cols()));
  return c.selfadjointView<Eigen::Lower>();
}

SensingEnsemble whiten(const SensingEnsemble& ensemble) {
  SensingEnsemble out = ensemble;
  out.cholesky_ = linalg::cholesky_lower(empirical_covariance(ensemble));
  out.whitened_ = linalg::forward_substitute(out.cholesky_, ensemble.raw());
  return out;
}

Measurements synthesize_measurements(const SensingEnsemble& ensemble, const Vector& u_star) {
  if (u_star.size() != ensemble.d()) {
    throw Error(ErrorKind::InvalidInput,
                "signal dimension " + std::to_string(u_star.size()) +
                    " does not match ensemble dimension " + std::to_string(ensemble.d()));
  }
  Measurements m;
  m.values = (ensemble.raw().transpose() * u_star).cwiseAbs();
  m.ground_truth = u_star;
  return m;
}

Vector unwhiten(const Matrix& cholesky_factor, const Vector& u) {
  return linalg::back_substitute_transpose(cholesky_factor, u);
}

Vector unwhiten_literal(const Matrix& cholesky_factor, const Vector& u) {
  return linalg::forward_substitute(cholesky_factor, u);
}

Vector to_whitened(const Matrix& cholesky_factor, const Vector& u) {
  return cholesky_factor.transpose().triangularView<Eigen::Upper>() * u;
}

Vector constant_unit_signal(Index d) {
  return Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

template <class T>
void put(std::ostream& os, T value) {
  value = to_little(value);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return to_little(value);
}

}  // namespace

void write_ensemble(const SensingEnsemble& ensemble, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  put<std::uint64_t>(os, static_cast<std::uint64_t>(ensemble.d()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(ensemble.n()));
  put<std::uint64_t>(os, ensemble.seed());
  const Matrix& a = ensemble.raw();
  for (Index i = 0; i < a.cols(); ++i)
    for (Index k = 0; k < a.rows(); ++k) put<double>(os, a(k, i));
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

SensingEnsemble read_ensemble(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for reading");
  const auto d = get<std::uint64_t>(is);
  const auto n = get<std::uint64_t>(is);
  const auto seed = get<std::uint64_t>(is);
  if (!is || d == 0 || n == 0 || d > (1u << 20) || n > (1u << 28)) {
    throw Error(ErrorKind::Io, "malformed ensemble header in " + path.string());
  }
  Matrix a(static_cast<Index>(d), static_cast<Index>(n));
  for (Index i = 0; i < a.cols(); ++i)
    for (Index k = 0; k < a.rows(); ++k) a(k, i) = get<double>(is);
  if (!is) throw Error(ErrorKind::Io, "truncated ensemble payload in " + path.string());
  return SensingEnsemble::from_vectors(std::move(a), seed);
}

}  // namespace bwretrieve
