#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/rng.hpp"
#include "permcert/special.hpp"

namespace permcert {

enum class InstanceKind { file, random_gaussian, circulant, diagonal, rank1 };

inline InstanceKind parse_instance_kind(std::string_view name) {
  if (name == "file") return InstanceKind::file;
  if (name == "random-gaussian") return InstanceKind::random_gaussian;
  if (name == "circulant") return InstanceKind::circulant;
  if (name == "diagonal") return InstanceKind::diagonal;
  if (name == "rank1") return InstanceKind::rank1;
  throw ParseError("unknown instance kind: " + std::string(name));
}

inline std::string_view instance_kind_name(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::file: return "file";
    case InstanceKind::random_gaussian: return "random-gaussian";
    case InstanceKind::circulant: return "circulant";
    case InstanceKind::diagonal: return "diagonal";
    case InstanceKind::rank1: return "rank1";
  }
  return "unknown";
}

struct InstanceSpec {
  InstanceKind kind = InstanceKind::random_gaussian;
  int n = 0;
  std::uint64_t seed = 0;
  // circulant: first row; diagonal: d; rank1: v (empty draws v from seed)
  std::vector<Complex> params;
};

/// Real n x n factor with i.i.d. standard normal entries in row-major order.
inline Eigen::MatrixXd gaussian_factor(int n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) v(i, j) = rng.normal();
  }
  return v;
}

inline HermitianMatrix random_instance(const InstanceSpec& spec) {
  switch (spec.kind) {
    case InstanceKind::random_gaussian: {
      if (spec.n < 1) throw DimensionError("random-gaussian instance needs n >= 1");
      const Eigen::MatrixXd v = gaussian_factor(spec.n, spec.seed);
      return HermitianMatrix::from_real(v.transpose() * v);
    }
    case InstanceKind::circulant: {
      if (spec.params.empty()) throw DimensionError("circulant instance needs a first row");
      return HermitianMatrix(make_circulant(spec.params));
    }
    case InstanceKind::diagonal: {
      if (spec.params.empty()) throw DimensionError("diagonal instance needs entries");
      Eigen::VectorXcd d(static_cast<Eigen::Index>(spec.params.size()));
      for (std::size_t i = 0; i < spec.params.size(); ++i) {
        d(static_cast<Eigen::Index>(i)) = spec.params[i];
      }
      return HermitianMatrix(Eigen::MatrixXcd(d.asDiagonal()));
    }
    case InstanceKind::rank1: {
      Eigen::VectorXcd v;
      if (spec.params.empty()) {
        if (spec.n < 1) throw DimensionError("rank1 instance needs n >= 1");
        CounterRng rng(spec.seed, 0);
        v.resize(spec.n);
        for (int i = 0; i < spec.n; ++i) v(i) = rng.complex_normal();
      } else {
        v.resize(static_cast<Eigen::Index>(spec.params.size()));
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
          v(static_cast<Eigen::Index>(i)) = spec.params[i];
        }
      }
      return HermitianMatrix(v * v.adjoint());
    }
    case InstanceKind::file:
      break;
  }
  throw ParseError("random_instance: file instances are loaded through io");
}

}  // namespace permcert
