#pragma once

#include <cstdint>
#include <random>

namespace selfsim {

/// One reproducible random stream, identified by (seed, stream).
///
/// Only the engine comes from the standard library; every variate is derived by hand so
/// that results do not depend on the library's distribution implementations.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Exponential with mean 1.
  double exponential();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t id() const { return stream_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace selfsim
