#pragma once

#include <cstdint>
#include <span>

#include "lrsha/bytes.hpp"

namespace lrsha {

class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes32 bytes32() {
    Bytes32 b;
    fill(b);
    return b;
  }
};

// Operating-system randomness via libsodium.
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Reproducible stream keyed by a 64-bit seed. Only for demos and tests.
class SeededRng final : public Rng {
 public:
  explicit SeededRng(std::uint64_t seed);
  void fill(std::span<std::uint8_t> out) override;

 private:
  Bytes32 key_{};
  std::uint64_t counter_ = 0;
};

SystemRng& system_rng();

// Must run before any libsodium call; safe to call repeatedly.
void init_crypto();

}  // namespace lrsha
