#include "lrsha/rng.hpp"

#include <stdexcept>

#include <sodium.h>

namespace lrsha {

void init_crypto() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  init_crypto();
  randombytes_buf(out.data(), out.size());
}

SeededRng::SeededRng(std::uint64_t seed) {
  init_crypto();
  Bytes material = Writer().raw(as_bytes("lrsha/seeded-rng")).u64(seed).take();
  crypto_generichash(key_.data(), key_.size(), material.data(), material.size(), nullptr, 0);
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  static_assert(randombytes_SEEDBYTES == 32);
  Bytes32 block_seed;
  Bytes msg = Writer().u64(counter_++).take();
  crypto_generichash(block_seed.data(), block_seed.size(), msg.data(), msg.size(), key_.data(),
                     key_.size());
  randombytes_buf_deterministic(out.data(), out.size(), block_seed.data());
}

SystemRng& system_rng() {
  static SystemRng rng;
  return rng;
}

}  // namespace lrsha
