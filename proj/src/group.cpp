#include "lrsha/group.hpp"

#include <algorithm>
#include <array>

#include <sodium.h>

#include "lrsha/error.hpp"
#include "lrsha/metrics.hpp"

namespace lrsha {

std::string_view to_string(GroupId id) {
  switch (id) {
    case GroupId::ristretto255: return "ristretto255";
    case GroupId::toy23: return "toy23";
  }
  return "unknown";
}

GroupId parse_group_id(std::string_view name) {
  if (name == "ristretto255") return GroupId::ristretto255;
  if (name == "toy23" || name == "toy") return GroupId::toy23;
  throw Error(Errc::invalid_params, "unknown group backend: " + std::string(name));
}

Scalar Group::from_u64(std::uint64_t v) const {
  std::array<std::uint8_t, 64> wide{};
  for (int i = 0; i < 8; ++i) wide[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return do_reduce_wide(wide);
}

Scalar Group::mulsub(const Scalar& r, const Scalar& e, const Scalar& y) const {
  ++metrics::local().mulsub;
  return do_mulsub(r, e, y);
}

Scalar Group::sum(std::span<const Scalar> terms) const {
  ++metrics::local().scalar_sum;
  Scalar acc = zero();
  for (const auto& t : terms) acc = do_add(acc, t);
  return acc;
}

Scalar Group::random_scalar(Rng& rng) const {
  std::array<std::uint8_t, 64> wide;
  for (;;) {
    rng.fill(wide);
    Scalar s = do_reduce_wide(wide);
    if (s != zero()) {
      wipe(wide);
      return s;
    }
  }
}

std::optional<Scalar> Group::decode_scalar(ByteView in) const {
  if (in.size() != 32) return std::nullopt;
  Scalar s;
  std::copy(in.begin(), in.end(), s.bytes.begin());
  if (!is_canonical(s.bytes)) return std::nullopt;
  return s;
}

GroupElement Group::exp(const GroupElement& base, const Scalar& x) const {
  ++metrics::local().exp;
  return do_exp(base, x);
}

GroupElement Group::exp_base(const Scalar& x) const {
  ++metrics::local().exp;
  return do_exp_base(x);
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const {
  ++metrics::local().elem_mul;
  return do_mul(a, b);
}

GroupElement Group::product(std::span<const GroupElement> xs) const {
  if (xs.empty()) throw Error(Errc::empty_list, "product of an empty list");
  GroupElement acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = mul(acc, xs[i]);
  return acc;
}

std::optional<GroupElement> Group::decode_element(ByteView in) const {
  if (in.size() != 32) return std::nullopt;
  GroupElement e;
  std::copy(in.begin(), in.end(), e.bytes.begin());
  if (!is_member(e.bytes)) return std::nullopt;
  return e;
}

bool Group::verify_eq(const GroupElement& R, const Scalar& s, const GroupElement& Y,
                      const Scalar& e) const {
  return mul(exp_base(s), exp(Y, e)) == R;
}

namespace {

class Ristretto255 final : public Group {
 public:
  Ristretto255() {
    init_crypto();
    Scalar one;
    one.bytes[0] = 1;
    generator_ = do_exp_base(one);
  }

  GroupId id() const noexcept override { return GroupId::ristretto255; }

  Bytes32 order() const noexcept override {
    // 2^252 + 27742317777372353535851937790883648493
    return {0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58, 0xd6, 0x9c, 0xf7,
            0xa2, 0xde, 0xf9, 0xde, 0x14, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10};
  }

 protected:
  Scalar do_add(const Scalar& a, const Scalar& b) const override {
    Scalar out;
    crypto_core_ristretto255_scalar_add(out.bytes.data(), a.bytes.data(), b.bytes.data());
    return out;
  }

  Scalar do_mulsub(const Scalar& r, const Scalar& e, const Scalar& y) const override {
    Scalar ey;
    Scalar out;
    crypto_core_ristretto255_scalar_mul(ey.bytes.data(), e.bytes.data(), y.bytes.data());
    crypto_core_ristretto255_scalar_sub(out.bytes.data(), r.bytes.data(), ey.bytes.data());
    wipe(ey.bytes);
    return out;
  }

  Scalar do_reduce_wide(std::span<const std::uint8_t, 64> wide) const override {
    Scalar out;
    crypto_core_ristretto255_scalar_reduce(out.bytes.data(), wide.data());
    return out;
  }

  bool is_canonical(const Bytes32& s) const override {
    std::array<std::uint8_t, 64> wide{};
    std::copy(s.begin(), s.end(), wide.begin());
    Scalar reduced = do_reduce_wide(wide);
    return reduced.bytes == s;
  }

  GroupElement do_generator() const override { return generator_; }
  GroupElement do_identity() const override { return {}; }

  GroupElement do_exp(const GroupElement& base, const Scalar& x) const override {
    GroupElement out;
    // A -1 return means the result is the identity (all-zero encoding) or the
    // base failed to decode; bases are validated on construction.
    if (crypto_scalarmult_ristretto255(out.bytes.data(), x.bytes.data(), base.bytes.data()) != 0) {
      return {};
    }
    return out;
  }

  GroupElement do_exp_base(const Scalar& x) const override {
    GroupElement out;
    if (crypto_scalarmult_ristretto255_base(out.bytes.data(), x.bytes.data()) != 0) return {};
    return out;
  }

  GroupElement do_mul(const GroupElement& a, const GroupElement& b) const override {
    GroupElement out;
    if (crypto_core_ristretto255_add(out.bytes.data(), a.bytes.data(), b.bytes.data()) != 0) {
      throw Error(Errc::decode_error, "invalid ristretto255 element");
    }
    return out;
  }

  bool is_member(const Bytes32& encoded) const override {
    return crypto_core_ristretto255_is_valid_point(encoded.data()) == 1;
  }

 private:
  GroupElement generator_;
};

class ToyGroup final : public Group {
 public:
  static constexpr std::uint32_t kP = 23;
  static constexpr std::uint32_t kQ = 11;
  static constexpr std::uint32_t kGenerator = 2;

  GroupId id() const noexcept override { return GroupId::toy23; }
  Bytes32 order() const noexcept override { return encode(kQ); }

 protected:
  Scalar do_add(const Scalar& a, const Scalar& b) const override {
    return {encode((value(a.bytes) + value(b.bytes)) % kQ)};
  }

  Scalar do_mulsub(const Scalar& r, const Scalar& e, const Scalar& y) const override {
    std::uint32_t ey = (value(e.bytes) * value(y.bytes)) % kQ;
    return {encode((value(r.bytes) + kQ - ey) % kQ)};
  }

  Scalar do_reduce_wide(std::span<const std::uint8_t, 64> wide) const override {
    std::uint32_t acc = 0;
    for (std::size_t i = wide.size(); i-- > 0;) acc = (acc * 256 + wide[i]) % kQ;
    return {encode(acc)};
  }

  bool is_canonical(const Bytes32& s) const override {
    return high_bytes_zero(s) && s[0] < kQ;
  }

  GroupElement do_generator() const override { return {encode(kGenerator)}; }
  GroupElement do_identity() const override { return {encode(1)}; }

  GroupElement do_exp(const GroupElement& base, const Scalar& x) const override {
    return {encode(pow_mod(value(base.bytes), value(x.bytes)))};
  }

  GroupElement do_exp_base(const Scalar& x) const override {
    return {encode(pow_mod(kGenerator, value(x.bytes)))};
  }

  GroupElement do_mul(const GroupElement& a, const GroupElement& b) const override {
    return {encode((value(a.bytes) * value(b.bytes)) % kP)};
  }

  bool is_member(const Bytes32& e) const override {
    if (!high_bytes_zero(e)) return false;
    std::uint32_t v = e[0];
    return v >= 1 && v < kP && pow_mod(v, kQ) == 1;
  }

 private:
  static bool high_bytes_zero(const Bytes32& b) {
    return std::all_of(b.begin() + 1, b.end(), [](std::uint8_t x) { return x == 0; });
  }
  static std::uint32_t value(const Bytes32& b) { return b[0]; }
  static Bytes32 encode(std::uint32_t v) {
    Bytes32 out{};
    out[0] = static_cast<std::uint8_t>(v);
    return out;
  }
  static std::uint32_t pow_mod(std::uint32_t base, std::uint32_t e) {
    std::uint32_t result = 1;
    base %= kP;
    while (e > 0) {
      if (e & 1) result = (result * base) % kP;
      base = (base * base) % kP;
      e >>= 1;
    }
    return result;
  }
};

}  // namespace

const Group& ristretto255() {
  static const Ristretto255 g;
  return g;
}

const Group& toy_group() {
  static const ToyGroup g;
  return g;
}

const Group& group_by_id(GroupId id) {
  switch (id) {
    case GroupId::ristretto255: return ristretto255();
    case GroupId::toy23: return toy_group();
  }
  throw Error(Errc::invalid_params, "unknown group id");
}

}  // namespace lrsha
