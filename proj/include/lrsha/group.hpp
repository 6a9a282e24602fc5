#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "lrsha/bytes.hpp"
#include "lrsha/rng.hpp"

namespace lrsha {

enum class GroupId : std::uint8_t {
  ristretto255 = 1,
  toy23 = 2,  // p = 23, q = 11, generator 2; for exhaustive testing only
};

std::string_view to_string(GroupId id);
// Accepts "ristretto255" and "toy23"; throws Errc::invalid_params otherwise.
GroupId parse_group_id(std::string_view name);

// Integer modulo the group order q. Canonical form: 32 bytes, little-endian, value < q.
struct Scalar {
  Bytes32 bytes{};
  friend bool operator==(const Scalar&, const Scalar&) = default;
};

// Element of the prime-order group, in canonical 32-byte encoding.
struct GroupElement {
  Bytes32 bytes{};
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

// Prime-order cyclic group with generator `generator()`. The public methods
// are non-virtual so every backend is instrumented identically through
// metrics::local().
class Group {
 public:
  virtual ~Group() = default;

  virtual GroupId id() const noexcept = 0;
  // q, little-endian.
  virtual Bytes32 order() const noexcept = 0;

  Scalar zero() const { return {}; }
  Scalar from_u64(std::uint64_t v) const;
  Scalar add(const Scalar& a, const Scalar& b) const { return do_add(a, b); }
  // (r - e*y) mod q
  Scalar mulsub(const Scalar& r, const Scalar& e, const Scalar& y) const;
  // Sum of all terms mod q; zero for an empty span.
  Scalar sum(std::span<const Scalar> terms) const;
  // Reduces a 512-bit little-endian integer mod q.
  Scalar reduce_wide(std::span<const std::uint8_t, 64> wide) const { return do_reduce_wide(wide); }
  // Uniform non-zero scalar.
  Scalar random_scalar(Rng& rng) const;
  // Rejects anything that is not exactly 32 bytes holding a value < q.
  std::optional<Scalar> decode_scalar(ByteView in) const;

  GroupElement generator() const { return do_generator(); }
  GroupElement identity() const { return do_identity(); }
  GroupElement exp(const GroupElement& base, const Scalar& x) const;
  GroupElement exp_base(const Scalar& x) const;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  // Throws Errc::empty_list on an empty span.
  GroupElement product(std::span<const GroupElement> xs) const;
  // Rejects non-canonical encodings and anything outside the order-q subgroup.
  std::optional<GroupElement> decode_element(ByteView in) const;

  // R == g^s * Y^e; two exponentiations.
  bool verify_eq(const GroupElement& R, const Scalar& s, const GroupElement& Y,
                 const Scalar& e) const;

 protected:
  virtual Scalar do_add(const Scalar& a, const Scalar& b) const = 0;
  virtual Scalar do_mulsub(const Scalar& r, const Scalar& e, const Scalar& y) const = 0;
  virtual Scalar do_reduce_wide(std::span<const std::uint8_t, 64> wide) const = 0;
  virtual bool is_canonical(const Bytes32& scalar) const = 0;
  virtual GroupElement do_generator() const = 0;
  virtual GroupElement do_identity() const = 0;
  virtual GroupElement do_exp(const GroupElement& base, const Scalar& x) const = 0;
  virtual GroupElement do_exp_base(const Scalar& x) const = 0;
  virtual GroupElement do_mul(const GroupElement& a, const GroupElement& b) const = 0;
  virtual bool is_member(const Bytes32& encoded) const = 0;
};

// libsodium's ristretto255: prime order q = 2^252 + 27742317777372353535851937790883648493.
const Group& ristretto255();
// Subgroup of order 11 in Z_23^*, generated by 2. Elements encode as the
// residue in byte 0 with the remaining 31 bytes zero.
const Group& toy_group();
const Group& group_by_id(GroupId id);

}  // namespace lrsha
