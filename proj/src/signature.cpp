#include "lrsha/signature.hpp"

#include "lrsha/error.hpp"

namespace lrsha {

Bytes Signature::encode() const {
  return Writer(kEncodedSize).raw(s.bytes).raw(x).u64(epoch).take();
}

Signature Signature::decode(ByteView in) {
  if (in.size() != kEncodedSize) throw Error(Errc::decode_error, "signature must be 72 bytes");
  Reader r(in);
  Signature sig;
  sig.s.bytes = r.raw32();
  sig.x = r.raw32();
  sig.epoch = r.u64();
  return sig;
}

}  // namespace lrsha
