#pragma once

#include "f3b/group.hpp"

namespace f3b {

// Chaum-Pedersen proof that two images share a discrete log under two bases,
// made non-interactive with Fiat-Shamir: challenge c = H(statement, a1, a2)
// over commitments a1 = base1^w, a2 = base2^w, and response r = w - x c.
// The verifier recomputes a1 = base1^r image1^c, a2 = base2^r image2^c.
struct DleqProof {
  Scalar challenge;
  Scalar response;

  static constexpr std::size_t kBytes = 64;

  void write(ByteWriter& w) const {
    w.raw(challenge.bytes());
    w.raw(response.bytes());
  }
  static DleqProof read(ByteReader& r) {
    DleqProof p;
    p.challenge = Scalar::from_bytes(r.raw(32));
    p.response = Scalar::from_bytes(r.raw(32));
    return p;
  }
  friend bool operator==(const DleqProof&, const DleqProof&) = default;
};

}  // namespace f3b
