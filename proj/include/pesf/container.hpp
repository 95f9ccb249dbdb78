#pragma once

#include <array>
#include <cstdint>

#include "pesf/bytes.hpp"
#include "pesf/crypto.hpp"

// On-carrier wire format. Little-endian, versioned, with an explicit length
// field: the bytes after the payload are arbitrary slack residue, so a
// terminator sentinel would be unsafe.
//
//   offset  size  field
//        0     4  magic "PESF"
//        4     1  version (0x01)
//        5     4  kdf iterations, u32 LE
//        9    16  kdf salt
//       25    12  nonce
//       37     4  ciphertext length, u32 LE
//       41     n  ciphertext
//     41+n    16  tag
//
// The magic is a plain marker, not camouflage: anyone scanning slack bytes
// can detect a payload. Confidentiality comes from the encryption alone.
namespace pesf::container {

constexpr std::array<std::uint8_t, 4> kMagic{0x50, 0x45, 0x53, 0x46}; // "PESF"
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kOverhead = 57; // 4 + 1 + 4 + 16 + 12 + 4 + 16

struct PayloadContainer {
    std::uint32_t iterations = crypto::kDefaultKdfIterations;
    std::array<std::uint8_t, crypto::kSaltLen> salt{};
    std::array<std::uint8_t, crypto::kNonceLen> nonce{};
    Bytes ciphertext;
    std::array<std::uint8_t, crypto::kTagLen> tag{};
};

// Exact layout above; output length is kOverhead + ciphertext size.
Bytes encode_container(const PayloadContainer& c);

// Parse the layout from the front of `bytes`, ignoring trailing residue.
// Total on arbitrary input: throws BadMagic, UnsupportedVersion or
// TruncatedContainer, never crashes.
PayloadContainer decode_container(ByteSpan bytes);

} // namespace pesf::container
