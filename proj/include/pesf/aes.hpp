#pragma once

#include <array>
#include <cstdint>

#include "pesf/bytes.hpp"

namespace pesf::crypto {

// AES block cipher, encrypt direction only (FIPS 197). CTR and GCM need no
// inverse cipher. Key sizes 128/192/256 bits; anything else throws
// BadKeyLength.
class AesKey {
public:
    explicit AesKey(ByteSpan key);

    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

    int rounds() const { return rounds_; }

private:
    std::array<std::uint32_t, 60> round_keys_{};
    int rounds_ = 0;
};

} // namespace pesf::crypto
