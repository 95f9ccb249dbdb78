#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "pesf/bytes.hpp"

// SHA-256, HMAC-SHA256 and PBKDF2-HMAC-SHA256 (FIPS 180-4, RFC 2104,
// RFC 8018). Self-contained; unit tests pin the published vectors.
namespace pesf::crypto {

class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(ByteSpan data);
    std::array<std::uint8_t, 32> finish();

    static std::array<std::uint8_t, 32> digest(ByteSpan data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    void compress(const std::uint8_t block[64]);

    std::array<std::uint32_t, 8> state_{};
    std::uint64_t total_len_ = 0;
    std::array<std::uint8_t, 64> buffer_{};
    std::size_t buffered_ = 0;
};

// Keyed MAC with precomputed pad states so PBKDF2 pays two compressions per
// iteration instead of four.
class HmacSha256 {
public:
    explicit HmacSha256(ByteSpan key);

    std::array<std::uint8_t, 32> mac(ByteSpan message) const;

private:
    Sha256 inner_state_; // absorbed key ^ ipad
    Sha256 outer_state_; // absorbed key ^ opad
};

std::array<std::uint8_t, 32> hmac_sha256(ByteSpan key, ByteSpan message);

Bytes pbkdf2_hmac_sha256(ByteSpan password, ByteSpan salt, std::uint32_t iterations,
                         std::size_t dk_len);

} // namespace pesf::crypto
