#include "pesf/sha256.hpp"

#include <cstring>

#include "pesf/error.hpp"

namespace pesf::crypto {

namespace {

constexpr std::uint32_t kRoundConstants[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
};

inline std::uint32_t rotr(std::uint32_t x, int n) {
    return (x >> n) | (x << (32 - n));
}

} // namespace

void Sha256::reset() {
    state_ = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
              0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    total_len_ = 0;
    buffered_ = 0;
}

void Sha256::compress(const std::uint8_t block[64]) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
        w[i] = (std::uint32_t{block[4 * i]} << 24) | (std::uint32_t{block[4 * i + 1]} << 16) |
               (std::uint32_t{block[4 * i + 2]} << 8) | std::uint32_t{block[4 * i + 3]};
    }
    for (int i = 16; i < 64; ++i) {
        const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }

    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
        const std::uint32_t ch = (e & f) ^ (~e & g);
        const std::uint32_t t1 = h + s1 + ch + kRoundConstants[i] + w[i];
        const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
        const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        const std::uint32_t t2 = s0 + maj;
        h = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
}

void Sha256::update(ByteSpan data) {
    total_len_ += data.size();
    std::size_t pos = 0;
    if (buffered_ > 0) {
        const std::size_t take = std::min(data.size(), buffer_.size() - buffered_);
        std::memcpy(buffer_.data() + buffered_, data.data(), take);
        buffered_ += take;
        pos += take;
        if (buffered_ == 64) {
            compress(buffer_.data());
            buffered_ = 0;
        }
    }
    while (pos + 64 <= data.size()) {
        compress(data.data() + pos);
        pos += 64;
    }
    if (pos < data.size()) {
        std::memcpy(buffer_.data(), data.data() + pos, data.size() - pos);
        buffered_ = data.size() - pos;
    }
}

std::array<std::uint8_t, 32> Sha256::finish() {
    const std::uint64_t bit_len = total_len_ * 8;
    const std::uint8_t pad = 0x80;
    update(ByteSpan(&pad, 1));
    const std::uint8_t zero = 0x00;
    while (buffered_ != 56) {
        update(ByteSpan(&zero, 1));
    }
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) {
        len_be[i] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
    }
    update(ByteSpan(len_be, 8));

    std::array<std::uint8_t, 32> out{};
    for (int i = 0; i < 8; ++i) {
        out[4 * i + 0] = static_cast<std::uint8_t>(state_[i] >> 24);
        out[4 * i + 1] = static_cast<std::uint8_t>(state_[i] >> 16);
        out[4 * i + 2] = static_cast<std::uint8_t>(state_[i] >> 8);
        out[4 * i + 3] = static_cast<std::uint8_t>(state_[i]);
    }
    reset();
    return out;
}

HmacSha256::HmacSha256(ByteSpan key) {
    std::array<std::uint8_t, 64> k0{};
    if (key.size() > 64) {
        const auto digest = Sha256::digest(key);
        std::memcpy(k0.data(), digest.data(), digest.size());
    } else {
        std::memcpy(k0.data(), key.data(), key.size());
    }
    std::array<std::uint8_t, 64> ipad{}, opad{};
    for (std::size_t i = 0; i < 64; ++i) {
        ipad[i] = static_cast<std::uint8_t>(k0[i] ^ 0x36);
        opad[i] = static_cast<std::uint8_t>(k0[i] ^ 0x5c);
    }
    inner_state_.update(ByteSpan(ipad.data(), ipad.size()));
    outer_state_.update(ByteSpan(opad.data(), opad.size()));
}

std::array<std::uint8_t, 32> HmacSha256::mac(ByteSpan message) const {
    Sha256 inner = inner_state_;
    inner.update(message);
    const auto inner_digest = inner.finish();
    Sha256 outer = outer_state_;
    outer.update(ByteSpan(inner_digest.data(), inner_digest.size()));
    return outer.finish();
}

std::array<std::uint8_t, 32> hmac_sha256(ByteSpan key, ByteSpan message) {
    return HmacSha256(key).mac(message);
}

Bytes pbkdf2_hmac_sha256(ByteSpan password, ByteSpan salt, std::uint32_t iterations,
                         std::size_t dk_len) {
    if (iterations == 0) {
        raise(ErrorCode::InvalidKdfParams, "iteration count must be at least 1");
    }
    const HmacSha256 prf(password);
    Bytes out;
    out.reserve(dk_len);

    const std::size_t blocks = (dk_len + 31) / 32;
    for (std::size_t block = 1; block <= blocks; ++block) {
        Bytes first_input(salt.begin(), salt.end());
        first_input.push_back(static_cast<std::uint8_t>(block >> 24));
        first_input.push_back(static_cast<std::uint8_t>(block >> 16));
        first_input.push_back(static_cast<std::uint8_t>(block >> 8));
        first_input.push_back(static_cast<std::uint8_t>(block));

        auto u = prf.mac(first_input);
        auto acc = u;
        for (std::uint32_t i = 1; i < iterations; ++i) {
            u = prf.mac(ByteSpan(u.data(), u.size()));
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] ^= u[j];
        }
        const std::size_t need = std::min<std::size_t>(32, dk_len - out.size());
        out.insert(out.end(), acc.begin(), acc.begin() + need);
    }
    return out;
}

} // namespace pesf::crypto
