#include "pesf/crypto.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>

#include <sys/random.h>

#include "pesf/aes.hpp"
#include "pesf/error.hpp"
#include "pesf/sha256.hpp"

namespace pesf::crypto {

namespace {

// GF(2^128) block as big-endian halves.
struct Block128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
};

Block128 load_block(const std::uint8_t b[16]) {
    Block128 x;
    for (int i = 0; i < 8; ++i) x.hi = (x.hi << 8) | b[i];
    for (int i = 8; i < 16; ++i) x.lo = (x.lo << 8) | b[i];
    return x;
}

void store_block(const Block128& x, std::uint8_t out[16]) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(x.hi >> (56 - 8 * i));
    for (int i = 0; i < 8; ++i) out[8 + i] = static_cast<std::uint8_t>(x.lo >> (56 - 8 * i));
}

// Carry-less multiply in GF(2^128) with the GCM reduction polynomial,
// bit-serial right-shift form.
Block128 gf_mult(const Block128& x, const Block128& y) {
    Block128 z;
    Block128 v = y;
    for (int i = 0; i < 128; ++i) {
        const bool xi = i < 64 ? ((x.hi >> (63 - i)) & 1) : ((x.lo >> (127 - i)) & 1);
        if (xi) {
            z.hi ^= v.hi;
            z.lo ^= v.lo;
        }
        const bool carry = v.lo & 1;
        v.lo = (v.lo >> 1) | (v.hi << 63);
        v.hi >>= 1;
        if (carry) v.hi ^= 0xE1ULL << 56;
    }
    return z;
}

class Ghash {
public:
    explicit Ghash(const Block128& h) : h_(h) {}

    void absorb_padded(ByteSpan data) {
        std::size_t pos = 0;
        while (pos < data.size()) {
            std::uint8_t block[16] = {};
            const std::size_t n = std::min<std::size_t>(16, data.size() - pos);
            std::memcpy(block, data.data() + pos, n);
            absorb_block(block);
            pos += n;
        }
    }

    void absorb_lengths(std::uint64_t aad_bits, std::uint64_t ct_bits) {
        std::uint8_t block[16];
        for (int i = 0; i < 8; ++i) block[i] = static_cast<std::uint8_t>(aad_bits >> (56 - 8 * i));
        for (int i = 0; i < 8; ++i)
            block[8 + i] = static_cast<std::uint8_t>(ct_bits >> (56 - 8 * i));
        absorb_block(block);
    }

    Block128 state() const { return y_; }

private:
    void absorb_block(const std::uint8_t block[16]) {
        const Block128 x = load_block(block);
        y_.hi ^= x.hi;
        y_.lo ^= x.lo;
        y_ = gf_mult(y_, h_);
    }

    Block128 h_;
    Block128 y_;
};

void inc32(std::uint8_t counter[16]) {
    for (int i = 15; i >= 12; --i) {
        if (++counter[i] != 0) break;
    }
}

void ctr_xor(const AesKey& key, const std::uint8_t j0[16], ByteSpan in, std::uint8_t* out) {
    std::uint8_t counter[16];
    std::memcpy(counter, j0, 16);
    std::size_t pos = 0;
    while (pos < in.size()) {
        inc32(counter);
        std::uint8_t keystream[16];
        key.encrypt_block(counter, keystream);
        const std::size_t n = std::min<std::size_t>(16, in.size() - pos);
        for (std::size_t i = 0; i < n; ++i) out[pos + i] = in[pos + i] ^ keystream[i];
        pos += n;
    }
}

// GCM tag over (nonce-derived J0, ciphertext), empty AAD.
std::array<std::uint8_t, kTagLen> gcm_tag(const AesKey& key, const std::uint8_t j0[16],
                                          ByteSpan ciphertext) {
    std::uint8_t zero[16] = {};
    std::uint8_t h_bytes[16];
    key.encrypt_block(zero, h_bytes);

    Ghash ghash(load_block(h_bytes));
    ghash.absorb_padded(ciphertext);
    ghash.absorb_lengths(0, std::uint64_t{ciphertext.size()} * 8);

    std::uint8_t s[16];
    store_block(ghash.state(), s);
    std::uint8_t e_j0[16];
    key.encrypt_block(j0, e_j0);

    std::array<std::uint8_t, kTagLen> tag{};
    for (int i = 0; i < 16; ++i) tag[i] = static_cast<std::uint8_t>(s[i] ^ e_j0[i]);
    return tag;
}

void build_j0(const std::array<std::uint8_t, kNonceLen>& nonce, std::uint8_t j0[16]) {
    std::memcpy(j0, nonce.data(), kNonceLen);
    j0[12] = 0;
    j0[13] = 0;
    j0[14] = 0;
    j0[15] = 1;
}

void fill_urandom(std::span<std::uint8_t> out) {
    std::FILE* f = std::fopen("/dev/urandom", "rb");
    if (f == nullptr || std::fread(out.data(), 1, out.size(), f) != out.size()) {
        if (f) std::fclose(f);
        throw std::runtime_error("cannot read /dev/urandom");
    }
    std::fclose(f);
}

} // namespace

void SystemRandom::fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        const ssize_t n = getrandom(out.data() + done, out.size() - done, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            fill_urandom(out.subspan(done));
            return;
        }
        done += static_cast<std::size_t>(n);
    }
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
    std::size_t pos = 0;
    while (pos < out.size()) {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        for (int i = 0; i < 8 && pos < out.size(); ++i, ++pos) {
            out[pos] = static_cast<std::uint8_t>(z >> (8 * i));
        }
    }
}

RandomSource& system_random() {
    static SystemRandom instance;
    return instance;
}

Bytes derive_key(ByteSpan password, const KdfParams& params, KeyBits key_bits) {
    if (password.empty()) {
        raise(ErrorCode::EmptyPassword, "password must not be empty");
    }
    if (params.iterations == 0 || params.iterations > kMaxKdfIterations) {
        raise(ErrorCode::InvalidKdfParams,
              "iteration count " + std::to_string(params.iterations) + " outside [1, " +
                  std::to_string(kMaxKdfIterations) + "]");
    }
    return pbkdf2_hmac_sha256(password, ByteSpan(params.salt.data(), params.salt.size()),
                              params.iterations, static_cast<std::size_t>(key_bits) / 8);
}

SealedBox seal(ByteSpan key, ByteSpan plaintext, RandomSource& rng) {
    const AesKey aes(key);

    SealedBox box;
    rng.fill(box.nonce);

    std::uint8_t j0[16];
    build_j0(box.nonce, j0);

    box.ciphertext.resize(plaintext.size());
    ctr_xor(aes, j0, plaintext, box.ciphertext.data());
    box.tag = gcm_tag(aes, j0, box.ciphertext);
    return box;
}

Bytes open(ByteSpan key, const SealedBox& box) {
    const AesKey aes(key);

    std::uint8_t j0[16];
    build_j0(box.nonce, j0);

    const auto expected = gcm_tag(aes, j0, box.ciphertext);
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) diff |= expected[i] ^ box.tag[i];
    if (diff != 0) {
        raise(ErrorCode::AuthenticationFailed, "tag mismatch (wrong key or modified data)");
    }

    Bytes plaintext(box.ciphertext.size());
    ctr_xor(aes, j0, box.ciphertext, plaintext.data());
    return plaintext;
}

} // namespace pesf::crypto
