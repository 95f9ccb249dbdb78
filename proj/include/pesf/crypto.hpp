#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "pesf/bytes.hpp"

// Password-based authenticated encryption: PBKDF2-HMAC-SHA256 key
// derivation and AES-GCM sealing. Ciphertext length equals plaintext
// length, which keeps carrier capacity accounting exact.
namespace pesf::crypto {

enum class KeyBits : std::uint32_t {
    k128 = 128,
    k192 = 192,
    k256 = 256,
};

constexpr std::size_t kSaltLen = 16;
constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;
constexpr std::uint32_t kDefaultKdfIterations = 100000;
// Upper bound on accepted iteration counts. An attacker-chosen count from a
// hostile container must not be able to stall extraction indefinitely.
constexpr std::uint32_t kMaxKdfIterations = 1u << 22;

struct KdfParams {
    std::array<std::uint8_t, kSaltLen> salt{};
    std::uint32_t iterations = kDefaultKdfIterations;
};

struct SealedBox {
    std::array<std::uint8_t, kNonceLen> nonce{};
    Bytes ciphertext;
    std::array<std::uint8_t, kTagLen> tag{};
};

// Source of nonce and salt bytes. The default draws from the operating
// system; tests and the CLI's deterministic mode inject a seeded one.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;
};

// getrandom(2), falling back to /dev/urandom. Stateless, safe for
// concurrent draws.
class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

// splitmix64 stream; byte-for-byte reproducible for a fixed seed. Test and
// CLI --rng-seed use only; not safe to share across threads.
class DeterministicRandom final : public RandomSource {
public:
    explicit DeterministicRandom(std::uint64_t seed) : state_(seed) {}
    void fill(std::span<std::uint8_t> out) override;

private:
    std::uint64_t state_;
};

RandomSource& system_random();

// PBKDF2-HMAC-SHA256 of the password under params; output key_bits/8 bytes.
// Throws EmptyPassword, InvalidKdfParams.
Bytes derive_key(ByteSpan password, const KdfParams& params, KeyBits key_bits);

// AES-GCM encrypt with a fresh random 12-byte nonce and empty AAD.
// Throws BadKeyLength.
SealedBox seal(ByteSpan key, ByteSpan plaintext, RandomSource& rng = system_random());

// AES-GCM decrypt. The 128-bit tag binds nonce and ciphertext; any modified
// bit, or a wrong key, yields AuthenticationFailed. Tag comparison is
// constant time.
Bytes open(ByteSpan key, const SealedBox& box);

} // namespace pesf::crypto
