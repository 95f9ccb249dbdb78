#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pesf/container.hpp"
#include "pesf/error.hpp"
#include "test_support.hpp"

using namespace pesf;

namespace {

container::PayloadContainer random_container(std::mt19937_64& gen, std::size_t ct_len) {
    container::PayloadContainer c;
    c.iterations = static_cast<std::uint32_t>(gen());
    const Bytes salt = test_support::random_bytes(c.salt.size(), gen());
    std::copy(salt.begin(), salt.end(), c.salt.begin());
    const Bytes nonce = test_support::random_bytes(c.nonce.size(), gen());
    std::copy(nonce.begin(), nonce.end(), c.nonce.begin());
    c.ciphertext = test_support::random_bytes(ct_len, gen());
    const Bytes tag = test_support::random_bytes(c.tag.size(), gen());
    std::copy(tag.begin(), tag.end(), c.tag.begin());
    return c;
}

bool equal(const container::PayloadContainer& a, const container::PayloadContainer& b) {
    return a.iterations == b.iterations && a.salt == b.salt && a.nonce == b.nonce &&
           a.ciphertext == b.ciphertext && a.tag == b.tag;
}

} // namespace

TEST_CASE("the fixed overhead is 57 bytes, by field arithmetic") {
    CHECK(container::kOverhead == 4 + 1 + 4 + 16 + 12 + 4 + 16);

    container::PayloadContainer c;
    const Bytes empty = container::encode_container(c);
    CHECK(empty.size() == 57);
    CHECK(empty[0] == 'P');
    CHECK(empty[1] == 'E');
    CHECK(empty[2] == 'S');
    CHECK(empty[3] == 'F');
    CHECK(empty[4] == 0x01);

    c.ciphertext.resize(0x100);
    CHECK(container::encode_container(c).size() == 0x139);
}

TEST_CASE("the byte layout is exactly as documented") {
    std::mt19937_64 gen(41);
    const auto c = random_container(gen, 5);
    const Bytes wire = container::encode_container(c);

    REQUIRE(wire.size() == 57 + 5);
    CHECK(get_u32_le(wire.data() + 5) == c.iterations);
    CHECK(std::equal(c.salt.begin(), c.salt.end(), wire.begin() + 9));
    CHECK(std::equal(c.nonce.begin(), c.nonce.end(), wire.begin() + 25));
    CHECK(get_u32_le(wire.data() + 37) == 5);
    CHECK(std::equal(c.ciphertext.begin(), c.ciphertext.end(), wire.begin() + 41));
    CHECK(std::equal(c.tag.begin(), c.tag.end(), wire.begin() + 41 + 5));
}

TEST_CASE("decode inverts encode for random containers") {
    std::mt19937_64 gen(42);
    for (int i = 0; i < 100; ++i) {
        const auto c = random_container(gen, gen() % 500);
        CHECK(equal(container::decode_container(container::encode_container(c)), c));
    }
}

TEST_CASE("decode ignores trailing slack residue") {
    std::mt19937_64 gen(43);
    for (int i = 0; i < 20; ++i) {
        const auto c = random_container(gen, gen() % 100);
        Bytes wire = container::encode_container(c);
        const Bytes garbage = test_support::random_bytes(100, gen());
        wire.insert(wire.end(), garbage.begin(), garbage.end());
        CHECK(equal(container::decode_container(wire), c));
    }
}

TEST_CASE("decode rejects malformed frames with specific errors") {
    std::mt19937_64 gen(44);
    const Bytes good = container::encode_container(random_container(gen, 10));

    auto code_of = [](const Bytes& bytes) {
        try {
            (void)container::decode_container(bytes);
        } catch (const Error& e) {
            return e.code();
        }
        FAIL("decode unexpectedly succeeded");
        return ErrorCode::BadMagic;
    };

    SUBCASE("wrong magic") {
        Bytes bad = good;
        bad[0] = 'Q';
        CHECK(code_of(bad) == ErrorCode::BadMagic);
        CHECK(code_of(Bytes{}) == ErrorCode::BadMagic);
        CHECK(code_of(Bytes{'P', 'E', 'S'}) == ErrorCode::BadMagic);
    }
    SUBCASE("unknown version") {
        Bytes bad = good;
        bad[4] = 0x02;
        CHECK(code_of(bad) == ErrorCode::UnsupportedVersion);
    }
    SUBCASE("magic only, header cut short") {
        CHECK(code_of(Bytes{'P', 'E', 'S', 'F'}) == ErrorCode::TruncatedContainer);
        Bytes headerless(good.begin(), good.begin() + 30);
        CHECK(code_of(headerless) == ErrorCode::TruncatedContainer);
    }
    SUBCASE("declared ciphertext length overruns the bytes") {
        Bytes bad = good;
        put_u32_le(bad.data() + 37, 11); // one more than available
        CHECK(code_of(bad) == ErrorCode::TruncatedContainer);
        put_u32_le(bad.data() + 37, 0xFFFFFFFF); // catches naive 32-bit overflow
        CHECK(code_of(bad) == ErrorCode::TruncatedContainer);
    }
}

TEST_CASE("decode is total: random bytes never crash it") {
    std::mt19937_64 gen(45);
    int decoded = 0;
    for (int i = 0; i < 10000; ++i) {
        Bytes bytes = test_support::random_bytes(gen() % 120, gen());
        // bias half the cases toward the interesting prefix
        if (i % 2 == 0 && bytes.size() >= 5) {
            bytes[0] = 'P';
            bytes[1] = 'E';
            bytes[2] = 'S';
            bytes[3] = 'F';
            if (i % 4 == 0) bytes[4] = 0x01;
            if (i % 8 == 0 && bytes.size() >= container::kOverhead) {
                // plant a length that fits, so some frames fully decode
                put_u32_le(bytes.data() + 37,
                           static_cast<std::uint32_t>(bytes.size() - container::kOverhead));
            }
        }
        try {
            (void)container::decode_container(bytes);
            ++decoded;
        } catch (const Error& e) {
            const bool declared = e.code() == ErrorCode::BadMagic ||
                                  e.code() == ErrorCode::UnsupportedVersion ||
                                  e.code() == ErrorCode::TruncatedContainer;
            REQUIRE(declared);
        }
    }
    CHECK(decoded > 0); // some biased frames must decode
}
