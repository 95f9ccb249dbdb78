#include "pesf/container.hpp"

#include <cstring>

#include "pesf/error.hpp"

namespace pesf::container {

Bytes encode_container(const PayloadContainer& c) {
    Bytes out;
    out.reserve(kOverhead + c.ciphertext.size());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(kVersion);

    std::uint8_t scratch[4];
    put_u32_le(scratch, c.iterations);
    out.insert(out.end(), scratch, scratch + 4);
    out.insert(out.end(), c.salt.begin(), c.salt.end());
    out.insert(out.end(), c.nonce.begin(), c.nonce.end());
    put_u32_le(scratch, static_cast<std::uint32_t>(c.ciphertext.size()));
    out.insert(out.end(), scratch, scratch + 4);
    out.insert(out.end(), c.ciphertext.begin(), c.ciphertext.end());
    out.insert(out.end(), c.tag.begin(), c.tag.end());
    return out;
}

PayloadContainer decode_container(ByteSpan bytes) {
    if (bytes.size() < kMagic.size() ||
        std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        raise(ErrorCode::BadMagic, "container magic missing");
    }
    if (bytes.size() < 5) {
        raise(ErrorCode::TruncatedContainer, "container header cut short");
    }
    if (bytes[4] != kVersion) {
        raise(ErrorCode::UnsupportedVersion,
              "container version " + std::to_string(bytes[4]) + " not supported");
    }
    if (bytes.size() < kOverhead) {
        raise(ErrorCode::TruncatedContainer, "container header cut short");
    }

    PayloadContainer c;
    c.iterations = get_u32_le(bytes.data() + 5);
    std::memcpy(c.salt.data(), bytes.data() + 9, c.salt.size());
    std::memcpy(c.nonce.data(), bytes.data() + 25, c.nonce.size());
    const std::uint32_t ct_len = get_u32_le(bytes.data() + 37);
    if (kOverhead + std::uint64_t{ct_len} > bytes.size()) {
        raise(ErrorCode::TruncatedContainer,
              "declared ciphertext length " + std::to_string(ct_len) +
                  " overruns available bytes");
    }
    c.ciphertext.assign(bytes.begin() + 41, bytes.begin() + 41 + ct_len);
    std::memcpy(c.tag.data(), bytes.data() + 41 + ct_len, c.tag.size());
    return c;
}

} // namespace pesf::container
