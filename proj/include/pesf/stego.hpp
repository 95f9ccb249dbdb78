#pragma once

#include <cstdint>
#include <vector>

#include "pesf/bytes.hpp"
#include "pesf/carrier.hpp"
#include "pesf/crypto.hpp"
#include "pesf/pe.hpp"

// Top-level pipelines. Hiding: parse the cover, enumerate slack, derive a
// key from the password, seal the secret, frame it, scatter it into the
// slack, re-serialize. Extraction replays the same slack order either from
// the stego file alone (blind) or from the original cover's layout
// (distortion).
namespace pesf::stego {

struct StegoOptions {
    carrier::CarrierPolicy policy;
    crypto::KeyBits key_bits = crypto::KeyBits::k128;
    std::uint32_t iterations = crypto::kDefaultKdfIterations;
};

struct DiffRecord {
    std::uint32_t offset = 0;
    std::uint8_t stego_byte = 0;
    std::uint8_t cover_byte = 0;
};

struct CapacityReport {
    std::uint32_t capacity = 0;
    std::vector<carrier::SlackRegion> regions;
    pe::ValidationReport validation;
    bool container_magic_present = false;
};

// Embed `secret` into `cover`. The output has exactly the cover's length and
// differs from it only at slack offsets. Throws parser errors,
// InsufficientCapacity (carrier smaller than 57 + secret size),
// EmptyPassword.
Bytes hide(ByteSpan cover, ByteSpan secret, ByteSpan password, const StegoOptions& opts,
           crypto::RandomSource& rng = crypto::system_random());

// Recover the secret from the stego file alone. Throws NoContainerFound when
// the slack holds no recognizable frame, AuthenticationFailed on a wrong
// password or any tampering, and parser errors.
Bytes retract_blind(ByteSpan stego, ByteSpan password, const StegoOptions& opts);

// All byte positions where the two buffers differ, ascending. Throws
// LengthMismatch when sizes differ (a resized stego file breaks the
// size-invariance protocol).
std::vector<DiffRecord> diff_cover(ByteSpan cover, ByteSpan stego);

// Recover the secret using the authentic original cover. The slack layout is
// computed from the cover, so tampered stego headers cannot redirect the
// read; the stego bytes themselves are never parsed. Agrees with
// retract_blind on untampered stego files.
Bytes retract_distortion(ByteSpan stego, ByteSpan cover, ByteSpan password,
                         const StegoOptions& opts);

// Read-only operator summary: capacity, regions, validation findings, and
// whether the slack starts with the container magic.
CapacityReport inspect(ByteSpan file, const StegoOptions& opts);

} // namespace pesf::stego
