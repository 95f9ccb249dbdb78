#include "pesf/stego.hpp"

#include <cstring>

#include "pesf/container.hpp"
#include "pesf/error.hpp"

namespace pesf::stego {

namespace {

// Shared tail of both retract paths: frame the gathered slack bytes, rebuild
// the key, authenticate, decrypt. Any frame-level inconsistency means there
// is no (valid) container to extract.
Bytes decode_and_open(ByteSpan slack_bytes, ByteSpan password, const StegoOptions& opts) {
    container::PayloadContainer frame;
    try {
        frame = container::decode_container(slack_bytes);
    } catch (const Error& e) {
        raise(ErrorCode::NoContainerFound, e.what());
    }
    if (frame.iterations == 0 || frame.iterations > crypto::kMaxKdfIterations) {
        raise(ErrorCode::NoContainerFound, "container declares an implausible KDF iteration count");
    }

    crypto::KdfParams params{frame.salt, frame.iterations};
    const Bytes key = crypto::derive_key(password, params, opts.key_bits);

    crypto::SealedBox box;
    box.nonce = frame.nonce;
    box.ciphertext = std::move(frame.ciphertext);
    box.tag = frame.tag;
    return crypto::open(key, box);
}

} // namespace

Bytes hide(ByteSpan cover, ByteSpan secret, ByteSpan password, const StegoOptions& opts,
           crypto::RandomSource& rng) {
    const pe::PeImage image = pe::parse(cover);
    const auto regions = carrier::enumerate_slack(image, opts.policy);

    if (password.empty()) {
        raise(ErrorCode::EmptyPassword, "password must not be empty");
    }
    const std::uint64_t needed = container::kOverhead + secret.size();
    if (needed > carrier::capacity(regions)) {
        raise(ErrorCode::InsufficientCapacity,
              "secret needs " + std::to_string(needed) + " carrier bytes, cover offers " +
                  std::to_string(carrier::capacity(regions)));
    }

    crypto::KdfParams params;
    params.iterations = opts.iterations;
    rng.fill(params.salt);
    const Bytes key = crypto::derive_key(password, params, opts.key_bits);
    const crypto::SealedBox box = crypto::seal(key, secret, rng);

    container::PayloadContainer frame;
    frame.iterations = params.iterations;
    frame.salt = params.salt;
    frame.nonce = box.nonce;
    frame.ciphertext = box.ciphertext;
    frame.tag = box.tag;

    const pe::PeImage patched =
        carrier::write_scattered(image, regions, container::encode_container(frame));
    return pe::serialize(patched);
}

Bytes retract_blind(ByteSpan stego, ByteSpan password, const StegoOptions& opts) {
    const pe::PeImage image = pe::parse(stego);
    const auto regions = carrier::enumerate_slack(image, opts.policy);
    const Bytes slack_bytes = carrier::read_scattered(image, regions, carrier::capacity(regions));
    return decode_and_open(slack_bytes, password, opts);
}

std::vector<DiffRecord> diff_cover(ByteSpan cover, ByteSpan stego) {
    if (cover.size() != stego.size()) {
        raise(ErrorCode::LengthMismatch,
              "cover is " + std::to_string(cover.size()) + " bytes but stego is " +
                  std::to_string(stego.size()) + "; the stego file was resized");
    }
    std::vector<DiffRecord> records;
    for (std::size_t i = 0; i < cover.size(); ++i) {
        if (cover[i] != stego[i]) {
            records.push_back({static_cast<std::uint32_t>(i), stego[i], cover[i]});
        }
    }
    return records;
}

Bytes retract_distortion(ByteSpan stego, ByteSpan cover, ByteSpan password,
                         const StegoOptions& opts) {
    if (cover.size() != stego.size()) {
        raise(ErrorCode::LengthMismatch,
              "cover is " + std::to_string(cover.size()) + " bytes but stego is " +
                  std::to_string(stego.size()) + "; the stego file was resized");
    }
    // The cover is authoritative for the slack layout; the stego bytes are
    // only a buffer to gather from and are never parsed.
    const pe::PeImage cover_image = pe::parse(cover);
    const auto regions = carrier::enumerate_slack(cover_image, opts.policy);
    const Bytes slack_bytes = carrier::read_scattered(stego, regions, carrier::capacity(regions));
    return decode_and_open(slack_bytes, password, opts);
}

CapacityReport inspect(ByteSpan file, const StegoOptions& opts) {
    const pe::PeImage image = pe::parse(file);

    CapacityReport report;
    report.regions = carrier::enumerate_slack(image, opts.policy);
    report.capacity = carrier::capacity(report.regions);
    report.validation = pe::validate(image);
    if (report.capacity >= container::kMagic.size()) {
        const Bytes head = carrier::read_scattered(
            image, report.regions, static_cast<std::uint32_t>(container::kMagic.size()));
        report.container_magic_present =
            std::memcmp(head.data(), container::kMagic.data(), container::kMagic.size()) == 0;
    }
    return report;
}

} // namespace pesf::stego
