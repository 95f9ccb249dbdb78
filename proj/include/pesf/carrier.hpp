#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pesf/bytes.hpp"
#include "pesf/pe.hpp"

// Discovery and scattered I/O over the embeddable padding of a PE image:
// section tails below the file-alignment boundary, unowned gaps between
// raw blocks, and the gap between the section table and size_of_headers.
// Writing there never changes the file size.
namespace pesf::carrier {

enum class SlackKind {
    SectionTail,
    InterSectionGap,
    HeaderGap,
};

const char* to_string(SlackKind kind);

struct SlackRegion {
    std::uint32_t offset = 0;
    std::uint32_t length = 0;
    SlackKind kind = SlackKind::SectionTail;
    std::optional<std::size_t> section_index; // set for SectionTail
};

struct CarrierPolicy {
    std::optional<std::string> prefer_section = ".rsrc";
    bool include_header_gap = true;
    bool include_gaps = true;
};

// All writable slack under the policy. Regions are disjoint, nonempty, and
// ordered: tails of the preferred section first (ascending), then the rest
// ascending by offset. The order is deterministic so extraction can replay it.
std::vector<SlackRegion> enumerate_slack(const pe::PeImage& image, const CarrierPolicy& policy);

// Total embeddable bytes.
std::uint32_t capacity(std::span<const SlackRegion> regions);

// Copy of image with `data` laid into the regions in list order, each region
// filled left to right. Throws InsufficientCapacity if data does not fit.
pe::PeImage write_scattered(const pe::PeImage& image, std::span<const SlackRegion> regions,
                            ByteSpan data);

// Inverse gather: the first `length` slack bytes in the same region order.
Bytes read_scattered(const pe::PeImage& image, std::span<const SlackRegion> regions,
                     std::uint32_t length);

// Core gather over a raw buffer. The distortion retract path reads a stego
// buffer through regions computed from the original cover, without parsing
// the stego bytes at all.
Bytes read_scattered(ByteSpan raw, std::span<const SlackRegion> regions, std::uint32_t length);

} // namespace pesf::carrier
