#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pesf/bytes.hpp"

// Deterministic generator of minimal, structurally valid 32-bit PE files.
// Generated files parse cleanly and validate empty; they are fixtures, not
// runnable programs.
namespace pesf::corpus {

struct SectionSpec {
    std::string name;
    std::uint32_t virtual_size = 0;
    std::uint32_t raw_size = 0;
    std::uint8_t fill = 0;
};

struct PeSpec {
    std::uint32_t file_alignment = 0x200;
    std::uint32_t section_alignment = 0x1000;
    std::uint32_t image_base = 0x400000;
    std::vector<SectionSpec> sections;
    std::uint64_t seed = 0;
};

// Build the file. Section contents are the per-section fill byte; slack
// padding is seeded pseudo-random so nothing downstream can rely on zeroed
// slack. Byte-identical for identical spec + seed. Throws InvalidSpec.
Bytes synthesize_pe(const PeSpec& spec);

// Fixture format: `key = value` lines, `#` comments, blank lines ignored.
// Keys mirror the PeSpec field names; each `sections` line appends one
// entry as `name,virtual_size,raw_size,fill`. Numbers take decimal or 0x hex.
PeSpec parse_pe_spec(std::string_view text);

} // namespace pesf::corpus
