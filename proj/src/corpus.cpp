#include "pesf/corpus.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>

#include "pesf/crypto.hpp"
#include "pesf/error.hpp"
#include "pesf/pe.hpp"

namespace pesf::corpus {

namespace {

constexpr std::uint32_t kDosSize = 0x40;
constexpr std::uint32_t kOptionalHeaderSize = 0xE0; // PE32 with 16 data directories
constexpr std::uint16_t kMachineI386 = 0x014C;
// EXECUTABLE_IMAGE | 32BIT_MACHINE
constexpr std::uint16_t kImageCharacteristics = 0x0102;
constexpr std::uint32_t kTextCharacteristics = 0x60000020; // code | execute | read
constexpr std::uint32_t kDataCharacteristics = 0xC0000040; // initialized data | read | write

std::uint64_t align_up(std::uint64_t value, std::uint64_t alignment) {
    return (value + alignment - 1) / alignment * alignment;
}

void check_spec(const PeSpec& spec) {
    auto fail = [](const std::string& why) { raise(ErrorCode::InvalidSpec, why); };

    if (spec.file_alignment == 0 || !std::has_single_bit(spec.file_alignment)) {
        fail("file_alignment must be a power of two");
    }
    if (spec.section_alignment == 0 || !std::has_single_bit(spec.section_alignment)) {
        fail("section_alignment must be a power of two");
    }
    if (spec.section_alignment < spec.file_alignment) {
        fail("section_alignment must be at least file_alignment");
    }
    if (spec.sections.size() > 0xFFFF) {
        fail("too many sections for a 16-bit section count");
    }
    for (const auto& sec : spec.sections) {
        if (sec.name.size() > 8) {
            fail("section name '" + sec.name + "' exceeds 8 bytes");
        }
        if (sec.raw_size % spec.file_alignment != 0) {
            fail("section " + sec.name + " raw_size is not a multiple of file_alignment");
        }
    }
}

} // namespace

Bytes synthesize_pe(const PeSpec& spec) {
    check_spec(spec);

    const std::uint32_t n = static_cast<std::uint32_t>(spec.sections.size());
    const std::uint64_t table_off = kDosSize + 4 + pe::kCoffHeaderSize + kOptionalHeaderSize;
    const std::uint64_t table_end = table_off + std::uint64_t{n} * pe::kSectionHeaderSize;
    const std::uint64_t size_of_headers = align_up(table_end, spec.file_alignment);

    // Lay sections out contiguously: raw blocks back to back after the
    // headers, virtual blocks page by page after the headers' first page.
    struct Placement {
        std::uint32_t virtual_address = 0;
        std::uint32_t pointer_to_raw_data = 0;
    };
    std::vector<Placement> placed(spec.sections.size());

    std::uint64_t raw_cursor = size_of_headers;
    std::uint64_t va_cursor = align_up(size_of_headers, spec.section_alignment);
    for (std::size_t i = 0; i < spec.sections.size(); ++i) {
        const auto& sec = spec.sections[i];
        placed[i].virtual_address = static_cast<std::uint32_t>(va_cursor);
        const std::uint64_t extent =
            sec.virtual_size == 0 ? sec.raw_size : std::uint64_t{sec.virtual_size};
        va_cursor += align_up(std::max<std::uint64_t>(extent, 1), spec.section_alignment);
        if (sec.raw_size > 0) {
            placed[i].pointer_to_raw_data = static_cast<std::uint32_t>(raw_cursor);
            raw_cursor += sec.raw_size;
        }
    }
    const std::uint64_t total_size = raw_cursor;
    const std::uint64_t size_of_image = va_cursor;
    if (total_size > 0xFFFFFFFFull || size_of_image > 0xFFFFFFFFull) {
        raise(ErrorCode::InvalidSpec, "sections exceed the 32-bit file/image size range");
    }

    Bytes out(total_size, 0);
    crypto::DeterministicRandom slack(spec.seed);

    // DOS header: magic plus the pointer to the PE signature right behind it.
    out[0] = 'M';
    out[1] = 'Z';
    put_u32_le(out.data() + 0x3C, kDosSize);

    std::memcpy(out.data() + kDosSize, pe::kPeSignature.data(), 4);

    const std::uint64_t coff = kDosSize + 4;
    put_u16_le(out.data() + coff + 0, kMachineI386);
    put_u16_le(out.data() + coff + 2, static_cast<std::uint16_t>(n));
    put_u16_le(out.data() + coff + 16, kOptionalHeaderSize);
    put_u16_le(out.data() + coff + 18, kImageCharacteristics);

    const std::uint64_t opt = coff + pe::kCoffHeaderSize;
    const std::uint32_t entry_rva = n > 0 ? placed[0].virtual_address : 0;
    put_u16_le(out.data() + opt + 0, pe::kOptionalMagicPe32);
    out[opt + 2] = 14; // linker version, cosmetic
    put_u32_le(out.data() + opt + 16, entry_rva); // address_of_entry_point
    put_u32_le(out.data() + opt + 20, entry_rva); // base_of_code
    put_u32_le(out.data() + opt + 28, spec.image_base);
    put_u32_le(out.data() + opt + 32, spec.section_alignment);
    put_u32_le(out.data() + opt + 36, spec.file_alignment);
    put_u16_le(out.data() + opt + 40, 6);  // major OS version
    put_u16_le(out.data() + opt + 48, 6);  // major subsystem version
    put_u32_le(out.data() + opt + 56, static_cast<std::uint32_t>(size_of_image));
    put_u32_le(out.data() + opt + 60, static_cast<std::uint32_t>(size_of_headers));
    put_u32_le(out.data() + opt + 64, 0); // checksum: optional, unset
    put_u16_le(out.data() + opt + 68, 3); // subsystem: console
    put_u32_le(out.data() + opt + 72, 0x100000); // stack reserve
    put_u32_le(out.data() + opt + 76, 0x1000);   // stack commit
    put_u32_le(out.data() + opt + 80, 0x100000); // heap reserve
    put_u32_le(out.data() + opt + 84, 0x1000);   // heap commit
    put_u32_le(out.data() + opt + 92, 16);       // number_of_rva_and_sizes

    for (std::size_t i = 0; i < spec.sections.size(); ++i) {
        const auto& sec = spec.sections[i];
        const std::uint64_t off = table_off + i * pe::kSectionHeaderSize;
        std::memcpy(out.data() + off, sec.name.data(), sec.name.size());
        put_u32_le(out.data() + off + 8, sec.virtual_size);
        put_u32_le(out.data() + off + 12, placed[i].virtual_address);
        put_u32_le(out.data() + off + 16, sec.raw_size);
        put_u32_le(out.data() + off + 20, placed[i].pointer_to_raw_data);
        put_u32_le(out.data() + off + 36,
                   sec.name == ".text" ? kTextCharacteristics : kDataCharacteristics);
    }

    // Padding is pseudo-random, never zero-filled: consumers must not get
    // away with assuming zeroed slack.
    slack.fill(std::span(out.data() + table_end, size_of_headers - table_end));
    for (std::size_t i = 0; i < spec.sections.size(); ++i) {
        const auto& sec = spec.sections[i];
        if (sec.raw_size == 0) continue;
        const std::uint32_t meaningful =
            sec.virtual_size == 0 ? sec.raw_size : std::min(sec.virtual_size, sec.raw_size);
        std::uint8_t* base = out.data() + placed[i].pointer_to_raw_data;
        std::memset(base, sec.fill, meaningful);
        slack.fill(std::span(base + meaningful, sec.raw_size - meaningful));
    }

    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::uint64_t parse_number(std::string_view text, const char* what) {
    text = trim(text);
    int base = 10;
    if (text.starts_with("0x") || text.starts_with("0X")) {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        raise(ErrorCode::InvalidSpec, std::string(what) + " is not a valid number");
    }
    return value;
}

std::uint32_t parse_u32(std::string_view text, const char* what) {
    const std::uint64_t value = parse_number(text, what);
    if (value > 0xFFFFFFFFull) {
        raise(ErrorCode::InvalidSpec, std::string(what) + " exceeds 32 bits");
    }
    return static_cast<std::uint32_t>(value);
}

SectionSpec parse_section_line(std::string_view value) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto comma = value.find(',');
        parts.push_back(trim(value.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        value.remove_prefix(comma + 1);
    }
    if (parts.size() != 4) {
        raise(ErrorCode::InvalidSpec, "sections entry needs name,virtual_size,raw_size,fill");
    }
    SectionSpec sec;
    sec.name = std::string(parts[0]);
    sec.virtual_size = parse_u32(parts[1], "virtual_size");
    sec.raw_size = parse_u32(parts[2], "raw_size");
    const std::uint64_t fill = parse_number(parts[3], "fill");
    if (fill > 0xFF) {
        raise(ErrorCode::InvalidSpec, "fill byte exceeds 8 bits");
    }
    sec.fill = static_cast<std::uint8_t>(fill);
    return sec;
}

} // namespace

PeSpec parse_pe_spec(std::string_view text) {
    PeSpec spec;
    while (!text.empty()) {
        const auto newline = text.find('\n');
        std::string_view line = trim(text.substr(0, newline));
        text.remove_prefix(newline == std::string_view::npos ? text.size() : newline + 1);

        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            raise(ErrorCode::InvalidSpec, "expected 'key = value': " + std::string(line));
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));

        if (key == "file_alignment") {
            spec.file_alignment = parse_u32(value, "file_alignment");
        } else if (key == "section_alignment") {
            spec.section_alignment = parse_u32(value, "section_alignment");
        } else if (key == "image_base") {
            spec.image_base = parse_u32(value, "image_base");
        } else if (key == "seed") {
            spec.seed = parse_number(value, "seed");
        } else if (key == "sections") {
            spec.sections.push_back(parse_section_line(value));
        } else {
            raise(ErrorCode::InvalidSpec, "unknown key: " + std::string(key));
        }
    }
    return spec;
}

} // namespace pesf::corpus
