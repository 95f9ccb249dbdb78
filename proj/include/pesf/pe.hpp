#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pesf/bytes.hpp"

// 32-bit Portable Executable model. The parser is lossless: it keeps the
// original byte buffer and indexes into it, so regions it does not model
// (DOS stub, data directories, debug info) survive re-serialization
// untouched. PE32+ images are rejected.
namespace pesf::pe {

constexpr std::uint16_t kDosMagic = 0x5A4D;            // "MZ"
constexpr std::array<std::uint8_t, 4> kPeSignature{'P', 'E', 0, 0};
constexpr std::uint16_t kOptionalMagicPe32 = 0x010B;
constexpr std::uint16_t kOptionalMagicPe32Plus = 0x020B;
constexpr std::uint32_t kCoffHeaderSize = 20;
constexpr std::uint32_t kSectionHeaderSize = 40;
// Modeled optional-header fields end at the checksum (offset 64 + 4).
constexpr std::uint32_t kMinOptionalHeaderSize = 68;

struct DosHeader {
    std::uint16_t e_magic = 0;
    std::uint32_t e_lfanew = 0;
};

struct CoffHeader {
    std::uint16_t machine = 0;
    std::uint16_t number_of_sections = 0;
    std::uint16_t size_of_optional_header = 0;
    std::uint16_t characteristics = 0;
};

struct OptionalHeader {
    std::uint16_t magic = 0;
    std::uint32_t image_base = 0;
    std::uint32_t section_alignment = 0;
    std::uint32_t file_alignment = 0;
    std::uint32_t size_of_image = 0;
    std::uint32_t size_of_headers = 0;
    std::uint32_t checksum = 0;
};

struct SectionHeader {
    std::array<std::uint8_t, 8> name{};
    std::uint32_t virtual_size = 0;
    std::uint32_t virtual_address = 0;
    std::uint32_t size_of_raw_data = 0;
    std::uint32_t pointer_to_raw_data = 0;
    std::uint32_t characteristics = 0;

    // Meaningful bytes inside the raw block. Some linkers emit
    // virtual_size == 0; fall back to the raw size then.
    std::uint32_t effective_size() const {
        if (virtual_size == 0) return size_of_raw_data;
        return virtual_size < size_of_raw_data ? virtual_size : size_of_raw_data;
    }

    // Virtual extent used for RVA containment.
    std::uint32_t virtual_extent() const {
        const std::uint32_t vs = virtual_size == 0 ? size_of_raw_data : virtual_size;
        return vs > size_of_raw_data ? vs : size_of_raw_data;
    }

    // Name with trailing NULs stripped.
    std::string name_string() const;
};

struct PeImage {
    DosHeader dos;
    std::array<std::uint8_t, 4> pe_signature{};
    CoffHeader coff;
    OptionalHeader optional;
    std::vector<SectionHeader> sections;
    Bytes raw;

    // File offset of the first section-table entry.
    std::uint32_t section_table_offset() const {
        return dos.e_lfanew + 4 + kCoffHeaderSize + coff.size_of_optional_header;
    }

    // End of the structural headers: one past the last section-table byte.
    std::uint32_t section_table_end() const {
        return section_table_offset() +
               kSectionHeaderSize * static_cast<std::uint32_t>(sections.size());
    }
};

enum class ViolationKind {
    BadDosMagic,
    BadPeSignature,
    SectionCountMismatch,
    BadAlignmentValues,
    MisalignedSection,
    SectionOutOfBounds,
    OverlappingSections,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

// Parse a 32-bit PE image. The returned image's `raw` field is the input
// verbatim. Throws Error with one of: NotMz, NotPe, Truncated,
// UnsupportedPe32Plus, MalformedSectionTable.
PeImage parse(ByteSpan bytes);

// Exact inverse of parse: emits the image's bytes. serialize(parse(b)) == b.
Bytes serialize(const PeImage& image);

// Map an RVA to the file offset backing it. Header range maps identically;
// section ranges map through pointer_to_raw_data. Throws RvaNotMapped for
// addresses without file backing.
std::uint32_t rva_to_offset(const PeImage& image, std::uint32_t rva);

// Inverse of rva_to_offset on its mapped domain. Throws OffsetNotMapped.
std::uint32_t offset_to_rva(const PeImage& image, std::uint32_t offset);

// Re-check every modeled invariant of an in-memory image. Pure; violations
// come back as report entries, never exceptions.
ValidationReport validate(const PeImage& image);

} // namespace pesf::pe
