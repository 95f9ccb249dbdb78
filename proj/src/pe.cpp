#include "pesf/pe.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "pesf/error.hpp"

namespace pesf::pe {

namespace {

// Bounds-checked view over the input. Every read is validated before the
// buffer is touched, so corrupted input can only produce Truncated, never an
// out-of-bounds access. Offsets are widened to 64 bits first; u32 header
// fields cannot overflow the checks.
struct Reader {
    ByteSpan data;

    void require(std::uint64_t offset, std::uint64_t size, const char* what) const {
        if (offset + size > data.size()) {
            raise(ErrorCode::Truncated, std::string(what) + " exceeds buffer");
        }
    }

    std::uint16_t u16(std::uint64_t offset, const char* what) const {
        require(offset, 2, what);
        return get_u16_le(data.data() + offset);
    }

    std::uint32_t u32(std::uint64_t offset, const char* what) const {
        require(offset, 4, what);
        return get_u32_le(data.data() + offset);
    }
};

bool is_pow2(std::uint32_t v) {
    return v != 0 && std::has_single_bit(v);
}

} // namespace

const char* to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::BadDosMagic: return "BadDosMagic";
    case ViolationKind::BadPeSignature: return "BadPeSignature";
    case ViolationKind::SectionCountMismatch: return "SectionCountMismatch";
    case ViolationKind::BadAlignmentValues: return "BadAlignmentValues";
    case ViolationKind::MisalignedSection: return "MisalignedSection";
    case ViolationKind::SectionOutOfBounds: return "SectionOutOfBounds";
    case ViolationKind::OverlappingSections: return "OverlappingSections";
    }
    return "Unknown";
}

std::string SectionHeader::name_string() const {
    std::size_t len = name.size();
    while (len > 0 && name[len - 1] == 0) --len;
    return std::string(reinterpret_cast<const char*>(name.data()), len);
}

PeImage parse(ByteSpan bytes) {
    Reader in{bytes};

    if (bytes.size() < 2) {
        raise(ErrorCode::Truncated, "DOS header exceeds buffer");
    }
    PeImage image;
    image.dos.e_magic = get_u16_le(bytes.data());
    if (image.dos.e_magic != kDosMagic) {
        raise(ErrorCode::NotMz, "missing MZ magic");
    }
    image.dos.e_lfanew = in.u32(0x3C, "DOS header");

    const std::uint64_t sig_off = image.dos.e_lfanew;
    in.require(sig_off, 4, "PE signature");
    std::memcpy(image.pe_signature.data(), bytes.data() + sig_off, 4);
    if (image.pe_signature != kPeSignature) {
        raise(ErrorCode::NotPe, "missing PE signature");
    }

    const std::uint64_t coff_off = sig_off + 4;
    image.coff.machine = in.u16(coff_off + 0, "COFF header");
    image.coff.number_of_sections = in.u16(coff_off + 2, "COFF header");
    image.coff.size_of_optional_header = in.u16(coff_off + 16, "COFF header");
    image.coff.characteristics = in.u16(coff_off + 18, "COFF header");

    const std::uint64_t opt_off = coff_off + kCoffHeaderSize;
    if (image.coff.size_of_optional_header < kMinOptionalHeaderSize) {
        raise(ErrorCode::Truncated, "optional header too small for PE32 fields");
    }
    in.require(opt_off, image.coff.size_of_optional_header, "optional header");

    image.optional.magic = in.u16(opt_off + 0, "optional header");
    if (image.optional.magic == kOptionalMagicPe32Plus) {
        raise(ErrorCode::UnsupportedPe32Plus, "PE32+ image");
    }
    if (image.optional.magic != kOptionalMagicPe32) {
        raise(ErrorCode::NotPe, "unrecognized optional header magic");
    }
    image.optional.image_base = in.u32(opt_off + 28, "optional header");
    image.optional.section_alignment = in.u32(opt_off + 32, "optional header");
    image.optional.file_alignment = in.u32(opt_off + 36, "optional header");
    image.optional.size_of_image = in.u32(opt_off + 56, "optional header");
    image.optional.size_of_headers = in.u32(opt_off + 60, "optional header");
    image.optional.checksum = in.u32(opt_off + 64, "optional header");

    if (!is_pow2(image.optional.file_alignment) || !is_pow2(image.optional.section_alignment) ||
        image.optional.section_alignment < image.optional.file_alignment) {
        raise(ErrorCode::MalformedSectionTable, "alignment values are not valid powers of two");
    }
    if (image.optional.size_of_headers > bytes.size()) {
        raise(ErrorCode::Truncated, "declared header size exceeds buffer");
    }

    const std::uint64_t table_off = opt_off + image.coff.size_of_optional_header;
    const std::uint64_t table_size =
        std::uint64_t{image.coff.number_of_sections} * kSectionHeaderSize;
    in.require(table_off, table_size, "section table");

    image.sections.reserve(image.coff.number_of_sections);
    for (std::uint32_t i = 0; i < image.coff.number_of_sections; ++i) {
        const std::uint64_t off = table_off + std::uint64_t{i} * kSectionHeaderSize;
        SectionHeader sec;
        std::memcpy(sec.name.data(), bytes.data() + off, 8);
        sec.virtual_size = get_u32_le(bytes.data() + off + 8);
        sec.virtual_address = get_u32_le(bytes.data() + off + 12);
        sec.size_of_raw_data = get_u32_le(bytes.data() + off + 16);
        sec.pointer_to_raw_data = get_u32_le(bytes.data() + off + 20);
        sec.characteristics = get_u32_le(bytes.data() + off + 36);

        if (std::uint64_t{sec.pointer_to_raw_data} + sec.size_of_raw_data > bytes.size()) {
            raise(ErrorCode::MalformedSectionTable,
                  "section " + sec.name_string() + " raw data out of bounds");
        }
        if (sec.pointer_to_raw_data % image.optional.file_alignment != 0) {
            raise(ErrorCode::MalformedSectionTable,
                  "section " + sec.name_string() + " raw data misaligned");
        }
        image.sections.push_back(std::move(sec));
    }

    // No two raw blocks may share file bytes; zero-size blocks are fine.
    std::vector<const SectionHeader*> by_offset;
    for (const auto& sec : image.sections) {
        if (sec.size_of_raw_data > 0) by_offset.push_back(&sec);
    }
    std::sort(by_offset.begin(), by_offset.end(), [](const auto* a, const auto* b) {
        return a->pointer_to_raw_data < b->pointer_to_raw_data;
    });
    for (std::size_t i = 1; i < by_offset.size(); ++i) {
        const auto* prev = by_offset[i - 1];
        const auto* cur = by_offset[i];
        if (std::uint64_t{prev->pointer_to_raw_data} + prev->size_of_raw_data >
            cur->pointer_to_raw_data) {
            raise(ErrorCode::MalformedSectionTable,
                  "sections " + prev->name_string() + " and " + cur->name_string() +
                      " overlap in file space");
        }
    }

    image.raw.assign(bytes.begin(), bytes.end());
    return image;
}

Bytes serialize(const PeImage& image) {
    // The model is a view over the raw buffer and mutations happen in the
    // buffer itself, so serialization is the buffer.
    return image.raw;
}

std::uint32_t rva_to_offset(const PeImage& image, std::uint32_t rva) {
    if (rva < image.optional.size_of_headers) {
        return rva;
    }
    for (const auto& sec : image.sections) {
        const std::uint64_t extent = sec.virtual_extent();
        if (rva >= sec.virtual_address && std::uint64_t{rva} < sec.virtual_address + extent) {
            const std::uint32_t delta = rva - sec.virtual_address;
            if (delta < sec.size_of_raw_data) {
                return sec.pointer_to_raw_data + delta;
            }
            raise(ErrorCode::RvaNotMapped, "RVA has no file backing (virtual-only bytes)");
        }
    }
    raise(ErrorCode::RvaNotMapped, "RVA outside headers and every section");
}

std::uint32_t offset_to_rva(const PeImage& image, std::uint32_t offset) {
    if (offset < image.optional.size_of_headers) {
        return offset;
    }
    for (const auto& sec : image.sections) {
        if (sec.size_of_raw_data == 0) continue;
        if (offset >= sec.pointer_to_raw_data &&
            std::uint64_t{offset} < std::uint64_t{sec.pointer_to_raw_data} + sec.size_of_raw_data) {
            return sec.virtual_address + (offset - sec.pointer_to_raw_data);
        }
    }
    raise(ErrorCode::OffsetNotMapped, "offset outside headers and every section's raw range");
}

ValidationReport validate(const PeImage& image) {
    ValidationReport report;
    auto add = [&report](ViolationKind kind, std::string message) {
        report.violations.push_back({kind, std::move(message)});
    };

    if (image.dos.e_magic != kDosMagic) {
        add(ViolationKind::BadDosMagic, "e_magic is not MZ");
    }
    if (image.pe_signature != kPeSignature) {
        add(ViolationKind::BadPeSignature, "signature is not PE\\0\\0");
    }
    if (image.sections.size() != image.coff.number_of_sections) {
        add(ViolationKind::SectionCountMismatch,
            "section list does not match number_of_sections");
    }

    const bool alignments_ok = is_pow2(image.optional.file_alignment) &&
                               is_pow2(image.optional.section_alignment) &&
                               image.optional.section_alignment >= image.optional.file_alignment;
    if (!alignments_ok) {
        add(ViolationKind::BadAlignmentValues,
            "file/section alignment must be powers of two with section >= file");
    }

    for (const auto& sec : image.sections) {
        if (alignments_ok && sec.pointer_to_raw_data % image.optional.file_alignment != 0) {
            add(ViolationKind::MisalignedSection,
                "section " + sec.name_string() + " starts off the file alignment");
        }
        if (std::uint64_t{sec.pointer_to_raw_data} + sec.size_of_raw_data > image.raw.size()) {
            add(ViolationKind::SectionOutOfBounds,
                "section " + sec.name_string() + " raw data runs past end of file");
        }
    }

    std::vector<const SectionHeader*> by_offset;
    for (const auto& sec : image.sections) {
        if (sec.size_of_raw_data > 0) by_offset.push_back(&sec);
    }
    std::sort(by_offset.begin(), by_offset.end(), [](const auto* a, const auto* b) {
        return a->pointer_to_raw_data < b->pointer_to_raw_data;
    });
    for (std::size_t i = 1; i < by_offset.size(); ++i) {
        const auto* prev = by_offset[i - 1];
        const auto* cur = by_offset[i];
        if (std::uint64_t{prev->pointer_to_raw_data} + prev->size_of_raw_data >
            cur->pointer_to_raw_data) {
            add(ViolationKind::OverlappingSections,
                "sections " + prev->name_string() + " and " + cur->name_string() + " overlap");
        }
    }

    return report;
}

} // namespace pesf::pe
