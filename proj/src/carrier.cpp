#include "pesf/carrier.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "pesf/error.hpp"

namespace pesf::carrier {

namespace {

struct Interval {
    std::uint64_t begin = 0;
    std::uint64_t end = 0; // half-open
    bool empty() const { return begin >= end; }
};

// candidate minus all blocked intervals, preserving order.
std::vector<Interval> subtract(Interval candidate, const std::vector<Interval>& blocked) {
    std::vector<Interval> pieces{candidate};
    for (const auto& b : blocked) {
        std::vector<Interval> next;
        for (const auto& p : pieces) {
            if (b.end <= p.begin || b.begin >= p.end) {
                next.push_back(p);
                continue;
            }
            if (b.begin > p.begin) next.push_back({p.begin, b.begin});
            if (b.end < p.end) next.push_back({b.end, p.end});
        }
        pieces = std::move(next);
    }
    std::erase_if(pieces, [](const Interval& p) { return p.empty(); });
    return pieces;
}

// Section names are 8 NUL-padded bytes; compare against a policy string of
// up to 8 characters.
bool name_matches(const std::array<std::uint8_t, 8>& name, const std::string& wanted) {
    if (wanted.size() > 8) return false;
    std::array<std::uint8_t, 8> padded{};
    std::memcpy(padded.data(), wanted.data(), wanted.size());
    return padded == name;
}

} // namespace

const char* to_string(SlackKind kind) {
    switch (kind) {
    case SlackKind::SectionTail: return "section_tail";
    case SlackKind::InterSectionGap: return "inter_section_gap";
    case SlackKind::HeaderGap: return "header_gap";
    }
    return "unknown";
}

std::vector<SlackRegion> enumerate_slack(const pe::PeImage& image, const CarrierPolicy& policy) {
    const std::uint64_t file_size = image.raw.size();
    const std::uint64_t table_end = image.section_table_end();

    // Bytes that must never be written: structural headers plus every
    // section's meaningful range.
    std::vector<Interval> blocked;
    blocked.push_back({0, std::min(table_end, file_size)});
    for (const auto& sec : image.sections) {
        if (sec.size_of_raw_data == 0) continue;
        blocked.push_back({sec.pointer_to_raw_data,
                           std::uint64_t{sec.pointer_to_raw_data} + sec.effective_size()});
    }

    struct Candidate {
        Interval span;
        SlackKind kind;
        std::optional<std::size_t> section_index;
    };
    std::vector<Candidate> candidates;

    for (std::size_t i = 0; i < image.sections.size(); ++i) {
        const auto& sec = image.sections[i];
        if (sec.size_of_raw_data == 0 || sec.effective_size() >= sec.size_of_raw_data) continue;
        candidates.push_back({{std::uint64_t{sec.pointer_to_raw_data} + sec.effective_size(),
                               std::uint64_t{sec.pointer_to_raw_data} + sec.size_of_raw_data},
                              SlackKind::SectionTail,
                              i});
    }

    if (policy.include_gaps) {
        std::vector<const pe::SectionHeader*> by_offset;
        for (const auto& sec : image.sections) {
            if (sec.size_of_raw_data > 0) by_offset.push_back(&sec);
        }
        std::sort(by_offset.begin(), by_offset.end(), [](const auto* a, const auto* b) {
            return a->pointer_to_raw_data < b->pointer_to_raw_data;
        });
        for (std::size_t i = 1; i < by_offset.size(); ++i) {
            const std::uint64_t prev_end = std::uint64_t{by_offset[i - 1]->pointer_to_raw_data} +
                                           by_offset[i - 1]->size_of_raw_data;
            const std::uint64_t next_begin = by_offset[i]->pointer_to_raw_data;
            if (prev_end < next_begin) {
                candidates.push_back(
                    {{prev_end, next_begin}, SlackKind::InterSectionGap, std::nullopt});
            }
        }
    }

    if (policy.include_header_gap && table_end < image.optional.size_of_headers) {
        Interval gap{table_end, std::min<std::uint64_t>(image.optional.size_of_headers, file_size)};
        // A section stored inside the declared header area keeps both its
        // data and its tail; carve out the whole raw block.
        std::vector<Interval> raw_blocks;
        for (const auto& sec : image.sections) {
            if (sec.size_of_raw_data == 0) continue;
            raw_blocks.push_back({sec.pointer_to_raw_data,
                                  std::uint64_t{sec.pointer_to_raw_data} + sec.size_of_raw_data});
        }
        for (const auto& piece : subtract(gap, raw_blocks)) {
            candidates.push_back({piece, SlackKind::HeaderGap, std::nullopt});
        }
    }

    std::vector<SlackRegion> regions;
    for (const auto& cand : candidates) {
        Interval clamped{cand.span.begin, std::min(cand.span.end, file_size)};
        if (clamped.empty()) continue;
        for (const auto& piece : subtract(clamped, blocked)) {
            regions.push_back({static_cast<std::uint32_t>(piece.begin),
                               static_cast<std::uint32_t>(piece.end - piece.begin), cand.kind,
                               cand.section_index});
        }
    }

    // Preferred-section tails lead; everything else follows by offset. The
    // order is part of the wire contract, blind extraction replays it.
    auto preferred = [&](const SlackRegion& r) {
        return policy.prefer_section && r.section_index &&
               name_matches(image.sections[*r.section_index].name, *policy.prefer_section);
    };
    std::stable_sort(regions.begin(), regions.end(),
                     [&](const SlackRegion& a, const SlackRegion& b) {
                         const bool pa = preferred(a), pb = preferred(b);
                         if (pa != pb) return pa;
                         return a.offset < b.offset;
                     });
    return regions;
}

std::uint32_t capacity(std::span<const SlackRegion> regions) {
    std::uint64_t total = 0;
    for (const auto& r : regions) total += r.length;
    return static_cast<std::uint32_t>(total);
}

pe::PeImage write_scattered(const pe::PeImage& image, std::span<const SlackRegion> regions,
                            ByteSpan data) {
    if (data.size() > capacity(regions)) {
        raise(ErrorCode::InsufficientCapacity,
              "payload of " + std::to_string(data.size()) + " bytes exceeds carrier capacity of " +
                  std::to_string(capacity(regions)));
    }
    pe::PeImage out = image;
    std::size_t cursor = 0;
    for (const auto& r : regions) {
        if (cursor == data.size()) break;
        if (std::uint64_t{r.offset} + r.length > out.raw.size()) {
            throw std::out_of_range("slack region exceeds image buffer");
        }
        const std::size_t n = std::min<std::size_t>(r.length, data.size() - cursor);
        std::memcpy(out.raw.data() + r.offset, data.data() + cursor, n);
        cursor += n;
    }
    return out;
}

Bytes read_scattered(ByteSpan raw, std::span<const SlackRegion> regions, std::uint32_t length) {
    if (length > capacity(regions)) {
        raise(ErrorCode::InsufficientCapacity,
              "read of " + std::to_string(length) + " bytes exceeds carrier capacity of " +
                  std::to_string(capacity(regions)));
    }
    Bytes out;
    out.reserve(length);
    for (const auto& r : regions) {
        if (out.size() == length) break;
        if (std::uint64_t{r.offset} + r.length > raw.size()) {
            throw std::out_of_range("slack region exceeds buffer");
        }
        const std::size_t n = std::min<std::size_t>(r.length, length - out.size());
        out.insert(out.end(), raw.begin() + r.offset, raw.begin() + r.offset + n);
    }
    return out;
}

Bytes read_scattered(const pe::PeImage& image, std::span<const SlackRegion> regions,
                     std::uint32_t length) {
    return read_scattered(ByteSpan(image.raw), regions, length);
}

} // namespace pesf::carrier
