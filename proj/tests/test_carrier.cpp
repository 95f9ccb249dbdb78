#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pesf/carrier.hpp"
#include "pesf/corpus.hpp"
#include "pesf/error.hpp"
#include "pesf/pe.hpp"
#include "test_support.hpp"

using namespace pesf;
using test_support::basic_spec;

namespace {

carrier::CarrierPolicy tails_only() {
    carrier::CarrierPolicy policy;
    policy.include_header_gap = false;
    policy.include_gaps = false;
    return policy;
}

} // namespace

TEST_CASE("a 0x300-in-0x400 section leaves one 0x100 tail") {
    const Bytes file = corpus::synthesize_pe(basic_spec());
    const pe::PeImage image = pe::parse(file);

    const auto regions = carrier::enumerate_slack(image, tails_only());
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].kind == carrier::SlackKind::SectionTail);
    CHECK(regions[0].length == 0x100);
    CHECK(regions[0].offset == image.sections[0].pointer_to_raw_data + 0x300);
    CHECK(regions[0].section_index == 0);

    SUBCASE("the default policy adds the header gap") {
        const auto all = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
        REQUIRE(all.size() == 2);
        CHECK(all[0].kind == carrier::SlackKind::HeaderGap);
        CHECK(all[0].offset == image.section_table_end());
        CHECK(all[0].length == image.optional.size_of_headers - image.section_table_end());
        CHECK(all[1].kind == carrier::SlackKind::SectionTail);
    }
}

TEST_CASE("a file with no padding anywhere yields no regions") {
    // Five 40-byte entries end the section table exactly at the 0x200
    // header boundary, and every section is fully meaningful.
    corpus::PeSpec spec;
    for (int i = 0; i < 5; ++i) {
        spec.sections.push_back({".s" + std::to_string(i), 0x200, 0x200,
                                 static_cast<std::uint8_t>(0x10 + i)});
    }
    const Bytes file = corpus::synthesize_pe(spec);
    const pe::PeImage image = pe::parse(file);
    REQUIRE(image.section_table_end() == image.optional.size_of_headers);

    const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
    CHECK(regions.empty());
    CHECK(carrier::capacity(regions) == 0);
}

TEST_CASE("a hole between raw blocks becomes one InterSectionGap") {
    const Bytes file = test_support::file_with_intersection_gap();
    const pe::PeImage image = pe::parse(file);

    carrier::CarrierPolicy policy;
    policy.include_header_gap = false;
    const auto regions = carrier::enumerate_slack(image, policy);

    REQUIRE(regions.size() == 1); // both sections are fully meaningful
    CHECK(regions[0].kind == carrier::SlackKind::InterSectionGap);
    CHECK(regions[0].length == 0x200);
    CHECK(regions[0].offset ==
          image.sections[0].pointer_to_raw_data + image.sections[0].size_of_raw_data);

    SUBCASE("the per-offset oracle agrees byte for byte") {
        const auto full = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
        const auto map = test_support::slack_map(image);
        const auto offsets = test_support::region_offsets(full);
        for (std::uint32_t o = 0; o < image.raw.size(); ++o) {
            CHECK(map[o] == offsets.contains(o));
        }
    }
}

TEST_CASE("capacity is the sum of region lengths") {
    CHECK(carrier::capacity({}) == 0);

    const std::vector<carrier::SlackRegion> two = {
        {0x1000, 0x100, carrier::SlackKind::SectionTail, 0},
        {0x2000, 0x200, carrier::SlackKind::HeaderGap, std::nullopt},
    };
    CHECK(carrier::capacity(two) == 0x300);
}

TEST_CASE("capacity matches an independent per-offset scan") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Bytes file = corpus::synthesize_pe(test_support::random_spec(gen));
        const pe::PeImage image = pe::parse(file);
        const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});

        const auto map = test_support::slack_map(image);
        const auto offsets = test_support::region_offsets(regions);
        std::size_t map_count = 0;
        for (std::uint32_t o = 0; o < map.size(); ++o) {
            if (map[o]) ++map_count;
            REQUIRE(map[o] == offsets.contains(o));
        }
        CHECK(carrier::capacity(regions) == map_count);
    }
}

TEST_CASE("regions are nonempty, in bounds, disjoint, and deterministically ordered") {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 20; ++trial) {
        const Bytes file = corpus::synthesize_pe(test_support::random_spec(gen));
        const pe::PeImage image = pe::parse(file);
        const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});

        std::set<std::uint32_t> seen;
        for (const auto& r : regions) {
            REQUIRE(r.length > 0);
            REQUIRE(std::uint64_t{r.offset} + r.length <= image.raw.size());
            for (std::uint32_t i = 0; i < r.length; ++i) {
                REQUIRE(!seen.contains(r.offset + i));
                seen.insert(r.offset + i);
            }
        }

        // Preferred tails lead; each of the two blocks ascends by offset.
        const auto is_preferred = [&](const carrier::SlackRegion& r) {
            return r.section_index && image.sections[*r.section_index].name_string() == ".rsrc";
        };
        bool in_preferred_block = true;
        std::uint32_t last_offset = 0;
        bool first = true;
        for (const auto& r : regions) {
            if (in_preferred_block && !is_preferred(r)) {
                in_preferred_block = false;
                first = true;
            }
            REQUIRE(in_preferred_block == is_preferred(r));
            if (!first) REQUIRE(r.offset > last_offset);
            last_offset = r.offset;
            first = false;
        }
    }
}

TEST_CASE("prefer_section reorders but never changes membership") {
    corpus::PeSpec spec;
    spec.sections.push_back({".text", 0x300, 0x400, 0xCC});
    spec.sections.push_back({".rsrc", 0x100, 0x200, 0xEE});
    spec.seed = 7;
    const pe::PeImage image = pe::parse(corpus::synthesize_pe(spec));

    const auto rsrc_first = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
    carrier::CarrierPolicy none;
    none.prefer_section.reset();
    const auto ascending = carrier::enumerate_slack(image, none);

    REQUIRE(rsrc_first.size() == ascending.size());
    CHECK(test_support::region_offsets(rsrc_first) == test_support::region_offsets(ascending));

    CHECK(rsrc_first[0].kind == carrier::SlackKind::SectionTail);
    REQUIRE(rsrc_first[0].section_index.has_value());
    CHECK(image.sections[*rsrc_first[0].section_index].name_string() == ".rsrc");

    CHECK(ascending[0].offset < ascending[1].offset);
    CHECK(ascending[0].kind == carrier::SlackKind::HeaderGap);
}

TEST_CASE("write_scattered places bytes region by region, left to right") {
    const Bytes file = corpus::synthesize_pe(basic_spec());
    const pe::PeImage image = pe::parse(file);

    SUBCASE("empty data leaves the buffer identical") {
        const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
        const pe::PeImage out = carrier::write_scattered(image, regions, {});
        CHECK(out.raw == image.raw);
    }

    SUBCASE("0x150 bytes across a 0x100 and a 0x200 region") {
        // Hand-picked disjoint regions inside the file; semantics only
        // depend on offsets and lengths.
        const std::uint32_t a = image.sections[0].pointer_to_raw_data + 0x300;
        const std::uint32_t b = image.sections[0].pointer_to_raw_data + 0x100;
        const std::vector<carrier::SlackRegion> regions = {
            {a, 0x100, carrier::SlackKind::SectionTail, 0},
            {b, 0x200, carrier::SlackKind::SectionTail, 0},
        };
        const Bytes data = test_support::random_bytes(0x150, 99);

        const pe::PeImage out = carrier::write_scattered(image, regions, data);
        REQUIRE(out.raw.size() == image.raw.size());
        for (std::uint32_t i = 0; i < 0x100; ++i) {
            REQUIRE(out.raw[a + i] == data[i]);
        }
        for (std::uint32_t i = 0; i < 0x50; ++i) {
            REQUIRE(out.raw[b + i] == data[0x100 + i]);
        }
        // everything outside the written spans is untouched
        for (std::uint32_t o = 0; o < out.raw.size(); ++o) {
            const bool written = (o >= a && o < a + 0x100) || (o >= b && o < b + 0x50);
            if (!written) REQUIRE(out.raw[o] == image.raw[o]);
        }
    }

    SUBCASE("data longer than capacity is InsufficientCapacity") {
        const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
        const Bytes data(carrier::capacity(regions) + 1, 0xAA);
        CHECK_THROWS_WITH_AS(carrier::write_scattered(image, regions, data),
                             doctest::Contains("exceeds carrier capacity"), Error);
    }
}

TEST_CASE("read_scattered inverts write_scattered for random regions and data") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 100; ++trial) {
        const Bytes file = corpus::synthesize_pe(test_support::random_spec(gen));
        const pe::PeImage image = pe::parse(file);
        const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
        const std::uint32_t cap = carrier::capacity(regions);
        if (cap == 0) continue;

        std::uniform_int_distribution<std::uint32_t> len(0, cap);
        const std::uint32_t n = len(gen);
        const Bytes data = test_support::random_bytes(n, gen());

        const pe::PeImage out = carrier::write_scattered(image, regions, data);
        CHECK(out.raw.size() == image.raw.size());
        CHECK(carrier::read_scattered(out, regions, n) == data);
    }
}

TEST_CASE("read_scattered edge cases") {
    const Bytes file = corpus::synthesize_pe(basic_spec());
    const pe::PeImage image = pe::parse(file);
    const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});

    CHECK(carrier::read_scattered(image, regions, 0).empty());
    CHECK_THROWS_AS(carrier::read_scattered(image, regions, carrier::capacity(regions) + 1),
                    Error);
}

TEST_CASE("a fully patched carrier still parses and validates clean") {
    std::mt19937_64 gen(24);
    for (int trial = 0; trial < 10; ++trial) {
        const Bytes file = corpus::synthesize_pe(test_support::random_spec(gen));
        const pe::PeImage image = pe::parse(file);
        const auto regions = carrier::enumerate_slack(image, carrier::CarrierPolicy{});
        const Bytes data = test_support::random_bytes(carrier::capacity(regions), gen());

        const Bytes patched = pe::serialize(carrier::write_scattered(image, regions, data));
        REQUIRE(patched.size() == file.size());
        const pe::PeImage reparsed = pe::parse(patched);
        CHECK(pe::validate(reparsed).valid());

        // meaningful bytes and headers are bit-identical
        const auto map = test_support::slack_map(image);
        for (std::uint32_t o = 0; o < patched.size(); ++o) {
            if (!map[o]) REQUIRE(patched[o] == file[o]);
        }
    }
}
