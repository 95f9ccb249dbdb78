// pesf — hide and retrieve encrypted payloads in the alignment padding of
// 32-bit PE executables. The embedding never changes the cover's size; the
// payload is sealed with AES-GCM under a PBKDF2-derived key.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <termios.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "pesf/carrier.hpp"
#include "pesf/crypto.hpp"
#include "pesf/error.hpp"
#include "pesf/pe.hpp"
#include "pesf/stego.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitExtract = 4;

int exit_code_for(pesf::ErrorCode code) {
    using EC = pesf::ErrorCode;
    switch (code) {
    case EC::NotMz:
    case EC::NotPe:
    case EC::Truncated:
    case EC::UnsupportedPe32Plus:
    case EC::MalformedSectionTable:
    case EC::RvaNotMapped:
    case EC::OffsetNotMapped:
    case EC::InvalidSpec:
        return kExitParse;
    case EC::InsufficientCapacity:
        return kExitCapacity;
    case EC::AuthenticationFailed:
    case EC::NoContainerFound:
    case EC::LengthMismatch:
    case EC::BadMagic:
    case EC::UnsupportedVersion:
    case EC::TruncatedContainer:
        return kExitExtract;
    case EC::EmptyPassword:
    case EC::BadKeyLength:
    case EC::InvalidKdfParams:
        return kExitUsage;
    }
    return kExitUsage;
}

pesf::Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path + " for reading");
    }
    pesf::Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw std::runtime_error("read failed on " + path);
    }
    return data;
}

// Write to a temp file in the target directory, then rename over the final
// name. A failed command never leaves a partial output file behind.
void write_file_atomic(const std::string& path, pesf::ByteSpan data) {
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    const fs::path temp =
        dir / (target.filename().string() + ".tmp-" + std::to_string(::getpid()));
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + temp.string() + " for writing");
        }
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out.good()) {
            out.close();
            std::error_code ec;
            fs::remove(temp, ec);
            throw std::runtime_error("write failed on " + temp.string());
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(temp, ignored);
        throw std::runtime_error("cannot rename " + temp.string() + " to " + path + ": " +
                                 ec.message());
    }
}

std::string prompt_password() {
    std::cerr << "Password: " << std::flush;
    termios original{};
    const bool have_tty = ::tcgetattr(STDIN_FILENO, &original) == 0;
    if (have_tty) {
        termios noecho = original;
        noecho.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &noecho);
    }
    std::string line;
    std::getline(std::cin, line);
    if (have_tty) {
        ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &original);
    }
    std::cerr << "\n";
    return line;
}

// Precedence: explicit --password flag, then PESF_PASSWORD, then an
// interactive prompt when stdin is a terminal.
std::string resolve_password(const std::string& flag_value) {
    if (!flag_value.empty()) {
        return flag_value;
    }
    if (const char* env = std::getenv("PESF_PASSWORD"); env != nullptr && *env != '\0') {
        return env;
    }
    if (::isatty(STDIN_FILENO)) {
        return prompt_password();
    }
    throw CLI::ValidationError(
        "password", "no password given: use --password, set PESF_PASSWORD, or run on a terminal");
}

pesf::stego::StegoOptions make_options(int key_bits, std::uint32_t iterations,
                                       const std::string& prefer_section) {
    pesf::stego::StegoOptions opts;
    opts.key_bits = static_cast<pesf::crypto::KeyBits>(key_bits);
    opts.iterations = iterations;
    if (prefer_section.empty()) {
        opts.policy.prefer_section.reset();
    } else {
        opts.policy.prefer_section = prefer_section;
    }
    return opts;
}

int run_hide(const std::string& cover_path, const std::string& secret_path,
             const std::string& out_path, const std::string& password_flag, int key_bits,
             std::uint32_t iterations, const std::string& prefer_section,
             std::optional<std::uint64_t> rng_seed) {
    const pesf::Bytes cover = read_file(cover_path);
    const pesf::Bytes secret = read_file(secret_path);
    const std::string password = resolve_password(password_flag);
    const auto opts = make_options(key_bits, iterations, prefer_section);

    pesf::crypto::DeterministicRandom seeded(rng_seed.value_or(0));
    pesf::crypto::RandomSource& rng =
        rng_seed ? static_cast<pesf::crypto::RandomSource&>(seeded) : pesf::crypto::system_random();

    const pesf::Bytes stego =
        pesf::stego::hide(cover, secret, pesf::as_bytes(password), opts, rng);
    write_file_atomic(out_path, stego);
    std::cout << "hid " << secret.size() << " bytes in " << out_path << " (" << stego.size()
              << " bytes, same size as cover)\n";
    return kExitOk;
}

int run_extract(const std::string& stego_path, const std::string& out_path,
                const std::string& original_path, const std::string& password_flag, int key_bits,
                const std::string& prefer_section) {
    const pesf::Bytes stego = read_file(stego_path);
    const std::string password = resolve_password(password_flag);
    // Iteration count travels in the embedded container; only key size and
    // region ordering must match the hide invocation.
    const auto opts = make_options(key_bits, pesf::crypto::kDefaultKdfIterations, prefer_section);

    pesf::Bytes secret;
    if (!original_path.empty()) {
        const pesf::Bytes cover = read_file(original_path);
        secret = pesf::stego::retract_distortion(stego, cover, pesf::as_bytes(password), opts);
    } else {
        secret = pesf::stego::retract_blind(stego, pesf::as_bytes(password), opts);
    }
    write_file_atomic(out_path, secret);
    std::cout << "recovered " << secret.size() << " bytes to " << out_path << "\n";
    return kExitOk;
}

int run_inspect(const std::string& file_path, bool as_json, const std::string& prefer_section) {
    const pesf::Bytes data = read_file(file_path);
    const auto opts = make_options(128, pesf::crypto::kDefaultKdfIterations, prefer_section);
    const pesf::pe::PeImage image = pesf::pe::parse(data);
    const pesf::stego::CapacityReport report = pesf::stego::inspect(data, opts);

    auto section_name = [&](const pesf::carrier::SlackRegion& region) -> std::optional<std::string> {
        if (!region.section_index) return std::nullopt;
        return image.sections[*region.section_index].name_string();
    };

    if (as_json) {
        nlohmann::json j;
        j["capacity"] = report.capacity;
        j["regions"] = nlohmann::json::array();
        for (const auto& region : report.regions) {
            nlohmann::json r;
            r["offset"] = region.offset;
            r["length"] = region.length;
            r["kind"] = pesf::carrier::to_string(region.kind);
            if (const auto name = section_name(region)) {
                r["section"] = *name;
            } else {
                r["section"] = nullptr;
            }
            j["regions"].push_back(std::move(r));
        }
        j["valid"] = report.validation.violations.empty();
        j["violations"] = nlohmann::json::array();
        for (const auto& v : report.validation.violations) {
            j["violations"].push_back(std::string(pesf::pe::to_string(v.kind)) + ": " + v.message);
        }
        j["container_detected"] = report.container_magic_present;
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << file_path << ": " << image.sections.size() << " sections, capacity "
              << report.capacity << " bytes in " << report.regions.size() << " regions\n";
    for (const auto& region : report.regions) {
        char line[64];
        std::snprintf(line, sizeof(line), "  0x%08X  %6u  ", region.offset, region.length);
        std::cout << line << pesf::carrier::to_string(region.kind);
        if (const auto name = section_name(region)) {
            std::cout << "  " << *name;
        }
        std::cout << "\n";
    }
    if (report.validation.violations.empty()) {
        std::cout << "validation: clean\n";
    } else {
        std::cout << "validation: " << report.validation.violations.size() << " finding(s)\n";
        for (const auto& v : report.validation.violations) {
            std::cout << "  " << pesf::pe::to_string(v.kind) << ": " << v.message << "\n";
        }
    }
    std::cout << "container magic: " << (report.container_magic_present ? "present" : "absent")
              << "\n";
    return kExitOk;
}

int run_verify(const std::string& file_path) {
    const pesf::Bytes data = read_file(file_path);
    const pesf::pe::PeImage image = pesf::pe::parse(data);
    const pesf::pe::ValidationReport report = pesf::pe::validate(image);
    if (report.violations.empty()) {
        std::cout << file_path << ": OK (PE32, " << image.sections.size() << " sections)\n";
        return kExitOk;
    }
    for (const auto& v : report.violations) {
        std::cerr << file_path << ": " << pesf::pe::to_string(v.kind) << ": " << v.message << "\n";
    }
    return kExitParse;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hide encrypted payloads in the alignment padding of 32-bit PE executables"};
    app.require_subcommand(1);

    const std::string password_help =
        "Password (unsafe: visible in shell history; prefer PESF_PASSWORD or the prompt)";
    const std::string prefer_help =
        "Section whose padding is filled first; empty string disables the preference";
    const auto key_bits_check = CLI::IsMember({128, 192, 256});

    std::string cover_path, secret_path, stego_path, out_path, original_path, file_path;
    std::string password_flag;
    std::string prefer_section = ".rsrc";
    int key_bits = 128;
    std::uint32_t iterations = pesf::crypto::kDefaultKdfIterations;
    std::uint64_t rng_seed_value = 0;
    bool as_json = false;

    CLI::App* hide = app.add_subcommand("hide", "Embed a secret file into a cover executable");
    hide->add_option("--cover", cover_path, "Cover PE32 file")->required();
    hide->add_option("--secret", secret_path, "File to hide")->required();
    hide->add_option("--out", out_path, "Stego output path")->required();
    hide->add_option("--password", password_flag, password_help);
    hide->add_option("--key-bits", key_bits, "AES key size")->check(key_bits_check);
    hide->add_option("--iterations", iterations, "PBKDF2 iteration count")
        ->check(CLI::Range(std::uint32_t{1}, pesf::crypto::kMaxKdfIterations));
    hide->add_option("--prefer-section", prefer_section, prefer_help);
    CLI::Option* rng_seed_opt =
        hide->add_option("--rng-seed", rng_seed_value, "Deterministic salt/nonce seed (testing)")
            ->group("");

    CLI::App* extract = app.add_subcommand("extract", "Recover a hidden secret");
    extract->add_option("--stego", stego_path, "Stego PE32 file")->required();
    extract->add_option("--out", out_path, "Where to write the recovered secret")->required();
    extract->add_option("--original", original_path,
                        "Original cover; enables recovery by differencing against it");
    extract->add_option("--password", password_flag, password_help);
    extract->add_option("--key-bits", key_bits, "AES key size used at hide time")
        ->check(key_bits_check);
    extract->add_option("--prefer-section", prefer_section, prefer_help);

    CLI::App* inspect = app.add_subcommand("inspect", "Report padding capacity and regions");
    inspect->add_option("file", file_path, "PE32 file to inspect")->required();
    inspect->add_flag("--json", as_json, "Machine-readable output");
    inspect->add_option("--prefer-section", prefer_section, prefer_help);

    CLI::App* verify = app.add_subcommand("verify", "Check PE32 structural invariants");
    verify->add_option("file", file_path, "PE32 file to verify")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (hide->parsed()) {
            std::optional<std::uint64_t> rng_seed;
            if (rng_seed_opt->count() > 0) rng_seed = rng_seed_value;
            return run_hide(cover_path, secret_path, out_path, password_flag, key_bits, iterations,
                            prefer_section, rng_seed);
        }
        if (extract->parsed()) {
            return run_extract(stego_path, out_path, original_path, password_flag, key_bits,
                               prefer_section);
        }
        if (inspect->parsed()) {
            return run_inspect(file_path, as_json, prefer_section);
        }
        if (verify->parsed()) {
            return run_verify(file_path);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pesf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
