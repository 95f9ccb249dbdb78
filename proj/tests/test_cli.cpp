#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Black-box tests of the installed command-line surface: each case shells
// out to the real binary (path injected as PESF_CLI_PATH) in a scratch
// directory and asserts on exit codes, outputs, and produced files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "pesf/bytes.hpp"
#include "pesf/corpus.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using pesf::Bytes;
using test_support::three_section_spec;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Bytes slurp_bytes(const fs::path& path) {
    const std::string text = slurp(path);
    return Bytes(text.begin(), text.end());
}

void spit(const fs::path& path, pesf::ByteSpan data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    REQUIRE(out.good());
}

fs::path fresh_dir() {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("pesf_cli_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

// Runs `pesf <args>` in `dir` with stdin closed. `env_password` controls the
// PESF_PASSWORD variable: set when given, explicitly unset otherwise.
CliResult run_cli(const fs::path& dir, const std::string& args,
                  const std::optional<std::string>& env_password = std::nullopt) {
    const fs::path out_file = dir / "cli_stdout.txt";
    const fs::path err_file = dir / "cli_stderr.txt";

    std::string cmd = "cd '" + dir.string() + "' && ";
    if (env_password) {
        cmd += "PESF_PASSWORD='" + *env_password + "' ";
    } else {
        cmd += "env -u PESF_PASSWORD ";
    }
    cmd += std::string(PESF_CLI_PATH) + " " + args;
    cmd += " >'" + out_file.string() + "' 2>'" + err_file.string() + "' </dev/null";

    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

// Standard scene: a synthesized cover and a secret file in a scratch dir.
struct Scene {
    fs::path dir;
    Bytes cover;
    Bytes secret;

    explicit Scene(std::size_t secret_len = 64, std::uint64_t seed = 7) : dir(fresh_dir()) {
        cover = pesf::corpus::synthesize_pe(three_section_spec(seed));
        secret = test_support::random_bytes(secret_len, seed ^ 0x5EC2E7);
        spit(dir / "cover.exe", cover);
        spit(dir / "secret.bin", secret);
    }
};

const std::string kFast = " --iterations 1000";

} // namespace

TEST_CASE("hide then extract round-trips through the filesystem") {
    Scene scene;
    const auto hidden = run_cli(
        scene.dir, "hide --cover cover.exe --secret secret.bin --out stego.exe" + kFast, "pw1");
    CHECK(hidden.exit_code == 0);
    CHECK(hidden.out.find("64 bytes") != std::string::npos);
    REQUIRE(fs::exists(scene.dir / "stego.exe"));
    CHECK(fs::file_size(scene.dir / "stego.exe") == scene.cover.size());

    SUBCASE("blind extraction") {
        const auto extracted =
            run_cli(scene.dir, "extract --stego stego.exe --out recovered.bin", "pw1");
        CHECK(extracted.exit_code == 0);
        CHECK(slurp_bytes(scene.dir / "recovered.bin") == scene.secret);
    }
    SUBCASE("extraction against the original cover") {
        const auto extracted = run_cli(
            scene.dir, "extract --stego stego.exe --original cover.exe --out recovered.bin",
            "pw1");
        CHECK(extracted.exit_code == 0);
        CHECK(slurp_bytes(scene.dir / "recovered.bin") == scene.secret);
    }
    SUBCASE("--password flag wins over the environment") {
        const auto extracted = run_cli(
            scene.dir, "extract --stego stego.exe --out recovered.bin --password pw1",
            std::string("wrong-env-pw"));
        CHECK(extracted.exit_code == 0);
        CHECK(slurp_bytes(scene.dir / "recovered.bin") == scene.secret);
    }
}

TEST_CASE("oversized secrets exit 3 and leave no output file") {
    Scene scene(700); // capacity of the fixture is 720 bytes; 700 + 57 > 720
    const auto result = run_cli(
        scene.dir, "hide --cover cover.exe --secret secret.bin --out stego.exe" + kFast, "pw");
    CHECK(result.exit_code == 3);
    CHECK_FALSE(fs::exists(scene.dir / "stego.exe"));
    CHECK(result.err.find("cover offers") != std::string::npos);
}

TEST_CASE("wrong password exits 4 and writes nothing") {
    Scene scene;
    REQUIRE(run_cli(scene.dir,
                    "hide --cover cover.exe --secret secret.bin --out stego.exe" + kFast,
                    "right").exit_code == 0);
    const auto result =
        run_cli(scene.dir, "extract --stego stego.exe --out recovered.bin", "wrong");
    CHECK(result.exit_code == 4);
    CHECK_FALSE(fs::exists(scene.dir / "recovered.bin"));
}

TEST_CASE("extracting from a clean cover exits 4 with a no-container message") {
    Scene scene;
    const auto result =
        run_cli(scene.dir, "extract --stego cover.exe --out recovered.bin", "pw");
    CHECK(result.exit_code == 4);
    CHECK_FALSE(fs::exists(scene.dir / "recovered.bin"));
}

TEST_CASE("inspect --json emits the documented schema") {
    Scene scene;
    const auto before = run_cli(scene.dir, "inspect cover.exe --json", "pw");
    REQUIRE(before.exit_code == 0);
    const auto j = nlohmann::json::parse(before.out);

    CHECK(j["capacity"].is_number_unsigned());
    CHECK(j["capacity"].get<std::uint32_t>() == 720);
    CHECK(j["valid"].get<bool>());
    CHECK(j["violations"].empty());
    CHECK_FALSE(j["container_detected"].get<bool>());
    REQUIRE(j["regions"].is_array());
    REQUIRE(!j["regions"].empty());
    for (const auto& region : j["regions"]) {
        CHECK(region.contains("offset"));
        CHECK(region.contains("length"));
        CHECK(region.contains("kind"));
        CHECK(region.contains("section"));
    }
    // Default policy: the .rsrc tail is served first.
    CHECK(j["regions"][0]["section"] == ".rsrc");
    CHECK(j["regions"][0]["kind"] == "section_tail");

    REQUIRE(run_cli(scene.dir,
                    "hide --cover cover.exe --secret secret.bin --out stego.exe" + kFast,
                    "pw").exit_code == 0);
    const auto after = run_cli(scene.dir, "inspect stego.exe --json", "pw");
    REQUIRE(after.exit_code == 0);
    const auto j2 = nlohmann::json::parse(after.out);
    CHECK(j2["container_detected"].get<bool>());
    CHECK(j2["capacity"] == j["capacity"]);
    CHECK(j2["valid"].get<bool>());
}

TEST_CASE("verify distinguishes clean files from garbage") {
    Scene scene;
    CHECK(run_cli(scene.dir, "verify cover.exe").exit_code == 0);

    spit(scene.dir / "garbage.bin", test_support::random_bytes(512, 99));
    CHECK(run_cli(scene.dir, "verify garbage.bin").exit_code == 2);
}

TEST_CASE("usage errors exit 1") {
    Scene scene;
    CHECK(run_cli(scene.dir, "").exit_code == 1);             // no subcommand
    CHECK(run_cli(scene.dir, "hide", "pw").exit_code == 1);   // missing required options
    CHECK(run_cli(scene.dir,
                  "hide --cover cover.exe --secret secret.bin --out s.exe --key-bits 77",
                  "pw").exit_code == 1);                      // key size not in {128,192,256}
    // No flag, no environment, stdin not a terminal.
    CHECK(run_cli(scene.dir, "hide --cover cover.exe --secret secret.bin --out s.exe")
              .exit_code == 1);
}

TEST_CASE("non-PE input to hide exits 2") {
    Scene scene;
    spit(scene.dir / "not_pe.bin", test_support::random_bytes(256, 17));
    const auto result = run_cli(
        scene.dir, "hide --cover not_pe.bin --secret secret.bin --out stego.exe" + kFast, "pw");
    CHECK(result.exit_code == 2);
}

TEST_CASE("seeded runs are byte-for-byte reproducible") {
    Scene scene;
    const std::string hide_cmd =
        "hide --cover cover.exe --secret secret.bin --password pw" + kFast;
    REQUIRE(run_cli(scene.dir, hide_cmd + " --rng-seed 7 --out a.exe").exit_code == 0);
    REQUIRE(run_cli(scene.dir, hide_cmd + " --rng-seed 7 --out b.exe").exit_code == 0);
    CHECK(slurp_bytes(scene.dir / "a.exe") == slurp_bytes(scene.dir / "b.exe"));

    REQUIRE(run_cli(scene.dir, hide_cmd + " --rng-seed 8 --out c.exe").exit_code == 0);
    CHECK(slurp_bytes(scene.dir / "a.exe") != slurp_bytes(scene.dir / "c.exe"));
}

TEST_CASE("a stego file with ruined headers still yields to --original") {
    Scene scene;
    REQUIRE(run_cli(scene.dir,
                    "hide --cover cover.exe --secret secret.bin --out stego.exe" + kFast,
                    "pw").exit_code == 0);

    Bytes tampered = slurp_bytes(scene.dir / "stego.exe");
    tampered[0] = 'X'; // destroy the MZ magic
    spit(scene.dir / "stego.exe", tampered);

    CHECK(run_cli(scene.dir, "extract --stego stego.exe --out blind.bin", "pw").exit_code == 2);
    const auto rescued = run_cli(
        scene.dir, "extract --stego stego.exe --original cover.exe --out rescued.bin", "pw");
    CHECK(rescued.exit_code == 0);
    CHECK(slurp_bytes(scene.dir / "rescued.bin") == scene.secret);
}

TEST_CASE("key size and section preference flags round-trip when they match") {
    Scene scene;
    REQUIRE(run_cli(scene.dir,
                    "hide --cover cover.exe --secret secret.bin --out stego.exe --key-bits 256"
                    " --prefer-section .text" + kFast,
                    "pw").exit_code == 0);
    const auto matched = run_cli(
        scene.dir,
        "extract --stego stego.exe --out r.bin --key-bits 256 --prefer-section .text", "pw");
    CHECK(matched.exit_code == 0);
    CHECK(slurp_bytes(scene.dir / "r.bin") == scene.secret);

    // A mismatched key size cannot authenticate.
    const auto mismatched = run_cli(
        scene.dir, "extract --stego stego.exe --out r2.bin --prefer-section .text", "pw");
    CHECK(mismatched.exit_code == 4);
}
