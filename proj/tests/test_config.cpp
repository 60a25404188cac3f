#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <doctest.h>

#include "vtm/config.hpp"
#include "vtm/errors.hpp"

using namespace vtm;

namespace {

// Runs f, which must throw E, and hands back the message for inspection.
template <typename E>
std::string thrown_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return "<did not throw>";
}

bool mentions(const std::string& message, const std::string& needle) {
    return message.find(needle) != std::string::npos;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("parses keys, comments and blank lines") {
    const Config cfg = parse_config(
        "# training setup\n"
        "\n"
        "epochs = 300\n"
        "  lr=2e-3   # inline comment\n"
        "name = overfit run\n"
        "\t\n"
        "seed = 18446744073709551615\n");
    CHECK(cfg.values.size() == 4);
    CHECK(cfg.has("epochs"));
    CHECK(!cfg.has("Epochs"));
    CHECK(cfg.get_int("epochs", 0) == 300);
    CHECK(cfg.get_double("lr", 0.0) == 2e-3);
    CHECK(cfg.get_string("name", "") == "overfit run");
    CHECK(cfg.get_u64("seed", 0) == 18446744073709551615ull);
}

TEST_CASE("typed getters fall back when the key is absent") {
    const Config cfg = parse_config("present = 1\n");
    CHECK(cfg.get_string("missing", "fallback") == "fallback");
    CHECK(cfg.get_int("missing", -7) == -7);
    CHECK(cfg.get_u64("missing", 9) == 9);
    CHECK(cfg.get_double("missing", 0.25) == 0.25);
}

TEST_CASE("typed getters reject values of the wrong shape") {
    const Config cfg = parse_config(
        "epochs = soon\n"
        "lr = fast\n"
        "count = 1.5\n"
        "negative = -3\n");
    CHECK_THROWS_AS(cfg.get_int("epochs", 0), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("lr", 0.0), ConfigError);
    CHECK_THROWS_AS(cfg.get_int("count", 0), ConfigError);
    CHECK_THROWS_AS(cfg.get_u64("negative", 0), ConfigError);
    CHECK(cfg.get_int("negative", 0) == -3);
    CHECK(cfg.get_string("epochs", "") == "soon"); // strings always work
}

TEST_CASE("malformed lines report their line number") {
    CHECK(mentions(thrown_message<SyntaxError>(
                       [] { parse_config("a = 1\nno equals sign\n"); }),
                   "line 2"));
    CHECK(mentions(thrown_message<SyntaxError>([] { parse_config("= 1\n"); }),
                   "empty key"));
    CHECK(mentions(thrown_message<SyntaxError>([] { parse_config("a =\n"); }),
                   "empty value"));
    CHECK(mentions(thrown_message<SyntaxError>(
                       [] { parse_config("a = 1\na = 2\n"); }),
                   "duplicate key"));
    CHECK(mentions(thrown_message<SyntaxError>(
                       [] { parse_config("two words = 1\n"); }),
                   "whitespace"));
    // A comment-only value is an empty value.
    CHECK_THROWS_AS(parse_config("a = # nothing\n"), SyntaxError);
}

TEST_CASE("loads from a file and reports unreadable paths") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "vtm_config_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path path = dir / "run.cfg";
    {
        std::ofstream out(path);
        out << "epochs = 12\nlr = 1e-4\n";
    }
    const Config cfg = load_config(path.string());
    CHECK(cfg.get_int("epochs", 0) == 12);
    CHECK(cfg.get_double("lr", 0.0) == 1e-4);

    CHECK_THROWS_AS(load_config((dir / "absent.cfg").string()), IoError);
    fs::remove_all(dir);
}

} // TEST_SUITE

