#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "properties.hpp"
#include "telesim/bench.hpp"

using namespace telesim;

namespace {

const std::string kDataDir = TELESIM_DATA_DIR;

bool has_code(const std::vector<Diagnostic>& diags, DiagCode code) {
    return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

const Diagnostic& first(const std::vector<Diagnostic>& diags, DiagCode code) {
    return *std::find_if(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

constexpr std::string_view kMinimal = R"(path a
path b
source photon a H
bs a b theta=0.5
phase a knob
detector D a H
)";

}  // namespace

TEST_CASE("bundled figure1.bench parses to the builtin bench") {
    const ParseResult r = load_bench_file(kDataDir + "/figure1.bench");
    REQUIRE(r.ok());
    CHECK(r.diagnostics.empty());
    const Bench& b = *r.bench;
    CHECK(b == builtin_figure1());
    for (const char* name : {"D1", "D2", "D1*", "D2*"}) CHECK(b.find_detector(name) != nullptr);
    CHECK(b.detectors.size() == 4);
    CHECK(b.modes.size() == 2 * b.paths.size());
    for (const char* path : {"a", "b", "s", "anc", "bob", "b1", "b2"}) CHECK(b.path_index(path) >= 0);
}

TEST_CASE("builtin bench") {
    const Bench b = builtin_figure1();
    CHECK(validate(b).empty());
    // The Bell-measurement splitter mixes s and a symmetrically.
    const auto bs_a = std::find_if(b.pipeline.begin(), b.pipeline.end(), [&](const Element& e) {
        return e.kind == ElementKind::BeamSplitter && e.paths == std::vector<int>{b.path_index("s"), b.path_index("a")};
    });
    REQUIRE(bs_a != b.pipeline.end());
    CHECK(bs_a->theta == std::numbers::pi / 4);
    CHECK(b.knob_indices().size() == 1);
    CHECK(std::count_if(b.pipeline.begin(), b.pipeline.end(),
                        [](const Element& e) { return e.kind == ElementKind::PockelsCell; }) == 1);
}

TEST_CASE("canonical mode order is path declaration order, H before V") {
    const ParseResult r = parse_bench("path z\npath y\nsource photon y V\nphase z knob\ndetector D y V\n");
    REQUIRE(r.ok());
    const std::vector<ModeId> expected = {
        {0, Polarization::H}, {0, Polarization::V}, {1, Polarization::H}, {1, Polarization::V}};
    CHECK(r.bench->modes == expected);
    CHECK(r.bench->paths == std::vector<std::string>{"z", "y"});
}

TEST_CASE("empty input reports a missing source") {
    const ParseResult r = parse_bench("");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r.diagnostics, DiagCode::MissingSource));
    const ParseResult comments = parse_bench("# nothing here\n\n   # still nothing\n");
    CHECK(has_code(comments.diagnostics, DiagCode::MissingSource));
}

TEST_CASE("element on an undeclared path") {
    const ParseResult r = parse_bench("path a\nsource photon a H\nbs a ghost theta=0.3\nphase a knob\ndetector D a H\n");
    CHECK_FALSE(r.ok());
    REQUIRE(has_code(r.diagnostics, DiagCode::UndeclaredPath));
    const Diagnostic& d = first(r.diagnostics, DiagCode::UndeclaredPath);
    CHECK(d.line == 3);
    CHECK(d.column == 6);
    CHECK(format(d) == "3:6: error[UndeclaredPath]: path 'ghost' is not declared");
}

TEST_CASE("paths must be declared before use") {
    const ParseResult r = parse_bench("source photon a H\npath a\nphase a knob\ndetector D a H\n");
    CHECK(has_code(r.diagnostics, DiagCode::UndeclaredPath));
}

TEST_CASE("phase knob count") {
    std::string two(kMinimal);
    two += "phase b knob\n";
    const ParseResult r = parse_bench(two);
    CHECK_FALSE(r.ok());
    REQUIRE(has_code(r.diagnostics, DiagCode::MultiplePhaseKnobs));
    CHECK(first(r.diagnostics, DiagCode::MultiplePhaseKnobs).line == 7);

    const ParseResult none = parse_bench("path a\nsource photon a H\ndetector D a H\n");
    CHECK(has_code(none.diagnostics, DiagCode::MissingPhaseKnob));
}

TEST_CASE("distinct diagnostic codes") {
    struct Case {
        std::string text;
        DiagCode code;
    };
    const std::string base(kMinimal);
    const std::vector<Case> cases = {
        {base + "detector D b H\n", DiagCode::DuplicateDetector},
        {base + "laser a\n", DiagCode::UnknownElement},
        {base + "bs a b theta=abc\n", DiagCode::SyntaxError},
        {base + "bs a b 0.3\n", DiagCode::SyntaxError},
        {base + "bs a b\n", DiagCode::SyntaxError},
        {base + "detector E a X\n", DiagCode::SyntaxError},
        {base + "source laser a H\n", DiagCode::SyntaxError},
        {base + "path a\n", DiagCode::DuplicatePath},
        {base + "bs a b theta=2\n", DiagCode::BadParam},
        {base + "bs a a theta=0.2\n", DiagCode::BadWiring},
        {base + "delay a length_m=-1\n", DiagCode::BadParam},
        {base + "pbs a b a b\n", DiagCode::BadWiring},
        {base + "source photon b V\nsource photon b H\n", DiagCode::TooManyPhotons},
        {"path a\nsource photon a H\nphase a knob\n", DiagCode::MissingDetector},
    };
    for (const auto& c : cases) {
        CAPTURE(c.text);
        const ParseResult r = parse_bench(c.text);
        CHECK_FALSE(r.ok());
        CHECK(has_code(r.diagnostics, c.code));
    }
}

TEST_CASE("statement diagnostics carry positions") {
    const ParseResult r = parse_bench("path a\n  bs a b theta=0.1\n\tlaser\nsource photon a Q\n");
    int positioned = 0;
    for (const auto& d : r.diagnostics) {
        if (d.code == DiagCode::MissingSource || d.code == DiagCode::MissingDetector ||
            d.code == DiagCode::MissingPhaseKnob)
            continue;
        CHECK(d.line >= 1);
        CHECK(d.column >= 1);
        ++positioned;
    }
    CHECK(positioned == 3);
    const auto laser = first(r.diagnostics, DiagCode::UnknownElement);
    CHECK(laser.line == 3);
    CHECK(laser.column == 2);
}

TEST_CASE("validation warnings") {
    // D sits on a mode nothing couples into.
    const ParseResult unreachable = parse_bench(std::string(kMinimal) + "detector E b V\n");
    REQUIRE(unreachable.ok());
    REQUIRE(unreachable.diagnostics.size() == 1);
    CHECK(unreachable.diagnostics[0].code == DiagCode::UnreachableDetector);
    CHECK(unreachable.diagnostics[0].severity == Severity::Warning);
    CHECK(unreachable.diagnostics[0].line == 7);

    const ParseResult unused = parse_bench(std::string(kMinimal) + "path idle\n");
    REQUIRE(unused.ok());
    CHECK(has_code(unused.diagnostics, DiagCode::UnreferencedPath));
    CHECK_FALSE(has_errors(unused.diagnostics));
}

TEST_CASE("validate on a programmatic bench") {
    CHECK(validate(builtin_figure1()).empty());
    Bench b = builtin_figure1();
    b.pipeline.push_back(phase_knob(0));
    const auto diags = validate(b);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == DiagCode::MultiplePhaseKnobs);
}

TEST_CASE("missing bench file") {
    const ParseResult r = load_bench_file("/nonexistent/dir/missing.bench");
    CHECK_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].code == DiagCode::UndeclaredFile);
}

TEST_CASE("serialize round-trips") {
    const Bench builtin = builtin_figure1();
    const ParseResult again = parse_bench(serialize(builtin));
    REQUIRE(again.ok());
    CHECK(*again.bench == builtin);
    CHECK(serialize(*again.bench) == serialize(builtin));

    std::mt19937_64 rng(77);
    for (int k = 0; k < 200; ++k) {
        const auto rb = props::random_bench(rng, 4, true);
        const ParseResult r = parse_bench(rb.text);
        REQUIRE(r.ok());
        const ParseResult rr = parse_bench(serialize(*r.bench));
        REQUIRE(rr.ok());
        CHECK(*rr.bench == *r.bench);
    }
}

TEST_CASE("parsing is deterministic") {
    const std::string text = serialize(builtin_figure1());
    const ParseResult a = parse_bench(text);
    const ParseResult b = parse_bench(text);
    REQUIRE(a.ok());
    CHECK(*a.bench == *b.bench);
    CHECK(a.bench->modes == b.bench->modes);
    CHECK(a.bench->element_lines == b.bench->element_lines);
}

TEST_CASE("comments and CRLF line endings") {
    std::string text(kMinimal);
    std::string crlf;
    for (char c : text) {
        if (c == '\n') crlf += " # trailing\r\n";
        else crlf += c;
    }
    const ParseResult r = parse_bench(crlf);
    REQUIRE(r.ok());
    CHECK(*r.bench == *parse_bench(kMinimal).bench);
}
