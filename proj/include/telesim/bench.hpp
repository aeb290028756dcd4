#pragma once

// Bench description: a line-oriented text format that declares paths, the
// photon source, the ordered element pipeline and the detectors.
//
//   path <name>
//   source photon <path> <H|V>
//   bs <pathA> <pathB> theta=<radians>
//   phase <path> knob
//   phase <path> value=<radians>
//   pbs <inA> <inB> <outA> <outB>
//   qwp <path> angle=<radians>
//   hwp <path> angle=<radians>
//   eop <path>
//   delay <path> length_m=<float>
//   mirror <path>
//   detector <name> <path> <H|V>
//
// '#' starts a comment. Paths must be declared before use.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "telesim/elements.hpp"

namespace telesim {

enum class DiagCode {
    SyntaxError,
    UnknownElement,
    UndeclaredPath,
    DuplicatePath,
    DuplicateDetector,
    MissingSource,
    MissingDetector,
    MissingPhaseKnob,
    MultiplePhaseKnobs,
    BadParam,
    BadWiring,
    TooManyPhotons,
    UnreachableDetector,
    UnreferencedPath,
    UndeclaredFile,
};

std::string_view to_string(DiagCode code);

enum class Severity { Error, Warning };

struct Diagnostic {
    DiagCode code;
    Severity severity = Severity::Error;
    int line = 0;  // 1-based; 0 when the bench was built in code
    int column = 0;
    std::string message;
};

/// "<line>:<col>: error[Code]: message"
std::string format(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

struct SourcePhoton {
    ModeId mode;
    bool operator==(const SourcePhoton&) const = default;
};

struct Detector {
    std::string name;
    ModeId mode;
    bool operator==(const Detector&) const = default;
};

struct Bench {
    std::vector<std::string> paths;
    std::vector<ModeId> modes;  // declaration order of paths, H before V
    std::vector<SourcePhoton> sources;
    std::vector<Element> pipeline;
    std::vector<Detector> detectors;
    Truncation truncation;

    // Source line of each pipeline element / detector, when parsed from text.
    std::vector<int> element_lines;
    std::vector<int> detector_lines;

    int path_index(std::string_view name) const;  // -1 when absent
    const Detector* find_detector(std::string_view name) const;
    std::vector<std::size_t> knob_indices() const;

    /// Structural equality; source line bookkeeping is ignored.
    bool operator==(const Bench& other) const;
};

/// Builder used by both the parser and in-code bench construction.
class BenchBuilder {
public:
    int add_path(std::string name);
    void add_source(int path, Polarization pol);
    void add_element(Element element, int line = 0);
    void add_detector(std::string name, int path, Polarization pol, int line = 0);
    Bench build() &&;

private:
    Bench bench_;
};

struct ParseResult {
    std::optional<Bench> bench;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return bench.has_value(); }
};

/// Parses and validates. `bench` is set iff no error-severity diagnostic was produced.
ParseResult parse_bench(std::string_view text);

ParseResult load_bench_file(const std::filesystem::path& file);

/// Empty iff every invariant holds; warnings for unused paths and unreachable detectors.
std::vector<Diagnostic> validate(const Bench& bench);

/// Canonical text form; parse_bench(serialize(b)) reproduces b.
std::string serialize(const Bench& bench);

/// The active-teleportation layout, built element by element in code.
Bench builtin_figure1();

}  // namespace telesim
