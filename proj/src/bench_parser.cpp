#include "telesim/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace telesim {

std::string_view to_string(DiagCode code) {
    switch (code) {
        case DiagCode::SyntaxError: return "SyntaxError";
        case DiagCode::UnknownElement: return "UnknownElement";
        case DiagCode::UndeclaredPath: return "UndeclaredPath";
        case DiagCode::DuplicatePath: return "DuplicatePath";
        case DiagCode::DuplicateDetector: return "DuplicateDetector";
        case DiagCode::MissingSource: return "MissingSource";
        case DiagCode::MissingDetector: return "MissingDetector";
        case DiagCode::MissingPhaseKnob: return "MissingPhaseKnob";
        case DiagCode::MultiplePhaseKnobs: return "MultiplePhaseKnobs";
        case DiagCode::BadParam: return "BadParam";
        case DiagCode::BadWiring: return "BadWiring";
        case DiagCode::TooManyPhotons: return "TooManyPhotons";
        case DiagCode::UnreachableDetector: return "UnreachableDetector";
        case DiagCode::UnreferencedPath: return "UnreferencedPath";
        case DiagCode::UndeclaredFile: return "UndeclaredFile";
    }
    return "Unknown";
}

std::string format(const Diagnostic& d) {
    return fmt::format("{}:{}: {}[{}]: {}", d.line, d.column, d.severity == Severity::Error ? "error" : "warning",
                       to_string(d.code), d.message);
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

// ---------------------------------------------------------------------------
// Bench

int Bench::path_index(std::string_view name) const {
    auto it = std::find(paths.begin(), paths.end(), name);
    return it == paths.end() ? -1 : static_cast<int>(it - paths.begin());
}

const Detector* Bench::find_detector(std::string_view name) const {
    auto it = std::find_if(detectors.begin(), detectors.end(), [&](const Detector& d) { return d.name == name; });
    return it == detectors.end() ? nullptr : &*it;
}

std::vector<std::size_t> Bench::knob_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pipeline.size(); ++i) {
        if (pipeline[i].kind == ElementKind::PhaseShifter && pipeline[i].knob) out.push_back(i);
    }
    return out;
}

bool Bench::operator==(const Bench& o) const {
    return paths == o.paths && modes == o.modes && sources == o.sources && pipeline == o.pipeline &&
           detectors == o.detectors && truncation == o.truncation;
}

int BenchBuilder::add_path(std::string name) {
    bench_.paths.push_back(std::move(name));
    const int idx = static_cast<int>(bench_.paths.size()) - 1;
    bench_.modes.push_back({idx, Polarization::H});
    bench_.modes.push_back({idx, Polarization::V});
    return idx;
}

void BenchBuilder::add_source(int path, Polarization pol) { bench_.sources.push_back({{path, pol}}); }

void BenchBuilder::add_element(Element element, int line) {
    bench_.pipeline.push_back(std::move(element));
    bench_.element_lines.push_back(line);
}

void BenchBuilder::add_detector(std::string name, int path, Polarization pol, int line) {
    bench_.detectors.push_back({std::move(name), {path, pol}});
    bench_.detector_lines.push_back(line);
}

Bench BenchBuilder::build() && { return std::move(bench_); }

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
    std::string_view text;
    int column;
};

std::vector<Token> tokenize(std::string_view line) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

class Parser {
public:
    ParseResult run(std::string_view text) {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = text.find('\n', pos);
            const std::string_view line =
                text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++line_no;
            statement(line_no, tokenize(line));
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }

        ParseResult result;
        Bench bench = std::move(builder_).build();
        if (!has_errors(diags_)) {
            auto more = validate(bench);
            diags_.insert(diags_.end(), more.begin(), more.end());
        }
        if (!has_errors(diags_)) result.bench = std::move(bench);
        result.diagnostics = std::move(diags_);
        return result;
    }

private:
    void error(DiagCode code, int line, int column, std::string message) {
        diags_.push_back({code, Severity::Error, line, column, std::move(message)});
    }

    std::optional<int> path_ref(int line, const Token& tok) {
        auto it = std::find(declared_.begin(), declared_.end(), tok.text);
        if (it == declared_.end()) {
            error(DiagCode::UndeclaredPath, line, tok.column, fmt::format("path '{}' is not declared", tok.text));
            return std::nullopt;
        }
        return static_cast<int>(it - declared_.begin());
    }

    std::optional<Polarization> polarization(int line, const Token& tok) {
        if (tok.text == "H") return Polarization::H;
        if (tok.text == "V") return Polarization::V;
        error(DiagCode::SyntaxError, line, tok.column, fmt::format("expected H or V, got '{}'", tok.text));
        return std::nullopt;
    }

    std::optional<double> keyed_number(int line, const Token& tok, std::string_view key) {
        const std::string prefix = std::string(key) + "=";
        if (!tok.text.starts_with(prefix)) {
            error(DiagCode::SyntaxError, line, tok.column, fmt::format("expected '{}<number>'", prefix));
            return std::nullopt;
        }
        const std::string_view num = tok.text.substr(prefix.size());
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
        if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty()) {
            error(DiagCode::SyntaxError, line, tok.column + static_cast<int>(prefix.size()),
                  fmt::format("'{}' is not a number", num));
            return std::nullopt;
        }
        return value;
    }

    bool arity(int line, const std::vector<Token>& t, std::size_t n, std::string_view usage) {
        if (t.size() == n) return true;
        error(DiagCode::SyntaxError, line, t.size() > n ? t[n].column : t.back().column,
              fmt::format("expected '{}'", usage));
        return false;
    }

    template <typename Make>
    void element(int line, int column, Make&& make) {
        try {
            builder_.add_element(make(), line);
        } catch (const Error& e) {
            const DiagCode code = e.code() == ErrorCode::BadWiring ? DiagCode::BadWiring : DiagCode::BadParam;
            error(code, line, column, e.what());
        }
    }

    void statement(int line, const std::vector<Token>& t) {
        if (t.empty()) return;
        const std::string_view kw = t[0].text;
        const int col = t[0].column;

        if (kw == "path") {
            if (!arity(line, t, 2, "path <name>")) return;
            if (std::find(declared_.begin(), declared_.end(), t[1].text) != declared_.end()) {
                error(DiagCode::DuplicatePath, line, t[1].column, fmt::format("path '{}' declared twice", t[1].text));
                return;
            }
            declared_.emplace_back(t[1].text);
            builder_.add_path(std::string(t[1].text));
        } else if (kw == "source") {
            if (!arity(line, t, 4, "source photon <path> <H|V>")) return;
            if (t[1].text != "photon") {
                error(DiagCode::SyntaxError, line, t[1].column, "only 'source photon' is supported");
                return;
            }
            auto p = path_ref(line, t[2]);
            auto pol = polarization(line, t[3]);
            if (p && pol) builder_.add_source(*p, *pol);
        } else if (kw == "bs") {
            if (!arity(line, t, 4, "bs <pathA> <pathB> theta=<radians>")) return;
            auto a = path_ref(line, t[1]);
            auto b = path_ref(line, t[2]);
            auto theta = keyed_number(line, t[3], "theta");
            if (a && b && theta) element(line, col, [&] { return beam_splitter(*a, *b, *theta); });
        } else if (kw == "phase") {
            if (!arity(line, t, 3, "phase <path> knob|value=<radians>")) return;
            auto p = path_ref(line, t[1]);
            if (t[2].text == "knob") {
                if (p) element(line, col, [&] { return phase_knob(*p); });
                return;
            }
            auto v = keyed_number(line, t[2], "value");
            if (p && v) element(line, col, [&] { return phase_shifter(*p, *v); });
        } else if (kw == "pbs") {
            if (!arity(line, t, 5, "pbs <inA> <inB> <outA> <outB>")) return;
            std::array<std::optional<int>, 4> p;
            for (int i = 0; i < 4; ++i) p[i] = path_ref(line, t[i + 1]);
            if (p[0] && p[1] && p[2] && p[3]) element(line, col, [&] { return polarizing_bs(*p[0], *p[1], *p[2], *p[3]); });
        } else if (kw == "qwp" || kw == "hwp") {
            if (!arity(line, t, 3, fmt::format("{} <path> angle=<radians>", kw))) return;
            auto p = path_ref(line, t[1]);
            auto a = keyed_number(line, t[2], "angle");
            if (p && a) {
                element(line, col, [&] { return kw == "qwp" ? quarter_wave_plate(*p, *a) : half_wave_plate(*p, *a); });
            }
        } else if (kw == "eop") {
            if (!arity(line, t, 2, "eop <path>")) return;
            if (auto p = path_ref(line, t[1])) element(line, col, [&] { return pockels_cell(*p); });
        } else if (kw == "delay") {
            if (!arity(line, t, 3, "delay <path> length_m=<float>")) return;
            auto p = path_ref(line, t[1]);
            auto len = keyed_number(line, t[2], "length_m");
            if (p && len) element(line, col, [&] { return delay_line(*p, *len); });
        } else if (kw == "mirror") {
            if (!arity(line, t, 2, "mirror <path>")) return;
            if (auto p = path_ref(line, t[1])) element(line, col, [&] { return mirror(*p); });
        } else if (kw == "detector") {
            if (!arity(line, t, 4, "detector <name> <path> <H|V>")) return;
            if (detector_names_.contains(std::string(t[1].text))) {
                error(DiagCode::DuplicateDetector, line, t[1].column,
                      fmt::format("detector '{}' declared twice", t[1].text));
                return;
            }
            auto p = path_ref(line, t[2]);
            auto pol = polarization(line, t[3]);
            if (p && pol) {
                detector_names_.insert(std::string(t[1].text));
                builder_.add_detector(std::string(t[1].text), *p, *pol, line);
            }
        } else {
            error(DiagCode::UnknownElement, line, col, fmt::format("unknown statement '{}'", kw));
        }
    }

    BenchBuilder builder_;
    std::vector<std::string> declared_;
    std::set<std::string> detector_names_;
    std::vector<Diagnostic> diags_;
};

int line_of(const std::vector<int>& lines, std::size_t i) { return i < lines.size() ? lines[i] : 0; }

}  // namespace

ParseResult parse_bench(std::string_view text) { return Parser{}.run(text); }

ParseResult load_bench_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back(
            {DiagCode::UndeclaredFile, Severity::Error, 0, 0, fmt::format("cannot read bench file '{}'", file.string())});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bench(ss.str());
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Diagnostic> validate(const Bench& bench) {
    std::vector<Diagnostic> out;
    const int path_count = static_cast<int>(bench.paths.size());
    auto in_range = [&](int p) { return p >= 0 && p < path_count; };

    for (std::size_t i = 0; i < bench.pipeline.size(); ++i) {
        for (int p : bench.pipeline[i].paths) {
            if (!in_range(p)) {
                out.push_back({DiagCode::BadWiring, Severity::Error, line_of(bench.element_lines, i), 1,
                               fmt::format("element {} references path index {}", i, p)});
            }
        }
    }
    for (std::size_t i = 0; i < bench.detectors.size(); ++i) {
        if (!in_range(bench.detectors[i].mode.path)) {
            out.push_back({DiagCode::BadWiring, Severity::Error, line_of(bench.detector_lines, i), 1,
                           fmt::format("detector '{}' references an unknown path", bench.detectors[i].name)});
        }
    }
    if (has_errors(out)) return out;

    if (bench.sources.empty()) {
        out.push_back({DiagCode::MissingSource, Severity::Error, 0, 0, "bench declares no 'source photon'"});
    } else if (bench.sources.size() > bench.truncation.max_total) {
        out.push_back({DiagCode::TooManyPhotons, Severity::Error, 0, 0,
                       fmt::format("{} source photons exceed the truncation of {}", bench.sources.size(),
                                   bench.truncation.max_total)});
    }
    if (bench.detectors.empty()) {
        out.push_back({DiagCode::MissingDetector, Severity::Error, 0, 0, "bench declares no detector"});
    }
    const auto knobs = bench.knob_indices();
    if (knobs.empty()) {
        out.push_back({DiagCode::MissingPhaseKnob, Severity::Error, 0, 0, "bench has no 'phase <path> knob'"});
    } else if (knobs.size() > 1) {
        out.push_back({DiagCode::MultiplePhaseKnobs, Severity::Error, line_of(bench.element_lines, knobs[1]), 1,
                       fmt::format("{} phase knobs declared; exactly one is swept", knobs.size())});
    }

    // Forward reachability of source modes through the element couplings.
    std::set<ModeId> reached;
    for (const auto& s : bench.sources) reached.insert(s.mode);
    auto couple = [&](ModeId a, ModeId b) {
        if (reached.contains(a) || reached.contains(b)) {
            reached.insert(a);
            reached.insert(b);
        }
    };
    for (const auto& e : bench.pipeline) {
        switch (e.kind) {
            case ElementKind::BeamSplitter:
                couple({e.paths[0], Polarization::H}, {e.paths[1], Polarization::H});
                couple({e.paths[0], Polarization::V}, {e.paths[1], Polarization::V});
                break;
            case ElementKind::HalfWavePlate:
            case ElementKind::QuarterWavePlate:
                couple({e.paths[0], Polarization::H}, {e.paths[0], Polarization::V});
                break;
            case ElementKind::PolarizingBS:
                for (const auto& [a, b] : polarizing_bs_swaps(e)) couple(a, b);
                break;
            default:
                break;
        }
    }
    for (std::size_t i = 0; i < bench.detectors.size(); ++i) {
        const auto& d = bench.detectors[i];
        if (!reached.contains(d.mode)) {
            out.push_back({DiagCode::UnreachableDetector, Severity::Warning, line_of(bench.detector_lines, i), 1,
                           fmt::format("no source photon can reach detector '{}'", d.name)});
        }
    }

    std::vector<bool> used(bench.paths.size(), false);
    for (const auto& s : bench.sources) used[s.mode.path] = true;
    for (const auto& e : bench.pipeline)
        for (int p : e.paths) used[p] = true;
    for (const auto& d : bench.detectors) used[d.mode.path] = true;
    for (std::size_t p = 0; p < used.size(); ++p) {
        if (!used[p]) {
            out.push_back({DiagCode::UnreferencedPath, Severity::Warning, 0, 0,
                           fmt::format("path '{}' is never used", bench.paths[p])});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const Bench& bench) {
    std::string s;
    auto name = [&](int p) -> const std::string& { return bench.paths.at(p); };
    for (const auto& p : bench.paths) s += fmt::format("path {}\n", p);
    for (const auto& src : bench.sources)
        s += fmt::format("source photon {} {}\n", name(src.mode.path), to_char(src.mode.polarization));
    for (const auto& e : bench.pipeline) {
        switch (e.kind) {
            case ElementKind::BeamSplitter:
                s += fmt::format("bs {} {} theta={}\n", name(e.paths[0]), name(e.paths[1]), e.theta);
                break;
            case ElementKind::PhaseShifter:
                s += e.knob ? fmt::format("phase {} knob\n", name(e.paths[0]))
                            : fmt::format("phase {} value={}\n", name(e.paths[0]), e.phase);
                break;
            case ElementKind::PockelsCell:
                s += fmt::format("eop {}\n", name(e.paths[0]));
                break;
            case ElementKind::PolarizingBS:
                s += fmt::format("pbs {} {} {} {}\n", name(e.paths[0]), name(e.paths[1]), name(e.paths[2]),
                                 name(e.paths[3]));
                break;
            case ElementKind::HalfWavePlate:
            case ElementKind::QuarterWavePlate:
                s += fmt::format("{} {} angle={}\n", to_string(e.kind), name(e.paths[0]), e.angle);
                break;
            case ElementKind::DelayLine:
                s += fmt::format("delay {} length_m={}\n", name(e.paths[0]), e.length_m);
                break;
            case ElementKind::Mirror:
                s += fmt::format("mirror {}\n", name(e.paths[0]));
                break;
        }
    }
    for (const auto& d : bench.detectors)
        s += fmt::format("detector {} {} {}\n", d.name, name(d.mode.path), to_char(d.mode.polarization));
    return s;
}

}  // namespace telesim
