#include "telesim/elements.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace telesim {

namespace {

ModeId h_mode(int path) { return {path, Polarization::H}; }
ModeId v_mode(int path) { return {path, Polarization::V}; }

Matrix2c rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Matrix2c r;
    r << c, -s, s, c;
    return r;
}

Matrix2c retarder(double angle, Complex slow_axis_phase) {
    Matrix2c d = Matrix2c::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = slow_axis_phase;
    return rotation(angle) * d * rotation(-angle);
}

// Wave plates transform single-photon amplitudes by their Jones matrix J; in the
// operator convention that is the two-mode unitary J^dagger.
FockState apply_jones(const FockState& state, int path, const Matrix2c& jones) {
    return apply_two_mode_unitary(state, h_mode(path), v_mode(path), jones.adjoint());
}

Matrix2c swap_matrix() {
    Matrix2c s;
    s << 0, 1, 1, 0;
    return s;
}

}  // namespace

std::string_view to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::BeamSplitter: return "bs";
        case ElementKind::PhaseShifter: return "phase";
        case ElementKind::PockelsCell: return "eop";
        case ElementKind::PolarizingBS: return "pbs";
        case ElementKind::HalfWavePlate: return "hwp";
        case ElementKind::QuarterWavePlate: return "qwp";
        case ElementKind::DelayLine: return "delay";
        case ElementKind::Mirror: return "mirror";
    }
    return "?";
}

Element beam_splitter(int path_a, int path_b, double theta) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2)) {
        throw Error(ErrorCode::BadParam, "beam splitter theta must lie in [0, pi/2]");
    }
    if (path_a == path_b) throw Error(ErrorCode::BadWiring, "beam splitter needs two distinct paths");
    Element e;
    e.kind = ElementKind::BeamSplitter;
    e.paths = {path_a, path_b};
    e.theta = theta;
    return e;
}

Element phase_shifter(int path, double phase) {
    if (!std::isfinite(phase)) throw Error(ErrorCode::BadParam, "phase must be finite");
    Element e;
    e.kind = ElementKind::PhaseShifter;
    e.paths = {path};
    e.phase = phase;
    return e;
}

Element phase_knob(int path) {
    Element e;
    e.kind = ElementKind::PhaseShifter;
    e.paths = {path};
    e.knob = true;
    return e;
}

Element pockels_cell(int path, double v_half_wave_kv) {
    if (!(v_half_wave_kv > 0.0)) throw Error(ErrorCode::BadParam, "half-wave voltage must be positive");
    Element e;
    e.kind = ElementKind::PockelsCell;
    e.paths = {path};
    e.v_half_wave_kv = v_half_wave_kv;
    return e;
}

Element polarizing_bs(int in_a, int in_b, int out_a, int out_b) {
    const std::set<int> distinct{in_a, in_b, out_a, out_b};
    if (distinct.size() != 4) throw Error(ErrorCode::BadWiring, "polarizing splitter needs four distinct paths");
    Element e;
    e.kind = ElementKind::PolarizingBS;
    e.paths = {in_a, in_b, out_a, out_b};
    return e;
}

Element quarter_wave_plate(int path, double angle) {
    if (!std::isfinite(angle)) throw Error(ErrorCode::BadParam, "wave plate angle must be finite");
    Element e;
    e.kind = ElementKind::QuarterWavePlate;
    e.paths = {path};
    e.angle = angle;
    return e;
}

Element half_wave_plate(int path, double angle) {
    if (!std::isfinite(angle)) throw Error(ErrorCode::BadParam, "wave plate angle must be finite");
    Element e;
    e.kind = ElementKind::HalfWavePlate;
    e.paths = {path};
    e.angle = angle;
    return e;
}

Element delay_line(int path, double length_m) {
    if (!(length_m > 0.0) || !std::isfinite(length_m)) {
        throw Error(ErrorCode::BadParam, "delay line length must be positive");
    }
    Element e;
    e.kind = ElementKind::DelayLine;
    e.paths = {path};
    e.length_m = length_m;
    return e;
}

Element mirror(int path) {
    Element e;
    e.kind = ElementKind::Mirror;
    e.paths = {path};
    return e;
}

Matrix2c beam_splitter_matrix(double theta) { return rotation(theta); }

Matrix2c quarter_wave_jones(double angle) { return retarder(angle, Complex{0.0, 1.0}); }

Matrix2c half_wave_jones(double angle) { return retarder(angle, Complex{-1.0, 0.0}); }

FockState apply_eop(const FockState& state, const EopConfig& config, ModeId mode_v) {
    if (mode_v.polarization != Polarization::V) {
        throw Error(ErrorCode::PolarizationMismatch, "the Pockels cell only acts on V-polarized modes");
    }
    const std::size_t idx = state.index_of(mode_v);
    if (!config.armed) return state;
    // e^{i pi n} = (-1)^n, applied exactly so that two passes restore every bit.
    std::vector<FockState::Entry> out = state.entries();
    for (auto& e : out)
        if (e.occupation[idx] % 2 == 1) e.amplitude = -e.amplitude;
    return FockState::from_entries(state.shared_modes(), state.truncation(), std::move(out));
}

std::vector<std::pair<ModeId, ModeId>> polarizing_bs_swaps(const Element& e) {
    const int in_a = e.paths.at(0), in_b = e.paths.at(1), out_a = e.paths.at(2), out_b = e.paths.at(3);
    return {
        {h_mode(in_a), h_mode(out_a)},
        {v_mode(in_a), v_mode(out_b)},
        {h_mode(in_b), h_mode(out_b)},
        {v_mode(in_b), v_mode(out_a)},
    };
}

FockState apply_element(const Element& e, const FockState& state, const ElementContext& ctx) {
    switch (e.kind) {
        case ElementKind::BeamSplitter: {
            const Matrix2c u = beam_splitter_matrix(e.theta);
            FockState s = apply_two_mode_unitary(state, h_mode(e.paths[0]), h_mode(e.paths[1]), u);
            return apply_two_mode_unitary(s, v_mode(e.paths[0]), v_mode(e.paths[1]), u);
        }
        case ElementKind::PhaseShifter: {
            const double phi = e.knob ? ctx.knob_phase : e.phase;
            return apply_phase(apply_phase(state, h_mode(e.paths[0]), phi), v_mode(e.paths[0]), phi);
        }
        case ElementKind::PockelsCell:
            return apply_eop(state, EopConfig{e.v_half_wave_kv, ctx.eop_armed}, v_mode(e.paths[0]));
        case ElementKind::PolarizingBS: {
            FockState s = state;
            for (const auto& [m1, m2] : polarizing_bs_swaps(e)) s = apply_two_mode_unitary(s, m1, m2, swap_matrix());
            return s;
        }
        case ElementKind::HalfWavePlate:
            return apply_jones(state, e.paths[0], half_wave_jones(e.angle));
        case ElementKind::QuarterWavePlate:
            return apply_jones(state, e.paths[0], quarter_wave_jones(e.angle));
        case ElementKind::DelayLine:
        case ElementKind::Mirror:
            state.index_of(h_mode(e.paths[0]));
            return state;
    }
    return state;
}

double propagation_delay_ns(const Element& e, double ns_per_m) {
    if (e.kind != ElementKind::DelayLine) return 0.0;
    return e.length_m * ns_per_m;
}

std::vector<ModeId> touched_modes(const Element& e) {
    std::vector<ModeId> out;
    switch (e.kind) {
        case ElementKind::PockelsCell:
            out.push_back(v_mode(e.paths[0]));
            break;
        case ElementKind::DelayLine:
        case ElementKind::Mirror:
            break;
        default:
            for (int p : e.paths) {
                out.push_back(h_mode(p));
                out.push_back(v_mode(p));
            }
    }
    return out;
}

}  // namespace telesim
