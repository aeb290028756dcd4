#pragma once

#include <string_view>
#include <vector>

#include "telesim/fock.hpp"

namespace telesim {

enum class ElementKind {
    BeamSplitter,
    PhaseShifter,
    PockelsCell,
    PolarizingBS,
    HalfWavePlate,
    QuarterWavePlate,
    DelayLine,
    Mirror,
};

std::string_view to_string(ElementKind kind);

/// Effective delay-line calibration: 8 m of folded line <-> 24 ns.
inline constexpr double kDefaultNsPerMeter = 3.0;
/// Half-wave voltage of the Pockels cell (metadata only).
inline constexpr double kDefaultHalfWaveKilovolts = 1.4;

/// One optical component wired to spatial paths. Paths are indices into the
/// owning bench's path table; each path carries an H and a V mode.
struct Element {
    ElementKind kind = ElementKind::Mirror;
    std::vector<int> paths;
    double theta = 0.0;     // BeamSplitter
    double phase = 0.0;     // PhaseShifter (ignored for the knob)
    bool knob = false;      // PhaseShifter swept as phi
    double angle = 0.0;     // wave plates, fast-axis angle
    double length_m = 0.0;  // DelayLine
    double v_half_wave_kv = kDefaultHalfWaveKilovolts;  // PockelsCell

    bool operator==(const Element&) const = default;
};

struct EopConfig {
    double v_half_wave_kv = kDefaultHalfWaveKilovolts;
    bool armed = false;
};

/// Runtime inputs an element may depend on.
struct ElementContext {
    double knob_phase = 0.0;
    bool eop_armed = false;
};

Element beam_splitter(int path_a, int path_b, double theta);
Element phase_shifter(int path, double phase);
Element phase_knob(int path);
Element pockels_cell(int path, double v_half_wave_kv = kDefaultHalfWaveKilovolts);
Element polarizing_bs(int in_a, int in_b, int out_a, int out_b);
Element quarter_wave_plate(int path, double angle);
Element half_wave_plate(int path, double angle);
Element delay_line(int path, double length_m);
Element mirror(int path);

/// [[cos t, -sin t], [sin t, cos t]] in the operator convention of fock.hpp.
Matrix2c beam_splitter_matrix(double theta);

/// Jones matrices acting on (H, V) single-photon amplitudes, fast axis at `angle`.
Matrix2c quarter_wave_jones(double angle);
Matrix2c half_wave_jones(double angle);

/// sigma_z on the vacuum/one-photon qubit of a V mode when armed; identity otherwise.
FockState apply_eop(const FockState& state, const EopConfig& config, ModeId mode_v);

FockState apply_element(const Element& element, const FockState& state, const ElementContext& ctx = {});

/// The (H, V) mode pairs a polarizing splitter exchanges, in application order.
/// H transmits inA->outA and inB->outB; V reflects inA->outB and inB->outA.
std::vector<std::pair<ModeId, ModeId>> polarizing_bs_swaps(const Element& element);

double propagation_delay_ns(const Element& element, double ns_per_m = kDefaultNsPerMeter);

/// Modes the element acts on non-trivially.
std::vector<ModeId> touched_modes(const Element& element);

}  // namespace telesim
