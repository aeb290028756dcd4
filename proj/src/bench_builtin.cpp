#include <numbers>

#include "telesim/bench.hpp"

namespace telesim {

// Two V photons from the pair source enter paths a and s. BS prepares the
// singlet over (a, b); BS_S splits s into the input mode and the ancilla; the
// piezo phase on s is the swept knob; BS_A mixes s and a for the Bell
// measurement (D1 on a, D2 on s). Bob's mode b and the H-rotated ancilla share
// the delay-line path through the Pockels cell and are mixed by qwp + PBS_B.
Bench builtin_figure1() {
    constexpr double kQuarterPi = std::numbers::pi / 4;
    BenchBuilder b;
    const int a = b.add_path("a");
    const int bob_in = b.add_path("b");
    const int s = b.add_path("s");
    const int anc = b.add_path("anc");
    const int line = b.add_path("bob");
    const int inj = b.add_path("inj");
    const int spare = b.add_path("spare");
    const int b1 = b.add_path("b1");
    const int b2 = b.add_path("b2");

    b.add_source(a, Polarization::V);
    b.add_source(s, Polarization::V);

    b.add_element(beam_splitter(a, bob_in, kQuarterPi));
    b.add_element(beam_splitter(s, anc, kQuarterPi));
    b.add_element(phase_knob(s));
    b.add_element(beam_splitter(s, a, kQuarterPi));
    b.add_element(half_wave_plate(anc, kQuarterPi));
    // Cancels the quarter-wave plate's i so the verification fringes peak at phi = 0.
    b.add_element(phase_shifter(anc, -std::numbers::pi / 2));
    b.add_element(polarizing_bs(anc, bob_in, line, inj));
    b.add_element(delay_line(line, 8.0));
    b.add_element(pockels_cell(line));
    b.add_element(quarter_wave_plate(line, kQuarterPi));
    b.add_element(polarizing_bs(line, spare, b1, b2));

    b.add_detector("D1", a, Polarization::V);
    b.add_detector("D2", s, Polarization::V);
    b.add_detector("D1*", b1, Polarization::H);
    b.add_detector("D2*", b2, Polarization::V);
    return std::move(b).build();
}

}  // namespace telesim
