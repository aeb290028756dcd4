#pragma once

// Teleportation trials on a compiled bench: passive, active (feed-forward
// sigma_z) and active with the Pockels cell inhibited.
//
// A bench is runnable when it has detectors named D1, D2 (Alice) and D1*, D2*
// (Bob), exactly one Pockels cell, and no element after the cell touches
// Alice's detector modes.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "telesim/analysis.hpp"
#include "telesim/bench.hpp"
#include "telesim/stochastics.hpp"
#include "telesim/timing.hpp"

namespace telesim {

enum class BellOutcome { Psi1Idle, Psi2Idle, Psi3, Psi4 };

std::string_view to_string(BellOutcome b);

enum class RunMode { Passive, Active, ActiveInhibited };

std::string_view to_string(RunMode m);   // passive | active | active-inhibited
RunMode parse_run_mode(std::string_view text);  // throws BadParam

/// Wavelength of the down-converted photons.
inline constexpr double kWavelengthM = 727.6e-9;

struct RunConfig {
    RunMode mode = RunMode::Active;
    std::size_t trials_per_phi = 1000;
    std::vector<double> phi_grid;
    /// Overrides the input splitter BS_S (the first splitter on the knob path).
    std::optional<double> input_theta;
    NoiseModel noise;
    TimingModel timing;
    /// Overrides the total delay-line length in front of the Pockels cell.
    std::optional<double> delay_length_m;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    void check() const;
};

/// Inclusive grid of `steps` points over [0, 2 pi].
std::vector<double> default_phi_grid(std::size_t steps = 25);

/// Alice-only classification: D1 alone -> Psi3, D2 alone -> Psi4, none ->
/// Psi1 (idle), both -> Psi2 (idle).
BellOutcome classify(const ClickPattern& alice);

/// Coincidence-circuit classification. Refines `classify` with Bob's clicks: a
/// single Alice click with no single Bob click is a Psi2 event (both photons
/// went to Alice and bunched in one detector).
BellOutcome classify_coincidence(const ClickPattern& alice, const ClickPattern& bob);

inline bool is_idle(BellOutcome b) { return b == BellOutcome::Psi1Idle || b == BellOutcome::Psi2Idle; }

struct TrialRecord {
    double phi = 0.0;
    double channel_phase = 0.0;  // dephasing draw on the nonlocal channel
    BellOutcome bell = BellOutcome::Psi1Idle;
    ClickPattern alice_clicks;
    ClickPattern bob_clicks;
    bool armed_in_time = false;
    bool corrected = false;  // sigma_z applied on a kept Psi4 trial
    bool discarded = true;
    EventLog log;
    /// Bob's (post-Alice-measurement) state right before the photons are counted.
    std::optional<FockState> bob_state;
};

/// Post-selected probabilities, ordered ((D1,D2*), (D1,D1*), (D2,D2*), (D2,D1*)).
struct PairProbabilities {
    double d1_d2s = 0.0;
    double d1_d1s = 0.0;
    double d2_d2s = 0.0;
    double d2_d1s = 0.0;

    double get(CoincidencePair p) const;
    double sum() const { return d1_d2s + d1_d1s + d2_d2s + d2_d1s; }
};

/// Layout of a runnable bench, resolved once.
class ProtocolEngine {
public:
    explicit ProtocolEngine(Bench bench, std::optional<double> input_theta = std::nullopt);

    const Bench& bench() const { return bench_; }
    ModeId eop_mode() const { return eop_mode_; }
    double bench_delay_length_m() const { return delay_length_m_; }
    std::array<ModeId, 2> alice_modes() const { return {d1_, d2_}; }
    std::array<ModeId, 2> bob_modes() const { return {d1s_, d2s_}; }

    /// Sources plus every element in front of the Pockels cell, knob at phi.
    FockState prepare(double phi) const;
    /// Pockels cell (armed or not) and every element after it.
    FockState finish(const FockState& state, bool eop_armed) const;
    /// Whole pipeline without measurement.
    FockState propagate(double phi, bool eop_armed) const;

    /// One Monte Carlo shot starting from `prepare(phi)`.
    TrialRecord trial(const FockState& prepared, double phi, const RunConfig& cfg, Rng& rng,
                      bool keep_details = true) const;

    /// Exact post-selected pair probabilities; with `correct` set, D2 outcomes
    /// pass an armed Pockels cell.
    PairProbabilities analytic(double phi, bool correct = false) const;
    /// Probability that exactly one Alice detector and one Bob detector see a photon.
    double analytic_coincidence_fraction(double phi) const;

private:
    Bench bench_;
    std::size_t eop_index_ = 0;
    ModeId eop_mode_;
    ModeId d1_, d2_, d1s_, d2s_;
    double delay_length_m_ = 0.0;
};

TrialRecord run_trial(const Bench& bench, double phi, const RunConfig& cfg, Rng& rng);

/// Trials per phase point are cut into fixed blocks, each with its own
/// (seed, phase index, block) stream, so the result is identical for any worker count.
FringeData run_sweep(const Bench& bench, const RunConfig& cfg);

/// Event logs of the first `count` trials at the first grid point.
std::vector<EventLog> sample_event_logs(const Bench& bench, const RunConfig& cfg, std::size_t count);

/// Passive closed form evaluated by full Fock propagation.
PairProbabilities analytic_coincidences(const Bench& bench, double phi);

/// phi = pi x 2^{3/2} / lambda for the piezo mirror displacement x.
double phase_from_position(double x_m, double lambda_m);
double position_from_phase(double phi, double lambda_m);

/// BS_S angle and knob phase that prepare alpha|0> + beta|1> on the input mode
/// (up to a global phase).
struct InputPreparation {
    double theta = 0.0;
    double phi = 0.0;
};

InputPreparation preparation_for(const QubitSpec& qubit);

}  // namespace telesim
