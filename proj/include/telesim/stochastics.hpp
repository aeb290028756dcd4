#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "telesim/fock.hpp"

namespace telesim {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for (seed, stream id).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Detector quantum efficiency quoted for the avalanche photodiodes.
inline constexpr double kDefaultQuantumEfficiency = 0.45;

struct NoiseModel {
    double qe = 1.0;
    /// Gaussian phase noise (rad) on the nonlocal channel from the delay line.
    double dephasing_sigma = 0.0;
    /// Gaussian phase noise (rad) present in every configuration, delay line or not.
    double baseline_sigma = 0.0;
    double dark_count_prob = 0.0;

    void check() const;
};

struct Click {
    std::string detector;
    bool clicked = false;
    std::optional<double> timestamp_ns;  // set iff clicked
};

class ClickPattern {
public:
    void add(Click c) { clicks_.push_back(std::move(c)); }
    bool clicked(std::string_view detector) const;
    std::optional<double> timestamp(std::string_view detector) const;
    unsigned click_count() const;
    const std::vector<Click>& clicks() const { return clicks_; }

private:
    std::vector<Click> clicks_;
};

/// Photon number arriving at one detector in a trial.
struct DetectorPhotons {
    std::string detector;
    unsigned photons = 0;
    double arrival_ns = 0.0;
};

/// Born-rule draw of one basis entry. Throws NotNormalized if the norm is off by more than 1e-9.
OccupationVector sample_occupations(const FockState& state, Rng& rng);

/// Each photon registers independently with probability qe; a dark count can
/// fire any detector. Non-number-resolving: click = at least one registration.
ClickPattern thin_by_efficiency(std::span<const DetectorPhotons> ideal, double qe, double dark_count_prob, Rng& rng);

/// One N(0, sigma^2) draw; 0 without consuming randomness when sigma = 0.
double draw_channel_phase(double sigma, Rng& rng);

/// Applies a random phase from draw_channel_phase to `channel_mode`.
FockState apply_channel_dephasing(const FockState& state, ModeId channel_mode, double sigma, Rng& rng);

/// Phase-noise width that reduces visibility v_in to v_out: sqrt(2 ln(v_in / v_out)).
double calibrate_sigma(double v_in, double v_out);

/// Ensemble visibility factor exp(-sigma^2 / 2) of Gaussian phase noise.
double visibility_factor(double sigma);

}  // namespace telesim
