#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace telesim {

/// Alice detector x Bob verification detector.
enum class CoincidencePair { D1_D1s = 0, D1_D2s = 1, D2_D1s = 2, D2_D2s = 3 };

inline constexpr std::array<CoincidencePair, 4> kAllPairs = {
    CoincidencePair::D1_D1s, CoincidencePair::D1_D2s, CoincidencePair::D2_D1s, CoincidencePair::D2_D2s};

std::string_view to_string(CoincidencePair pair);  // "D1-D1*" ...
CoincidencePair parse_pair(std::string_view text);  // throws BadParam

/// Per-phase coincidence counts for the four detector pairs.
struct FringeData {
    std::vector<double> phi;
    std::array<std::vector<std::uint64_t>, 4> counts;
    std::vector<std::uint64_t> trials_kept;
    std::vector<std::uint64_t> trials_total;

    static FringeData zeros(std::vector<double> phi_grid);
    std::size_t size() const { return phi.size(); }
    const std::vector<std::uint64_t>& pair_counts(CoincidencePair p) const { return counts[static_cast<int>(p)]; }
    std::vector<std::uint64_t>& pair_counts(CoincidencePair p) { return counts[static_cast<int>(p)]; }

    /// Adds counts of another run on the same grid (order independent).
    void merge(const FringeData& other);
    /// Throws GridMismatch / BadInput on misaligned grids or counts above trials_kept.
    void check() const;

    bool operator==(const FringeData&) const = default;
};

/// "phi_rad,pair,coincidences,trials_kept,trials_total"
void write_fringe_csv(std::ostream& out, const FringeData& data);
FringeData read_fringe_csv(std::istream& in);

/// One fringe: counts and the number of post-selected trials at each phase.
struct FringeSeries {
    std::vector<double> phi;
    std::vector<double> counts;
    std::vector<double> trials;
};

FringeSeries series(const FringeData& data, CoincidencePair pair);
/// Sum of several pairs' counts over the same post-selected trials.
FringeSeries combined_series(const FringeData& data, std::span<const CoincidencePair> pairs);

/// rate(phi) = A (1 + V cos(phi - phi0)).
struct FitResult {
    double amplitude = 0.0;
    double visibility = 0.0;  // clamped to [0, 1]
    double phase_offset = 0.0;  // (-pi, pi]
    double amplitude_err = 0.0;
    double visibility_err = 0.0;
    double phase_err = 0.0;
    double visibility_unclamped = 0.0;
    bool phase_constrained = true;  // false when the fringe is consistent with V = 0
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Weighted linear least squares in (A, A V cos phi0, A V sin phi0) with
/// binomial weights 1 / max(c (1 - c / n), 1).
FitResult fit_fringe(const FringeSeries& data);

double fidelity_from_visibility(double v);
double visibility_from_fidelity(double f);

/// sigma_F = sigma_V / 2.
double error_propagation(const FitResult& fit);

/// Best average fidelity reachable by measure-and-prepare on an unknown pure qubit.
inline constexpr double kClassicalFidelityBound = 2.0 / 3.0;

/// Strictly above the classical bound.
bool classical_bound_check(double fidelity, double bound = kClassicalFidelityBound);

double wrap_phase(double phi);  // into (-pi, pi]

struct FringeComparison {
    double delta_phase = 0.0;  // wrapped phi0_a - phi0_b
    double delta_phase_err = 0.0;
    double delta_visibility = 0.0;
    double delta_visibility_err = 0.0;
    bool in_phase = false;   // |delta_phase| < tolerance
    bool pi_offset = false;  // ||delta_phase| - pi| < tolerance
};

FringeComparison compare_fits(const FitResult& a, const FitResult& b, double tolerance);

/// Throws GridMismatch unless both runs share the phase grid.
void require_aligned(const FringeData& a, const FringeData& b);

}  // namespace telesim
