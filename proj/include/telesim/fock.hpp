#pragma once

// Truncated multi-mode Fock space with exact linear-optical evolution.
//
// A FockState is a sparse map from photon-occupation vectors to complex
// amplitudes over a fixed, ordered list of optical modes. All operations are
// pure: they take a state by const reference and return a new one.
//
// Mode-mixing convention: a two-mode element described by the 2x2 matrix u
// acts on annihilation operators as U a_i U^dagger = sum_j u_ij a_j. For the
// real beam splitter u = [[t, -r], [r, t]] a photon entering the first port
// leaves as t|1,0> - r|0,1>.

#include <Eigen/Core>

#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "telesim/error.hpp"

namespace telesim {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;

enum class Polarization : std::uint8_t { H = 0, V = 1 };

char to_char(Polarization p);

struct ModeId {
    int path = 0;
    Polarization polarization = Polarization::H;

    auto operator<=>(const ModeId&) const = default;
    bool operator==(const ModeId&) const = default;
};

std::string to_string(ModeId mode);

struct Truncation {
    unsigned max_per_mode = 2;
    unsigned max_total = 2;

    bool operator==(const Truncation&) const = default;
};

inline constexpr double kPruneEpsilon = 1e-14;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

/// Photon numbers, one per mode, in the owning state's mode order.
class OccupationVector {
public:
    OccupationVector() = default;
    explicit OccupationVector(std::size_t mode_count) : counts_(mode_count, 0) {}
    explicit OccupationVector(std::vector<std::uint8_t> counts) : counts_(std::move(counts)) {}

    std::size_t size() const { return counts_.size(); }
    unsigned operator[](std::size_t i) const { return counts_[i]; }
    void set(std::size_t i, unsigned n) { counts_[i] = static_cast<std::uint8_t>(n); }
    unsigned total() const;
    const std::vector<std::uint8_t>& counts() const { return counts_; }

    auto operator<=>(const OccupationVector&) const = default;
    bool operator==(const OccupationVector&) const = default;

private:
    std::vector<std::uint8_t> counts_;
};

using OccupationPattern = std::map<ModeId, unsigned>;

class FockState {
public:
    struct Entry {
        OccupationVector occupation;
        Complex amplitude;
    };

    FockState() = default;

    const std::vector<ModeId>& modes() const { return *modes_; }
    std::size_t mode_count() const { return modes_ ? modes_->size() : 0; }
    const Truncation& truncation() const { return truncation_; }

    /// Position of `mode` in the canonical order; throws UnknownMode.
    std::size_t index_of(ModeId mode) const;
    bool has_mode(ModeId mode) const;

    /// Entries sorted by occupation vector; no entry has |amplitude| < prune epsilon.
    const std::vector<Entry>& entries() const { return entries_; }
    Complex amplitude(const OccupationVector& occupation) const;
    double norm_squared() const;

    /// Builds a state from raw entries, merging duplicates and pruning.
    static FockState from_entries(std::shared_ptr<const std::vector<ModeId>> modes,
                                  Truncation truncation, std::vector<Entry> entries);

    std::shared_ptr<const std::vector<ModeId>> shared_modes() const { return modes_; }

private:
    std::shared_ptr<const std::vector<ModeId>> modes_;
    Truncation truncation_;
    std::vector<Entry> entries_;
};

FockState make_vacuum(std::span<const ModeId> modes, Truncation truncation = {});

/// Bosonic creation followed by renormalization.
FockState create_photon(const FockState& state, ModeId mode);

FockState apply_two_mode_unitary(const FockState& state, ModeId m1, ModeId m2, const Matrix2c& u);

/// Multiplies every basis entry by exp(i * phi * n_mode).
FockState apply_phase(const FockState& state, ModeId mode, double phi);

/// Total weight of basis entries matching `pattern` on the constrained modes.
double partial_probability(const FockState& state, const OccupationPattern& pattern);

/// Collapses onto the entries matching `pattern`; returns the renormalized
/// state and the pre-collapse probability.
std::pair<FockState, double> project(const FockState& state, const OccupationPattern& pattern);

bool is_unitary(const Matrix2c& u, double tolerance = kUnitaryTolerance);

struct QubitSpec {
    Complex alpha;
    Complex beta;

    /// Throws BadParam unless |alpha|^2 + |beta|^2 = 1 within 1e-12.
    void check() const;
};

}  // namespace telesim
