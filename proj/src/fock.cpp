#include "telesim/fock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

namespace telesim {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateMode: return "DuplicateMode";
        case ErrorCode::EmptyModes: return "EmptyModes";
        case ErrorCode::UnknownMode: return "UnknownMode";
        case ErrorCode::TruncationOverflow: return "TruncationOverflow";
        case ErrorCode::NonUnitary: return "NonUnitary";
        case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
        case ErrorCode::BadParam: return "BadParam";
        case ErrorCode::BadWiring: return "BadWiring";
        case ErrorCode::PolarizationMismatch: return "PolarizationMismatch";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::BadCalibration: return "BadCalibration";
        case ErrorCode::FitUnderdetermined: return "FitUnderdetermined";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::BadBench: return "BadBench";
        case ErrorCode::BadInput: return "BadInput";
    }
    return "Unknown";
}

char to_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

std::string to_string(ModeId mode) {
    return std::to_string(mode.path) + ":" + to_char(mode.polarization);
}

unsigned OccupationVector::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0u);
}

namespace {

// sqrt(n!) for the small photon numbers the truncation allows.
double sqrt_factorial(unsigned n) {
    double f = 1.0;
    for (unsigned k = 2; k <= n; ++k) f *= k;
    return std::sqrt(f);
}

double binomial(unsigned n, unsigned k) {
    double b = 1.0;
    for (unsigned i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

Complex ipow(Complex z, unsigned n) {
    Complex r{1.0, 0.0};
    for (unsigned i = 0; i < n; ++i) r *= z;
    return r;
}

void check_truncation(const OccupationVector& occ, const Truncation& trunc) {
    unsigned total = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] > trunc.max_per_mode) {
            throw Error(ErrorCode::TruncationOverflow,
                        "mode occupation " + std::to_string(occ[i]) + " exceeds N_max=" +
                            std::to_string(trunc.max_per_mode));
        }
        total += occ[i];
    }
    if (total > trunc.max_total) {
        throw Error(ErrorCode::TruncationOverflow,
                    "total photon number " + std::to_string(total) + " exceeds " +
                        std::to_string(trunc.max_total));
    }
}

bool matches(const OccupationVector& occ, const std::vector<std::pair<std::size_t, unsigned>>& constraints) {
    return std::all_of(constraints.begin(), constraints.end(),
                       [&](const auto& c) { return occ[c.first] == c.second; });
}

std::vector<std::pair<std::size_t, unsigned>> resolve(const FockState& state,
                                                      const OccupationPattern& pattern) {
    std::vector<std::pair<std::size_t, unsigned>> out;
    out.reserve(pattern.size());
    for (const auto& [mode, n] : pattern) out.emplace_back(state.index_of(mode), n);
    return out;
}

FockState rescaled(const FockState& state, std::vector<FockState::Entry> entries, double scale) {
    for (auto& e : entries) e.amplitude *= scale;
    return FockState::from_entries(state.shared_modes(), state.truncation(), std::move(entries));
}

}  // namespace

std::size_t FockState::index_of(ModeId mode) const {
    if (modes_) {
        const auto& m = *modes_;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] == mode) return i;
    }
    throw Error(ErrorCode::UnknownMode, "mode " + to_string(mode) + " is not part of the state");
}

bool FockState::has_mode(ModeId mode) const {
    return modes_ && std::find(modes_->begin(), modes_->end(), mode) != modes_->end();
}

Complex FockState::amplitude(const OccupationVector& occupation) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), occupation,
                               [](const Entry& e, const OccupationVector& o) { return e.occupation < o; });
    if (it != entries_.end() && it->occupation == occupation) return it->amplitude;
    return {0.0, 0.0};
}

double FockState::norm_squared() const {
    double s = 0.0;
    for (const auto& e : entries_) s += std::norm(e.amplitude);
    return s;
}

FockState FockState::from_entries(std::shared_ptr<const std::vector<ModeId>> modes, Truncation truncation,
                                  std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.occupation < b.occupation; });
    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (auto& e : entries) {
        if (!merged.empty() && merged.back().occupation == e.occupation) {
            merged.back().amplitude += e.amplitude;
        } else {
            merged.push_back(std::move(e));
        }
    }
    std::erase_if(merged, [](const Entry& e) { return std::abs(e.amplitude) < kPruneEpsilon; });
    for (const auto& e : merged) check_truncation(e.occupation, truncation);

    FockState s;
    s.modes_ = std::move(modes);
    s.truncation_ = truncation;
    s.entries_ = std::move(merged);
    return s;
}

FockState make_vacuum(std::span<const ModeId> modes, Truncation truncation) {
    if (modes.empty()) throw Error(ErrorCode::EmptyModes, "a state needs at least one mode");
    std::set<ModeId> seen;
    for (const auto& m : modes) {
        if (!seen.insert(m).second) throw Error(ErrorCode::DuplicateMode, "mode " + to_string(m) + " repeated");
    }
    auto mode_list = std::make_shared<const std::vector<ModeId>>(modes.begin(), modes.end());
    std::vector<FockState::Entry> entries;
    entries.push_back({OccupationVector(modes.size()), Complex{1.0, 0.0}});
    return FockState::from_entries(std::move(mode_list), truncation, std::move(entries));
}

FockState create_photon(const FockState& state, ModeId mode) {
    const std::size_t idx = state.index_of(mode);
    std::vector<FockState::Entry> out;
    out.reserve(state.entries().size());
    double norm = 0.0;
    for (const auto& e : state.entries()) {
        const unsigned n = e.occupation[idx];
        OccupationVector occ = e.occupation;
        occ.set(idx, n + 1);
        check_truncation(occ, state.truncation());
        const Complex amp = e.amplitude * std::sqrt(static_cast<double>(n + 1));
        norm += std::norm(amp);
        out.push_back({std::move(occ), amp});
    }
    if (norm == 0.0) throw Error(ErrorCode::ImpossibleOutcome, "creation on an empty state");
    return rescaled(state, std::move(out), 1.0 / std::sqrt(norm));
}

bool is_unitary(const Matrix2c& u, double tolerance) {
    const Matrix2c d = u.adjoint() * u - Matrix2c::Identity();
    return d.cwiseAbs().maxCoeff() <= tolerance;
}

FockState apply_two_mode_unitary(const FockState& state, ModeId m1, ModeId m2, const Matrix2c& u) {
    if (!is_unitary(u)) throw Error(ErrorCode::NonUnitary, "two-mode matrix fails u^dagger u = I");
    const std::size_t i1 = state.index_of(m1);
    const std::size_t i2 = state.index_of(m2);
    if (i1 == i2) throw Error(ErrorCode::BadWiring, "two-mode unitary needs two distinct modes");

    // Creation operators map as a_i^dagger -> sum_j conj(u_ij) a_j^dagger.
    const Complex c11 = std::conj(u(0, 0)), c12 = std::conj(u(0, 1));
    const Complex c21 = std::conj(u(1, 0)), c22 = std::conj(u(1, 1));

    std::vector<FockState::Entry> out;
    out.reserve(state.entries().size() * 3);
    for (const auto& e : state.entries()) {
        const unsigned n1 = e.occupation[i1];
        const unsigned n2 = e.occupation[i2];
        if (n1 == 0 && n2 == 0) {
            out.push_back(e);
            continue;
        }
        const double inv_norm = 1.0 / (sqrt_factorial(n1) * sqrt_factorial(n2));
        const unsigned n = n1 + n2;
        // Coefficient of (a1^dagger)^p (a2^dagger)^(n-p), indexed by p.
        std::array<Complex, 16> coeff{};
        if (n >= coeff.size()) throw Error(ErrorCode::TruncationOverflow, "too many photons in two modes");
        for (unsigned k = 0; k <= n1; ++k) {
            const Complex ak = binomial(n1, k) * ipow(c11, k) * ipow(c12, n1 - k);
            for (unsigned l = 0; l <= n2; ++l) {
                coeff[k + l] += ak * binomial(n2, l) * ipow(c21, l) * ipow(c22, n2 - l);
            }
        }
        for (unsigned p = 0; p <= n; ++p) {
            const Complex amp = e.amplitude * coeff[p] * sqrt_factorial(p) * sqrt_factorial(n - p) * inv_norm;
            if (std::abs(amp) < kPruneEpsilon) continue;
            OccupationVector occ = e.occupation;
            occ.set(i1, p);
            occ.set(i2, n - p);
            out.push_back({std::move(occ), amp});
        }
    }
    return FockState::from_entries(state.shared_modes(), state.truncation(), std::move(out));
}

FockState apply_phase(const FockState& state, ModeId mode, double phi) {
    const std::size_t idx = state.index_of(mode);
    std::vector<FockState::Entry> out = state.entries();
    for (auto& e : out) {
        const unsigned n = e.occupation[idx];
        if (n != 0) e.amplitude *= std::polar(1.0, phi * n);
    }
    return FockState::from_entries(state.shared_modes(), state.truncation(), std::move(out));
}

double partial_probability(const FockState& state, const OccupationPattern& pattern) {
    const auto constraints = resolve(state, pattern);
    double p = 0.0;
    for (const auto& e : state.entries()) {
        if (matches(e.occupation, constraints)) p += std::norm(e.amplitude);
    }
    return std::clamp(p, 0.0, 1.0);
}

std::pair<FockState, double> project(const FockState& state, const OccupationPattern& pattern) {
    const auto constraints = resolve(state, pattern);
    std::vector<FockState::Entry> kept;
    double p = 0.0;
    for (const auto& e : state.entries()) {
        if (matches(e.occupation, constraints)) {
            p += std::norm(e.amplitude);
            kept.push_back(e);
        }
    }
    if (kept.empty() || p <= 0.0) throw Error(ErrorCode::ImpossibleOutcome, "projection pattern has zero probability");
    return {rescaled(state, std::move(kept), 1.0 / std::sqrt(p)), p};
}

void QubitSpec::check() const {
    const double n = std::norm(alpha) + std::norm(beta);
    if (std::abs(n - 1.0) > kNormTolerance) throw Error(ErrorCode::BadParam, "qubit amplitudes are not normalized");
}

}  // namespace telesim
