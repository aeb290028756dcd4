#include "telesim/stochastics.hpp"

#include <algorithm>
#include <cmath>

namespace telesim {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x7e1e9047u};
    return Rng(seq);
}

void NoiseModel::check() const {
    if (!(qe >= 0.0 && qe <= 1.0)) throw Error(ErrorCode::BadParam, "qe must lie in [0, 1]");
    if (!(dephasing_sigma >= 0.0) || !(baseline_sigma >= 0.0)) {
        throw Error(ErrorCode::BadParam, "dephasing sigma must be non-negative");
    }
    if (!(dark_count_prob >= 0.0 && dark_count_prob < 1.0)) {
        throw Error(ErrorCode::BadParam, "dark-count probability must lie in [0, 1)");
    }
}

bool ClickPattern::clicked(std::string_view detector) const {
    return std::any_of(clicks_.begin(), clicks_.end(),
                       [&](const Click& c) { return c.detector == detector && c.clicked; });
}

std::optional<double> ClickPattern::timestamp(std::string_view detector) const {
    for (const auto& c : clicks_)
        if (c.detector == detector) return c.timestamp_ns;
    return std::nullopt;
}

unsigned ClickPattern::click_count() const {
    return static_cast<unsigned>(std::count_if(clicks_.begin(), clicks_.end(), [](const Click& c) { return c.clicked; }));
}

OccupationVector sample_occupations(const FockState& state, Rng& rng) {
    const double norm = state.norm_squared();
    if (std::abs(norm - 1.0) > 1e-9) throw Error(ErrorCode::NotNormalized, "cannot sample an unnormalized state");
    const auto& entries = state.entries();
    std::uniform_real_distribution<double> uniform(0.0, norm);
    const double u = uniform(rng);
    double acc = 0.0;
    for (const auto& e : entries) {
        acc += std::norm(e.amplitude);
        if (u < acc) return e.occupation;
    }
    return entries.back().occupation;
}

ClickPattern thin_by_efficiency(std::span<const DetectorPhotons> ideal, double qe, double dark_count_prob, Rng& rng) {
    if (!(qe >= 0.0 && qe <= 1.0)) throw Error(ErrorCode::BadParam, "qe must lie in [0, 1]");
    std::bernoulli_distribution detect(qe);
    std::bernoulli_distribution dark(dark_count_prob);
    ClickPattern out;
    for (const auto& d : ideal) {
        bool click = false;
        for (unsigned k = 0; k < d.photons; ++k) click = detect(rng) || click;
        if (dark_count_prob > 0.0) click = dark(rng) || click;
        out.add({d.detector, click, click ? std::optional<double>(d.arrival_ns) : std::nullopt});
    }
    return out;
}

double draw_channel_phase(double sigma, Rng& rng) {
    if (!(sigma >= 0.0)) throw Error(ErrorCode::BadParam, "sigma must be non-negative");
    if (sigma == 0.0) return 0.0;
    std::normal_distribution<double> noise(0.0, sigma);
    return noise(rng);
}

FockState apply_channel_dephasing(const FockState& state, ModeId channel_mode, double sigma, Rng& rng) {
    const double theta = draw_channel_phase(sigma, rng);
    if (theta == 0.0) {
        state.index_of(channel_mode);
        return state;
    }
    return apply_phase(state, channel_mode, theta);
}

double calibrate_sigma(double v_in, double v_out) {
    if (!(v_in > 0.0 && v_in <= 1.0)) throw Error(ErrorCode::BadCalibration, "input visibility must lie in (0, 1]");
    if (!(v_out > 0.0)) throw Error(ErrorCode::BadCalibration, "phase noise cannot reach zero visibility");
    if (v_out > v_in) throw Error(ErrorCode::BadCalibration, "phase noise cannot raise the visibility");
    return std::sqrt(2.0 * std::log(v_in / v_out));
}

double visibility_factor(double sigma) { return std::exp(-0.5 * sigma * sigma); }

}  // namespace telesim
