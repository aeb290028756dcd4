#include "telesim/protocol.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace telesim {

std::string_view to_string(BellOutcome b) {
    switch (b) {
        case BellOutcome::Psi1Idle: return "Psi1_idle";
        case BellOutcome::Psi2Idle: return "Psi2_idle";
        case BellOutcome::Psi3: return "Psi3";
        case BellOutcome::Psi4: return "Psi4";
    }
    return "?";
}

std::string_view to_string(RunMode m) {
    switch (m) {
        case RunMode::Passive: return "passive";
        case RunMode::Active: return "active";
        case RunMode::ActiveInhibited: return "active-inhibited";
    }
    return "?";
}

RunMode parse_run_mode(std::string_view text) {
    if (text == "passive") return RunMode::Passive;
    if (text == "active") return RunMode::Active;
    if (text == "active-inhibited" || text == "active_eop_inhibited") return RunMode::ActiveInhibited;
    throw Error(ErrorCode::BadParam, fmt::format("unknown mode '{}'", text));
}

void RunConfig::check() const {
    if (trials_per_phi < 1) throw Error(ErrorCode::BadParam, "trials_per_phi must be at least 1");
    if (phi_grid.empty()) throw Error(ErrorCode::BadParam, "phi grid must not be empty");
    if (workers < 1) throw Error(ErrorCode::BadParam, "workers must be at least 1");
    if (delay_length_m && !(*delay_length_m >= 0.0)) throw Error(ErrorCode::BadParam, "delay length must be >= 0");
    noise.check();
    timing.check();
}

std::vector<double> default_phi_grid(std::size_t steps) {
    if (steps < 1) throw Error(ErrorCode::BadParam, "phi grid needs at least one point");
    std::vector<double> grid(steps, 0.0);
    if (steps == 1) return grid;
    for (std::size_t k = 0; k < steps; ++k) {
        grid[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
    return grid;
}

BellOutcome classify(const ClickPattern& alice) {
    const bool d1 = alice.clicked("D1");
    const bool d2 = alice.clicked("D2");
    if (d1 && d2) return BellOutcome::Psi2Idle;
    if (d1) return BellOutcome::Psi3;
    if (d2) return BellOutcome::Psi4;
    return BellOutcome::Psi1Idle;
}

BellOutcome classify_coincidence(const ClickPattern& alice, const ClickPattern& bob) {
    const BellOutcome a = classify(alice);
    if (is_idle(a)) return a;
    const bool b1 = bob.clicked("D1*");
    const bool b2 = bob.clicked("D2*");
    return b1 != b2 ? a : BellOutcome::Psi2Idle;
}

double PairProbabilities::get(CoincidencePair p) const {
    switch (p) {
        case CoincidencePair::D1_D1s: return d1_d1s;
        case CoincidencePair::D1_D2s: return d1_d2s;
        case CoincidencePair::D2_D1s: return d2_d1s;
        case CoincidencePair::D2_D2s: return d2_d2s;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

namespace {

ModeId detector_mode(const Bench& bench, std::string_view name) {
    const Detector* d = bench.find_detector(name);
    if (!d) throw Error(ErrorCode::BadBench, fmt::format("protocol needs a detector named '{}'", name));
    return d->mode;
}

}  // namespace

ProtocolEngine::ProtocolEngine(Bench bench, std::optional<double> input_theta) : bench_(std::move(bench)) {
    const auto diags = validate(bench_);
    if (has_errors(diags)) {
        auto first = std::find_if(diags.begin(), diags.end(), [](const auto& d) { return d.severity == Severity::Error; });
        throw Error(ErrorCode::BadBench, format(*first));
    }
    d1_ = detector_mode(bench_, "D1");
    d2_ = detector_mode(bench_, "D2");
    d1s_ = detector_mode(bench_, "D1*");
    d2s_ = detector_mode(bench_, "D2*");

    std::vector<std::size_t> eops;
    for (std::size_t i = 0; i < bench_.pipeline.size(); ++i)
        if (bench_.pipeline[i].kind == ElementKind::PockelsCell) eops.push_back(i);
    if (eops.size() != 1) throw Error(ErrorCode::BadBench, "protocol needs exactly one Pockels cell");
    eop_index_ = eops.front();
    eop_mode_ = {bench_.pipeline[eop_index_].paths[0], Polarization::V};

    const std::size_t knob = bench_.knob_indices().front();
    if (knob > eop_index_) throw Error(ErrorCode::BadBench, "the phase knob must precede the Pockels cell");

    for (std::size_t i = eop_index_ + 1; i < bench_.pipeline.size(); ++i) {
        for (const auto& m : touched_modes(bench_.pipeline[i])) {
            if (m == d1_ || m == d2_) {
                throw Error(ErrorCode::BadBench, "elements after the Pockels cell must not touch Alice's detectors");
            }
        }
    }

    for (std::size_t i = 0; i < eop_index_; ++i) {
        const auto& e = bench_.pipeline[i];
        if (e.kind == ElementKind::DelayLine && e.paths[0] == eop_mode_.path) delay_length_m_ += e.length_m;
    }

    if (input_theta) {
        const int knob_path = bench_.pipeline[knob].paths[0];
        auto it = std::find_if(bench_.pipeline.begin(), bench_.pipeline.end(), [&](const Element& e) {
            return e.kind == ElementKind::BeamSplitter &&
                   std::find(e.paths.begin(), e.paths.end(), knob_path) != e.paths.end();
        });
        if (it == bench_.pipeline.end()) throw Error(ErrorCode::BadBench, "no input splitter on the knob path");
        *it = beam_splitter(it->paths[0], it->paths[1], *input_theta);
    }
}

FockState ProtocolEngine::prepare(double phi) const {
    FockState s = make_vacuum(bench_.modes, bench_.truncation);
    for (const auto& src : bench_.sources) s = create_photon(s, src.mode);
    const ElementContext ctx{phi, false};
    for (std::size_t i = 0; i < eop_index_; ++i) s = apply_element(bench_.pipeline[i], s, ctx);
    return s;
}

FockState ProtocolEngine::finish(const FockState& state, bool eop_armed) const {
    const ElementContext ctx{0.0, eop_armed};
    FockState s = apply_element(bench_.pipeline[eop_index_], state, ctx);
    for (std::size_t i = eop_index_ + 1; i < bench_.pipeline.size(); ++i) s = apply_element(bench_.pipeline[i], s, ctx);
    return s;
}

FockState ProtocolEngine::propagate(double phi, bool eop_armed) const { return finish(prepare(phi), eop_armed); }

TrialRecord ProtocolEngine::trial(const FockState& prepared, double phi, const RunConfig& cfg, Rng& rng,
                                  bool keep_details) const {
    TrialRecord rec;
    rec.phi = phi;

    const bool has_delay_line = cfg.mode != RunMode::Passive;
    const double sigma2 = cfg.noise.baseline_sigma * cfg.noise.baseline_sigma +
                          (has_delay_line ? cfg.noise.dephasing_sigma * cfg.noise.dephasing_sigma : 0.0);
    rec.channel_phase = draw_channel_phase(std::sqrt(sigma2), rng);
    FockState state = rec.channel_phase == 0.0 ? prepared : apply_phase(prepared, eop_mode_, rec.channel_phase);

    // Alice's Bell measurement.
    const OccupationVector occ = sample_occupations(state, rng);
    const unsigned n1 = occ[state.index_of(d1_)];
    const unsigned n2 = occ[state.index_of(d2_)];
    state = project(state, OccupationPattern{{d1_, n1}, {d2_, n2}}).first;
    const DetectorPhotons alice_photons[] = {{"D1", n1, 0.0}, {"D2", n2, 0.0}};
    rec.alice_clicks = thin_by_efficiency(alice_photons, cfg.noise.qe, cfg.noise.dark_count_prob, rng);

    const BellOutcome alice_only = classify(rec.alice_clicks);
    const AliceTrigger trigger = alice_only == BellOutcome::Psi3   ? AliceTrigger::D1
                                 : alice_only == BellOutcome::Psi4 ? AliceTrigger::D2
                                                                   : AliceTrigger::None;

    const double delay_m = cfg.delay_length_m.value_or(delay_length_m_);
    const double photon_at_eop = delay_m * cfg.timing.delay_ns_per_m;
    if (cfg.mode == RunMode::Active && trigger != AliceTrigger::None) {
        RaceResult r = race(0.0, cfg.timing, delay_m, rng);
        rec.armed_in_time = r.armed_in_time;
        if (keep_details) rec.log = std::move(r.log);
    } else if (keep_details) {
        rec.log.add(0.0, EventKind::PhotonEmitted);
        if (trigger != AliceTrigger::None) rec.log.add(0.0, EventKind::AliceClick);
        if (has_delay_line) rec.log.add(photon_at_eop, EventKind::PhotonAtEop, fmt::format("delay_m={}", delay_m));
    }
    rec.corrected = cfg.mode == RunMode::Active && effective_correction(trigger, rec.armed_in_time);
    if (keep_details && cfg.mode == RunMode::Active && trigger == AliceTrigger::D2) {
        rec.log.add(photon_at_eop, rec.corrected ? EventKind::EopApplied : EventKind::EopMissed);
    }

    // Bob's verification.
    state = finish(state, rec.corrected);
    const OccupationVector bob_occ = sample_occupations(state, rng);
    const double bob_time = has_delay_line ? photon_at_eop : 0.0;
    const DetectorPhotons bob_photons[] = {{"D1*", bob_occ[state.index_of(d1s_)], bob_time},
                                           {"D2*", bob_occ[state.index_of(d2s_)], bob_time}};
    rec.bob_clicks = thin_by_efficiency(bob_photons, cfg.noise.qe, cfg.noise.dark_count_prob, rng);

    rec.bell = classify_coincidence(rec.alice_clicks, rec.bob_clicks);
    rec.discarded = is_idle(rec.bell);
    // The cell may have fired on a trial the coincidence logic then drops.
    rec.corrected = rec.corrected && rec.bell == BellOutcome::Psi4;
    if (keep_details) rec.bob_state = std::move(state);
    return rec;
}

PairProbabilities ProtocolEngine::analytic(double phi, bool correct) const {
    const FockState pre = prepare(phi);
    std::array<double, 4> joint{};  // indexed by CoincidencePair
    for (int alice = 0; alice < 2; ++alice) {
        const OccupationPattern pattern{{d1_, alice == 0 ? 1u : 0u}, {d2_, alice == 1 ? 1u : 0u}};
        const double pa = partial_probability(pre, pattern);
        if (pa <= 0.0) continue;
        const FockState bob = finish(project(pre, pattern).first, correct && alice == 1);
        const double p1 = partial_probability(bob, {{d1s_, 1}, {d2s_, 0}});
        const double p2 = partial_probability(bob, {{d1s_, 0}, {d2s_, 1}});
        joint[alice == 0 ? 0 : 2] = pa * p1;
        joint[alice == 0 ? 1 : 3] = pa * p2;
    }
    const double total = joint[0] + joint[1] + joint[2] + joint[3];
    if (total <= 0.0) throw Error(ErrorCode::ImpossibleOutcome, "bench produces no coincidences");
    PairProbabilities p;
    p.d1_d1s = joint[0] / total;
    p.d1_d2s = joint[1] / total;
    p.d2_d1s = joint[2] / total;
    p.d2_d2s = joint[3] / total;
    return p;
}

double ProtocolEngine::analytic_coincidence_fraction(double phi) const {
    const FockState out = propagate(phi, false);
    double total = 0.0;
    for (const auto& [a1, a2] : {std::pair{1u, 0u}, std::pair{0u, 1u}}) {
        for (const auto& [b1, b2] : {std::pair{1u, 0u}, std::pair{0u, 1u}}) {
            total += partial_probability(out, {{d1_, a1}, {d2_, a2}, {d1s_, b1}, {d2s_, b2}});
        }
    }
    return total;
}

TrialRecord run_trial(const Bench& bench, double phi, const RunConfig& cfg, Rng& rng) {
    cfg.check();
    const ProtocolEngine engine(bench, cfg.input_theta);
    return engine.trial(engine.prepare(phi), phi, cfg, rng);
}

namespace {

constexpr std::size_t kBlockTrials = 1024;

struct BlockTally {
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t kept = 0;
    std::uint64_t total = 0;
};

std::optional<CoincidencePair> pair_of(const TrialRecord& rec) {
    if (rec.discarded) return std::nullopt;
    const bool b1 = rec.bob_clicks.clicked("D1*");
    if (rec.bell == BellOutcome::Psi3) return b1 ? CoincidencePair::D1_D1s : CoincidencePair::D1_D2s;
    return b1 ? CoincidencePair::D2_D1s : CoincidencePair::D2_D2s;
}

}  // namespace

FringeData run_sweep(const Bench& bench, const RunConfig& cfg) {
    cfg.check();
    const ProtocolEngine engine(bench, cfg.input_theta);

    std::vector<FockState> prepared;
    prepared.reserve(cfg.phi_grid.size());
    for (double phi : cfg.phi_grid) prepared.push_back(engine.prepare(phi));

    const std::size_t blocks_per_phi = (cfg.trials_per_phi + kBlockTrials - 1) / kBlockTrials;
    const std::size_t task_count = blocks_per_phi * cfg.phi_grid.size();
    std::vector<BlockTally> tallies(task_count);

    auto run_task = [&](std::size_t task) {
        const std::size_t phi_idx = task / blocks_per_phi;
        const std::size_t block = task % blocks_per_phi;
        const std::size_t begin = block * kBlockTrials;
        const std::size_t end = std::min(cfg.trials_per_phi, begin + kBlockTrials);
        Rng rng = make_rng(cfg.seed, (static_cast<std::uint64_t>(phi_idx) << 32) | block);
        BlockTally& t = tallies[task];
        for (std::size_t k = begin; k < end; ++k) {
            const TrialRecord rec = engine.trial(prepared[phi_idx], cfg.phi_grid[phi_idx], cfg, rng, false);
            ++t.total;
            if (auto p = pair_of(rec)) {
                ++t.kept;
                ++t.counts[static_cast<int>(*p)];
            }
        }
    };

    const unsigned workers = std::min<std::size_t>(cfg.workers, task_count);
    if (workers <= 1) {
        for (std::size_t task = 0; task < task_count; ++task) run_task(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t task = next++; task < task_count; task = next++) run_task(task);
            });
        }
    }

    FringeData data = FringeData::zeros(cfg.phi_grid);
    for (std::size_t task = 0; task < task_count; ++task) {
        const std::size_t i = task / blocks_per_phi;
        for (auto p : kAllPairs) data.pair_counts(p)[i] += tallies[task].counts[static_cast<int>(p)];
        data.trials_kept[i] += tallies[task].kept;
        data.trials_total[i] += tallies[task].total;
    }
    return data;
}

std::vector<EventLog> sample_event_logs(const Bench& bench, const RunConfig& cfg, std::size_t count) {
    cfg.check();
    const ProtocolEngine engine(bench, cfg.input_theta);
    const double phi = cfg.phi_grid.front();
    const FockState prepared = engine.prepare(phi);
    Rng rng = make_rng(cfg.seed, 0);
    std::vector<EventLog> logs;
    for (std::size_t k = 0; k < count; ++k) logs.push_back(engine.trial(prepared, phi, cfg, rng).log);
    return logs;
}

PairProbabilities analytic_coincidences(const Bench& bench, double phi) {
    const ProtocolEngine engine(bench);
    const FockState out = engine.propagate(phi, false);
    const auto [d1, d2] = engine.alice_modes();
    const auto [d1s, d2s] = engine.bob_modes();
    auto joint = [&](ModeId alice, ModeId alice_dark, ModeId bob, ModeId bob_dark) {
        return partial_probability(out, {{alice, 1}, {alice_dark, 0}, {bob, 1}, {bob_dark, 0}});
    };
    PairProbabilities p;
    p.d1_d2s = joint(d1, d2, d2s, d1s);
    p.d1_d1s = joint(d1, d2, d1s, d2s);
    p.d2_d2s = joint(d2, d1, d2s, d1s);
    p.d2_d1s = joint(d2, d1, d1s, d2s);
    const double total = p.sum();
    if (total <= 0.0) throw Error(ErrorCode::ImpossibleOutcome, "bench produces no coincidences");
    p.d1_d2s /= total;
    p.d1_d1s /= total;
    p.d2_d2s /= total;
    p.d2_d1s /= total;
    return p;
}

double phase_from_position(double x_m, double lambda_m) {
    if (!(lambda_m > 0.0)) throw Error(ErrorCode::BadParam, "wavelength must be positive");
    return std::numbers::pi * x_m * std::pow(2.0, 1.5) / lambda_m;
}

double position_from_phase(double phi, double lambda_m) {
    if (!(lambda_m > 0.0)) throw Error(ErrorCode::BadParam, "wavelength must be positive");
    return phi * lambda_m / (std::numbers::pi * std::pow(2.0, 1.5));
}

InputPreparation preparation_for(const QubitSpec& qubit) {
    qubit.check();
    // After BS_S the input mode carries cos(theta) e^{i phi}|1>, the ancilla branch -sin(theta).
    InputPreparation prep;
    prep.theta = std::atan2(std::abs(qubit.alpha), std::abs(qubit.beta));
    if (std::abs(qubit.alpha) > 0.0 && std::abs(qubit.beta) > 0.0) {
        prep.phi = wrap_phase(std::arg(qubit.beta) - std::arg(-qubit.alpha));
    }
    return prep;
}

}  // namespace telesim
