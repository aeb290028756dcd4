#include <doctest.h>

#include <cmath>
#include <numbers>

#include "telesim/protocol.hpp"

using namespace telesim;

namespace {

constexpr double kPi = std::numbers::pi;

RunConfig quiet(RunMode mode, std::size_t trials, std::vector<double> grid) {
    RunConfig cfg;
    cfg.mode = mode;
    cfg.trials_per_phi = trials;
    cfg.phi_grid = std::move(grid);
    cfg.noise.qe = 1.0;
    cfg.noise.dephasing_sigma = 0.0;
    cfg.noise.baseline_sigma = 0.0;
    return cfg;
}

ClickPattern clicks(std::initializer_list<std::pair<const char*, unsigned>> photons) {
    std::vector<DetectorPhotons> d;
    for (const auto& [name, n] : photons) d.push_back({name, n, 0.0});
    Rng rng = make_rng(0);
    return thin_by_efficiency(d, 1.0, 0.0, rng);
}

// Amplitudes on the bench with Alice's detector modes zeroed out.
std::map<std::vector<unsigned>, Complex> without_alice(const FockState& s, const ProtocolEngine& e) {
    const auto [d1, d2] = e.alice_modes();
    const std::size_t i1 = s.index_of(d1), i2 = s.index_of(d2);
    std::map<std::vector<unsigned>, Complex> out;
    for (const auto& en : s.entries()) {
        std::vector<unsigned> key;
        for (std::size_t k = 0; k < s.modes().size(); ++k) key.push_back(k == i1 || k == i2 ? 0 : en.occupation[k]);
        out[key] += en.amplitude;
    }
    return out;
}

Complex bob_ratio(const FockState& s, const Bench& b) {
    const int bob = b.path_index("bob");
    const std::size_t h = s.index_of({bob, Polarization::H}), v = s.index_of({bob, Polarization::V});
    Complex ah, av;
    for (const auto& en : s.entries()) {
        if (en.occupation[h] == 1) ah += en.amplitude;
        if (en.occupation[v] == 1) av += en.amplitude;
    }
    return av / ah;
}

}  // namespace

TEST_CASE("Bell outcome classification") {
    CHECK(classify(clicks({{"D1", 1}, {"D2", 0}})) == BellOutcome::Psi3);
    CHECK(classify(clicks({{"D1", 0}, {"D2", 1}})) == BellOutcome::Psi4);
    CHECK(classify(clicks({{"D1", 0}, {"D2", 0}})) == BellOutcome::Psi1Idle);
    CHECK(classify(clicks({{"D1", 1}, {"D2", 1}})) == BellOutcome::Psi2Idle);

    const auto bob1 = clicks({{"D1*", 1}, {"D2*", 0}});
    const auto none = clicks({{"D1*", 0}, {"D2*", 0}});
    const auto both = clicks({{"D1*", 1}, {"D2*", 1}});
    CHECK(classify_coincidence(clicks({{"D2", 1}}), bob1) == BellOutcome::Psi4);
    CHECK(classify_coincidence(clicks({{"D1", 1}}), none) == BellOutcome::Psi2Idle);
    CHECK(classify_coincidence(clicks({{"D1", 1}}), both) == BellOutcome::Psi2Idle);
    CHECK(classify_coincidence(clicks({{"D1", 0}}), bob1) == BellOutcome::Psi1Idle);
    CHECK(is_idle(BellOutcome::Psi2Idle));
    CHECK_FALSE(is_idle(BellOutcome::Psi3));
}

TEST_CASE("run modes and the default grid") {
    CHECK(parse_run_mode("passive") == RunMode::Passive);
    CHECK(parse_run_mode("active-inhibited") == RunMode::ActiveInhibited);
    CHECK(parse_run_mode("active_eop_inhibited") == RunMode::ActiveInhibited);
    CHECK(to_string(RunMode::Active) == "active");
    CHECK_THROWS_AS(parse_run_mode("activ"), Error);

    const auto grid = default_phi_grid();
    REQUIRE(grid.size() == 25);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(2 * kPi).epsilon(1e-15));
    CHECK(grid[12] == doctest::Approx(kPi).epsilon(1e-15));
    CHECK_THROWS_AS(default_phi_grid(0), Error);
}

TEST_CASE("passive closed form on the builtin bench") {
    const Bench b = builtin_figure1();
    for (int k = 0; k < 100; ++k) {
        const double phi = 2 * kPi * k / 99.0;
        const PairProbabilities p = analytic_coincidences(b, phi);
        const double c2 = 0.5 * std::pow(std::cos(phi / 2), 2), s2 = 0.5 * std::pow(std::sin(phi / 2), 2);
        CHECK(std::abs(p.d1_d2s - c2) < 1e-12);
        CHECK(std::abs(p.d2_d1s - c2) < 1e-12);
        CHECK(std::abs(p.d1_d1s - s2) < 1e-12);
        CHECK(std::abs(p.d2_d2s - s2) < 1e-12);
    }
    const PairProbabilities zero = analytic_coincidences(b, 0.0);
    CHECK(zero.d1_d2s == doctest::Approx(0.5));
    CHECK(std::abs(zero.d1_d1s) < 1e-15);
    const PairProbabilities pi = analytic_coincidences(b, kPi);
    CHECK(pi.d1_d1s == doctest::Approx(0.5));
    CHECK(std::abs(pi.d1_d2s) < 1e-15);
    const PairProbabilities third = analytic_coincidences(b, kPi / 3);
    CHECK(third.d1_d2s == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(third.d1_d1s == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(third.d2_d2s == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(third.d2_d1s == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("engine analytic agrees with full propagation; correction swaps the D2 pairs") {
    const Bench b = builtin_figure1();
    const ProtocolEngine engine(b);
    for (double phi : {0.0, 0.4, 1.3, kPi, 4.0, 5.9}) {
        const PairProbabilities full = analytic_coincidences(b, phi);
        const PairProbabilities split = engine.analytic(phi, false);
        for (auto pair : kAllPairs) CHECK(std::abs(full.get(pair) - split.get(pair)) < 1e-12);

        const PairProbabilities fixed = engine.analytic(phi, true);
        CHECK(std::abs(fixed.d2_d2s - 0.5 * std::pow(std::cos(phi / 2), 2)) < 1e-12);
        CHECK(std::abs(fixed.d2_d1s - 0.5 * std::pow(std::sin(phi / 2), 2)) < 1e-12);
        CHECK(std::abs(fixed.d1_d2s - split.d1_d2s) < 1e-12);
        CHECK(std::abs(engine.analytic_coincidence_fraction(phi) - 0.5) < 1e-12);
    }
}

TEST_CASE("correction closure: a corrected D2 branch is the D1 branch") {
    const ProtocolEngine engine(builtin_figure1());
    const auto [d1, d2] = engine.alice_modes();
    for (double phi : {0.0, 0.7, 2.0, kPi}) {
        const FockState pre = engine.prepare(phi);
        const FockState psi3 = engine.finish(project(pre, {{d1, 1}, {d2, 0}}).first, false);
        const FockState psi4 = engine.finish(project(pre, {{d1, 0}, {d2, 1}}).first, true);
        const auto a = without_alice(psi3, engine);
        const auto b = without_alice(psi4, engine);
        REQUIRE(a.size() == b.size());
        for (const auto& [key, amp] : a) {
            REQUIRE(b.count(key) == 1);
            CHECK(std::abs(amp - b.at(key)) < 1e-12);
        }
        // Without the cell the two branches differ.
        const FockState raw = engine.finish(project(pre, {{d1, 0}, {d2, 1}}).first, false);
        double diff = 0.0;
        for (const auto& [key, amp] : without_alice(raw, engine)) {
            const auto it = a.find(key);
            diff = std::max(diff, std::abs(amp - (it == a.end() ? Complex{} : it->second)));
        }
        CHECK(diff > 0.1);
    }
}

TEST_CASE("input preparation and the teleported copy") {
    const QubitSpec qubits[] = {{Complex(0.6, 0), Complex(0, 0.8)},
                                {Complex(0.8, 0), Complex(0.6, 0)},
                                {Complex(0.168, 0.576), Complex(0.8, 0)},
                                {Complex(std::numbers::sqrt2 / 2, 0), Complex(-0.5, 0.5)}};
    const Bench b = builtin_figure1();
    const int s_path = b.path_index("s"), anc = b.path_index("anc");
    for (const auto& q : qubits) {
        const InputPreparation prep = preparation_for(q);
        // BS_S followed by the knob: photon on s carries beta, photon on the ancilla alpha.
        const std::vector<ModeId> modes = {{s_path, Polarization::H}, {s_path, Polarization::V},
                                           {anc, Polarization::H}, {anc, Polarization::V}};
        FockState in = create_photon(make_vacuum(modes), modes[1]);
        in = apply_element(beam_splitter(s_path, anc, prep.theta), in);
        in = apply_phase(in, modes[1], prep.phi);
        const Complex on_s = in.amplitude(OccupationVector(std::vector<std::uint8_t>{0, 1, 0, 0}));
        const Complex on_anc = in.amplitude(OccupationVector(std::vector<std::uint8_t>{0, 0, 0, 1}));
        CHECK(std::abs(on_s / on_anc - q.beta / q.alpha) < 1e-12);

        // On Bob's side of the delay line the qubit reappears with a fixed,
        // state-independent factor: +i after D1, -i after D2.
        const ProtocolEngine engine(b, prep.theta);
        const auto [d1, d2] = engine.alice_modes();
        const FockState pre = engine.prepare(prep.phi);
        const Complex r1 = bob_ratio(project(pre, {{d1, 1}, {d2, 0}}).first, b) / (q.beta / q.alpha);
        const Complex r2 = bob_ratio(project(pre, {{d1, 0}, {d2, 1}}).first, b) / (q.beta / q.alpha);
        CHECK(std::abs(r1 - Complex(0, 1)) < 1e-12);
        CHECK(std::abs(r2 - Complex(0, -1)) < 1e-12);
    }
}

TEST_CASE("a D1 trigger at phi = 0 always lands on D2*") {
    const Bench b = builtin_figure1();
    const RunConfig cfg = quiet(RunMode::Passive, 1, {0.0});
    Rng rng = make_rng(3);
    int d1_trials = 0;
    for (int k = 0; k < 2000; ++k) {
        const TrialRecord r = run_trial(b, 0.0, cfg, rng);
        if (r.bell != BellOutcome::Psi3) continue;
        ++d1_trials;
        CHECK(r.bob_clicks.clicked("D2*"));
        CHECK_FALSE(r.bob_clicks.clicked("D1*"));
    }
    CHECK(d1_trials > 400);
}

TEST_CASE("the Pockels cell flips D2 trials, and only when armed") {
    const Bench b = builtin_figure1();
    for (RunMode mode : {RunMode::Active, RunMode::ActiveInhibited, RunMode::Passive}) {
        const RunConfig cfg = quiet(mode, 1, {0.0});
        Rng rng = make_rng(4);
        for (int k = 0; k < 2000; ++k) {
            const TrialRecord r = run_trial(b, 0.0, cfg, rng);
            if (r.bell != BellOutcome::Psi4) continue;
            CHECK(r.corrected == (mode == RunMode::Active));
            CHECK(r.bob_clicks.clicked(mode == RunMode::Active ? "D2*" : "D1*"));
            CHECK(r.log.contains(EventKind::EopApplied) == (mode == RunMode::Active));
        }
    }
    // Too short a delay line: the cell misses every photon.
    RunConfig late = quiet(RunMode::Active, 1, {0.0});
    late.delay_length_m = 6.0;
    Rng rng = make_rng(5);
    for (int k = 0; k < 500; ++k) {
        const TrialRecord r = run_trial(b, 0.0, late, rng);
        CHECK_FALSE(r.corrected);
        if (r.bell == BellOutcome::Psi4) {
            CHECK(r.bob_clicks.clicked("D1*"));
            CHECK(r.log.contains(EventKind::EopMissed));
        }
    }
}

TEST_CASE("idle trials are discarded and kept trials are coincidences") {
    const Bench b = builtin_figure1();
    RunConfig cfg = quiet(RunMode::Active, 1, {1.0});
    cfg.noise.qe = 0.45;
    Rng rng = make_rng(6);
    int kept = 0;
    for (int k = 0; k < 5000; ++k) {
        const TrialRecord r = run_trial(b, 1.0, cfg, rng);
        CHECK(r.discarded == is_idle(r.bell));
        if (r.corrected) CHECK(r.bell == BellOutcome::Psi4);
        if (r.discarded) continue;
        ++kept;
        CHECK(r.alice_clicks.click_count() == 1);
        CHECK(r.bob_clicks.click_count() == 1);
        REQUIRE(r.bob_state.has_value());
        CHECK(std::abs(r.bob_state->norm_squared() - 1.0) < 1e-12);
    }
    // 0.5 x qe^2 of all trials survive.
    const double p = 0.5 * 0.45 * 0.45;
    CHECK(std::abs(kept / 5000.0 - p) < 3 * std::sqrt(p * (1 - p) / 5000));
}

TEST_CASE("at phi = pi/2 every pair is equally likely") {
    const PairProbabilities p = analytic_coincidences(builtin_figure1(), kPi / 2);
    for (auto pair : kAllPairs) CHECK(p.get(pair) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("Monte Carlo sweep follows the closed form") {
    const Bench b = builtin_figure1();
    const ProtocolEngine engine(b);
    for (RunMode mode : {RunMode::Passive, RunMode::Active, RunMode::ActiveInhibited}) {
        const RunConfig cfg = quiet(mode, 20000, default_phi_grid(9));
        const FringeData data = run_sweep(b, cfg);
        CHECK_NOTHROW(data.check());
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::uint64_t sum = 0;
            for (auto pair : kAllPairs) sum += data.pair_counts(pair)[i];
            CHECK(sum == data.trials_kept[i]);
            CHECK(data.trials_total[i] == 20000);
            const PairProbabilities expect = engine.analytic(data.phi[i], mode == RunMode::Active);
            const double n = static_cast<double>(data.trials_kept[i]);
            for (auto pair : kAllPairs) {
                const double p = expect.get(pair);
                const double tol = 4 * std::sqrt(p * (1 - p) / n) + 1e-9;
                CAPTURE(to_string(mode));
                CAPTURE(to_string(pair));
                CHECK(std::abs(data.pair_counts(pair)[i] / n - p) <= tol);
            }
        }
    }
}

TEST_CASE("sweeps are reproducible for any worker count") {
    const Bench b = builtin_figure1();
    RunConfig cfg;
    cfg.mode = RunMode::Active;
    cfg.trials_per_phi = 3000;
    cfg.phi_grid = default_phi_grid(7);
    cfg.seed = 11;
    cfg.workers = 1;
    const FringeData one = run_sweep(b, cfg);
    cfg.workers = 4;
    CHECK(run_sweep(b, cfg) == one);
    cfg.workers = 3;
    CHECK(run_sweep(b, cfg) == one);
    cfg.seed = 12;
    CHECK_FALSE(run_sweep(b, cfg) == one);
}

TEST_CASE("post-selection keeps half the trials at unit efficiency") {
    const Bench b = builtin_figure1();
    const FringeData data = run_sweep(b, quiet(RunMode::Active, 40000, {0.0, 1.0, 2.5}));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = data.trials_kept[i] / double(data.trials_total[i]);
        CHECK(std::abs(f - 0.5) < 3 * std::sqrt(0.25 / 40000));
    }
}

TEST_CASE("event logs from a sweep configuration") {
    RunConfig cfg = quiet(RunMode::Active, 1, {0.0});
    const auto logs = sample_event_logs(builtin_figure1(), cfg, 20);
    REQUIRE(logs.size() == 20);
    for (const auto& log : logs) {
        CHECK(log.is_sorted());
        CHECK(log.contains(EventKind::PhotonEmitted));
    }
}

TEST_CASE("piezo position and phase") {
    CHECK(position_from_phase(kPi, kWavelengthM) == doctest::Approx(257.25e-9).epsilon(1e-4));
    for (double phi : {0.0, 0.3, kPi, 5.5}) {
        CHECK(std::abs(phase_from_position(position_from_phase(phi, kWavelengthM), kWavelengthM) - phi) < 1e-12);
    }
    CHECK_THROWS_AS(phase_from_position(1e-7, 0.0), Error);
}

TEST_CASE("benches the protocol cannot run") {
    auto code_of = [](const std::string& text) {
        const ParseResult r = parse_bench(text);
        REQUIRE(r.ok());
        try {
            ProtocolEngine engine(*r.bench);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::BadParam;  // sentinel: nothing thrown
    };
    const std::string head = "path a\npath b\nsource photon a V\nbs a b theta=0.7\n";
    const std::string dets = "detector D1 a V\ndetector D2 b V\ndetector D1* a H\ndetector D2* b H\n";
    CHECK(code_of(head + "phase a knob\n" + dets) == ErrorCode::BadBench);                   // no cell
    CHECK(code_of(head + "eop b\nphase a knob\n" + dets) == ErrorCode::BadBench);            // knob after cell
    CHECK(code_of(head + "phase a knob\neop b\nbs a b theta=0.1\n" + dets) == ErrorCode::BadBench);
    CHECK(code_of(head + "phase a knob\neop b\ndetector D1 a V\ndetector D2 b V\n") == ErrorCode::BadBench);
    CHECK(code_of(head + "phase a knob\neop b\n" + dets) == ErrorCode::BadParam);             // runnable
}

TEST_CASE("input splitter override") {
    const Bench b = builtin_figure1();
    // theta = 0 sends the input photon straight through: no superposition, no fringe.
    const ProtocolEngine flat(b, 0.0);
    const PairProbabilities p0 = flat.analytic(0.0), p1 = flat.analytic(kPi / 2), p2 = flat.analytic(kPi);
    for (auto pair : kAllPairs) {
        CHECK(std::abs(p0.get(pair) - p1.get(pair)) < 1e-12);
        CHECK(std::abs(p0.get(pair) - p2.get(pair)) < 1e-12);
    }
    const ProtocolEngine same(b, kPi / 4);
    CHECK(std::abs(same.analytic(1.0).d1_d2s - ProtocolEngine(b).analytic(1.0).d1_d2s) < 1e-15);
}

TEST_CASE("run configuration checks") {
    RunConfig cfg = quiet(RunMode::Active, 0, {0.0});
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg.trials_per_phi = 1;
    cfg.phi_grid.clear();
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg.phi_grid = {0.0};
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg.workers = 1;
    cfg.delay_length_m = -2.0;
    CHECK_THROWS_AS(cfg.check(), Error);
}
