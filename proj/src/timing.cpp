#include "telesim/timing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>

namespace telesim {

void TimingModel::check() const {
    if (!(risetime_ns >= 0.0) || !(delay_ns_per_m >= 0.0) || !(detector_latency_ns >= 0.0) ||
        !(jitter_sigma_ns >= 0.0)) {
        throw Error(ErrorCode::BadParam, "timing parameters must be non-negative");
    }
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::PhotonEmitted: return "PhotonEmitted";
        case EventKind::AliceClick: return "AliceClick";
        case EventKind::HvReady: return "HvReady";
        case EventKind::PhotonAtEop: return "PhotonAtEop";
        case EventKind::EopApplied: return "EopApplied";
        case EventKind::EopMissed: return "EopMissed";
    }
    return "?";
}

void EventLog::add(double timestamp_ns, EventKind kind, std::string detail) {
    auto pos = std::upper_bound(events_.begin(), events_.end(), timestamp_ns,
                                [](double t, const Event& e) { return t < e.timestamp_ns; });
    events_.insert(pos, Event{timestamp_ns, kind, std::move(detail)});
}

bool EventLog::contains(EventKind kind) const {
    return std::any_of(events_.begin(), events_.end(), [&](const Event& e) { return e.kind == kind; });
}

bool EventLog::is_sorted() const {
    return std::is_sorted(events_.begin(), events_.end(),
                          [](const Event& a, const Event& b) { return a.timestamp_ns < b.timestamp_ns; });
}

RaceResult race(double click_time_ns, const TimingModel& timing, double delay_length_m, Rng& rng) {
    if (!(click_time_ns >= 0.0)) throw Error(ErrorCode::BadParam, "click time must be non-negative");
    timing.check();

    double jitter = 0.0;
    if (timing.jitter_sigma_ns > 0.0) {
        std::normal_distribution<double> draw(0.0, timing.jitter_sigma_ns);
        jitter = draw(rng);
    }
    RaceResult r;
    // The HV pulse cannot precede the click that launched it.
    r.hv_ready_ns = std::max(click_time_ns, click_time_ns + timing.detector_latency_ns + timing.risetime_ns + jitter);
    r.photon_at_eop_ns = delay_length_m * timing.delay_ns_per_m;
    r.armed_in_time = r.hv_ready_ns <= r.photon_at_eop_ns;

    r.log.add(0.0, EventKind::PhotonEmitted);
    r.log.add(click_time_ns, EventKind::AliceClick);
    r.log.add(r.hv_ready_ns, EventKind::HvReady, fmt::format("jitter_ns={}", jitter));
    r.log.add(r.photon_at_eop_ns, EventKind::PhotonAtEop, fmt::format("delay_m={}", delay_length_m));
    return r;
}

bool effective_correction(AliceTrigger trigger, bool armed_in_time) {
    return trigger == AliceTrigger::D2 && armed_in_time;
}

void write_event_log_csv(std::ostream& out, const EventLog& log, bool header) {
    if (header) out << "timestamp_ns,event,detail\n";
    for (const auto& e : log.events()) out << fmt::format("{},{},{}\n", e.timestamp_ns, to_string(e.kind), e.detail);
}

}  // namespace telesim
