#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "telesim/elements.hpp"
#include "telesim/stochastics.hpp"

namespace telesim {

/// Click -> amplifier -> avalanche chain -> Pockels cell HV ready.
struct TimingModel {
    double risetime_ns = 22.0;
    double delay_ns_per_m = kDefaultNsPerMeter;
    double detector_latency_ns = 0.0;
    double jitter_sigma_ns = 0.0;

    void check() const;
};

enum class EventKind { PhotonEmitted, AliceClick, HvReady, PhotonAtEop, EopApplied, EopMissed };

std::string_view to_string(EventKind kind);

struct Event {
    double timestamp_ns = 0.0;
    EventKind kind = EventKind::PhotonEmitted;
    std::string detail;
};

/// Time-ordered event list; insertion keeps it sorted (stable for equal times).
class EventLog {
public:
    void add(double timestamp_ns, EventKind kind, std::string detail = {});
    const std::vector<Event>& events() const { return events_; }
    bool empty() const { return events_.empty(); }
    bool contains(EventKind kind) const;
    bool is_sorted() const;

private:
    std::vector<Event> events_;
};

struct RaceResult {
    bool armed_in_time = false;
    double hv_ready_ns = 0.0;
    double photon_at_eop_ns = 0.0;
    EventLog log;
};

/// Races the feed-forward chain against the photon in the delay line; photons
/// are emitted at t = 0.
RaceResult race(double click_time_ns, const TimingModel& timing, double delay_length_m, Rng& rng);

enum class AliceTrigger { None, D1, D2 };

/// Only a D2 click calls for sigma_z, and only if the cell was armed in time.
bool effective_correction(AliceTrigger trigger, bool armed_in_time);

/// "timestamp_ns,event,detail" with a header row.
void write_event_log_csv(std::ostream& out, const EventLog& log, bool header = true);

}  // namespace telesim
