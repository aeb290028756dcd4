#include "telesim/analysis.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>

#include "telesim/error.hpp"

namespace telesim {

std::string_view to_string(CoincidencePair pair) {
    switch (pair) {
        case CoincidencePair::D1_D1s: return "D1-D1*";
        case CoincidencePair::D1_D2s: return "D1-D2*";
        case CoincidencePair::D2_D1s: return "D2-D1*";
        case CoincidencePair::D2_D2s: return "D2-D2*";
    }
    return "?";
}

CoincidencePair parse_pair(std::string_view text) {
    for (auto p : kAllPairs)
        if (to_string(p) == text) return p;
    throw Error(ErrorCode::BadParam, fmt::format("unknown detector pair '{}'", text));
}

FringeData FringeData::zeros(std::vector<double> phi_grid) {
    FringeData d;
    const std::size_t n = phi_grid.size();
    d.phi = std::move(phi_grid);
    for (auto& c : d.counts) c.assign(n, 0);
    d.trials_kept.assign(n, 0);
    d.trials_total.assign(n, 0);
    return d;
}

void FringeData::merge(const FringeData& other) {
    if (other.phi != phi) throw Error(ErrorCode::GridMismatch, "cannot merge runs over different phase grids");
    for (std::size_t p = 0; p < counts.size(); ++p)
        for (std::size_t i = 0; i < phi.size(); ++i) counts[p][i] += other.counts[p][i];
    for (std::size_t i = 0; i < phi.size(); ++i) {
        trials_kept[i] += other.trials_kept[i];
        trials_total[i] += other.trials_total[i];
    }
}

void FringeData::check() const {
    const std::size_t n = phi.size();
    if (trials_kept.size() != n || trials_total.size() != n) {
        throw Error(ErrorCode::GridMismatch, "trial counts are not aligned with the phase grid");
    }
    for (const auto& c : counts) {
        if (c.size() != n) throw Error(ErrorCode::GridMismatch, "pair counts are not aligned with the phase grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (trials_kept[i] > trials_total[i]) throw Error(ErrorCode::BadInput, "trials_kept exceeds trials_total");
        for (const auto& c : counts) {
            if (c[i] > trials_kept[i]) throw Error(ErrorCode::BadInput, "coincidences exceed trials_kept");
        }
    }
}

void write_fringe_csv(std::ostream& out, const FringeData& data) {
    out << "phi_rad,pair,coincidences,trials_kept,trials_total\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (auto p : kAllPairs) {
            out << fmt::format("{},{},{},{},{}\n", data.phi[i], to_string(p), data.pair_counts(p)[i],
                               data.trials_kept[i], data.trials_total[i]);
        }
    }
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, int line) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::BadInput, fmt::format("line {}: '{}' is not a valid number", line, s));
    }
    return value;
}

}  // namespace

FringeData read_fringe_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::BadInput, "empty fringe CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "phi_rad,pair,coincidences,trials_kept,trials_total") {
        throw Error(ErrorCode::BadInput, "unexpected fringe CSV header");
    }
    FringeData d;
    std::vector<std::set<int>> seen;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw Error(ErrorCode::BadInput, fmt::format("line {}: expected 5 fields", line_no));
        const double phi = parse_number<double>(f[0], line_no);
        CoincidencePair pair;
        try {
            pair = parse_pair(f[1]);
        } catch (const Error&) {
            throw Error(ErrorCode::BadInput, fmt::format("line {}: unknown pair '{}'", line_no, f[1]));
        }
        const auto c = parse_number<std::uint64_t>(f[2], line_no);
        const auto kept = parse_number<std::uint64_t>(f[3], line_no);
        const auto total = parse_number<std::uint64_t>(f[4], line_no);

        if (d.phi.empty() || d.phi.back() != phi) {
            d.phi.push_back(phi);
            for (auto& v : d.counts) v.push_back(0);
            d.trials_kept.push_back(kept);
            d.trials_total.push_back(total);
            seen.emplace_back();
        } else if (d.trials_kept.back() != kept || d.trials_total.back() != total) {
            throw Error(ErrorCode::BadInput, fmt::format("line {}: inconsistent trial totals", line_no));
        }
        if (!seen.back().insert(static_cast<int>(pair)).second) {
            throw Error(ErrorCode::BadInput, fmt::format("line {}: duplicate pair at phi={}", line_no, phi));
        }
        d.pair_counts(pair).back() = c;
    }
    for (const auto& s : seen) {
        if (s.size() != 4) throw Error(ErrorCode::BadInput, "every phase point needs all four pairs");
    }
    d.check();
    return d;
}

FringeSeries series(const FringeData& data, CoincidencePair pair) {
    const CoincidencePair one[] = {pair};
    return combined_series(data, one);
}

FringeSeries combined_series(const FringeData& data, std::span<const CoincidencePair> pairs) {
    FringeSeries s;
    s.phi = data.phi;
    s.counts.assign(data.size(), 0.0);
    s.trials.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (auto p : pairs) s.counts[i] += static_cast<double>(data.pair_counts(p)[i]);
        s.trials[i] = static_cast<double>(data.trials_kept[i]);
    }
    return s;
}

double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phi, two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    if (w > std::numbers::pi) w -= two_pi;
    return w;
}

FitResult fit_fringe(const FringeSeries& data) {
    const std::size_t n = data.phi.size();
    if (data.counts.size() != n || data.trials.size() != n) {
        throw Error(ErrorCode::GridMismatch, "fringe series columns differ in length");
    }
    const std::set<double> distinct(data.phi.begin(), data.phi.end());
    if (n < 4 || distinct.size() < 4) {
        throw Error(ErrorCode::FitUnderdetermined, "a fringe fit needs at least four distinct phases");
    }

    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(data.phi[i]);
        x(i, 2) = std::sin(data.phi[i]);
        y(i) = data.counts[i];
        const double trials = data.trials[i];
        const double var = trials > 0.0 ? data.counts[i] * (1.0 - data.counts[i] / trials) : data.counts[i];
        w(i) = 1.0 / std::max(var, 1.0);
    }
    const Eigen::Matrix3d normal = x.transpose() * w.asDiagonal() * x;
    const Eigen::Vector3d rhs = x.transpose() * w.asDiagonal() * y;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    lu.setThreshold(1e-10);
    if (lu.rank() < 3) throw Error(ErrorCode::FitUnderdetermined, "phase grid does not constrain cos/sin terms");
    const Eigen::Vector3d p = lu.solve(rhs);
    const Eigen::Matrix3d cov = lu.inverse();

    const double a = p(0), b = p(1), c = p(2);
    if (!(a > 0.0)) throw Error(ErrorCode::FitUnderdetermined, "fringe has no counts");
    const double r = std::hypot(b, c);

    FitResult fit;
    fit.amplitude = a;
    fit.amplitude_err = std::sqrt(cov(0, 0));
    fit.visibility_unclamped = r / a;
    fit.visibility = std::clamp(fit.visibility_unclamped, 0.0, 1.0);
    fit.phase_offset = wrap_phase(std::atan2(c, b));

    Eigen::Vector3d gv(-r / (a * a), 0.0, 0.0);
    if (r > 0.0) {
        gv(1) = b / (a * r);
        gv(2) = c / (a * r);
        const Eigen::Vector3d gp(0.0, -c / (r * r), b / (r * r));
        fit.phase_err = std::sqrt(std::max(0.0, gp.dot(cov * gp)));
    } else {
        fit.phase_err = std::numbers::pi;
    }
    fit.visibility_err = std::sqrt(std::max(0.0, gv.dot(cov * gv)));
    fit.phase_constrained = r > 0.0 && fit.visibility_unclamped > 3.0 * fit.visibility_err;

    const Eigen::VectorXd resid = y - x * p;
    fit.chi2 = resid.cwiseProduct(resid).dot(w);
    fit.dof = static_cast<int>(n) - 3;
    if (fit.dof > 0) {
        boost::math::chi_squared dist(fit.dof);
        fit.p_value = boost::math::cdf(boost::math::complement(dist, fit.chi2));
    }
    return fit;
}

double fidelity_from_visibility(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::BadParam, "visibility must lie in [0, 1]");
    return 0.5 * (1.0 + v);
}

double visibility_from_fidelity(double f) {
    if (!(f >= 0.5 && f <= 1.0)) throw Error(ErrorCode::BadParam, "fidelity must lie in [1/2, 1]");
    return 2.0 * f - 1.0;
}

double error_propagation(const FitResult& fit) { return 0.5 * fit.visibility_err; }

bool classical_bound_check(double fidelity, double bound) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0)) throw Error(ErrorCode::BadParam, "fidelity must lie in [0, 1]");
    return fidelity > bound;
}

FringeComparison compare_fits(const FitResult& a, const FitResult& b, double tolerance) {
    FringeComparison c;
    c.delta_phase = wrap_phase(a.phase_offset - b.phase_offset);
    c.delta_phase_err = std::hypot(a.phase_err, b.phase_err);
    c.delta_visibility = a.visibility - b.visibility;
    c.delta_visibility_err = std::hypot(a.visibility_err, b.visibility_err);
    c.in_phase = std::abs(c.delta_phase) < tolerance;
    c.pi_offset = std::abs(std::abs(c.delta_phase) - std::numbers::pi) < tolerance;
    return c;
}

void require_aligned(const FringeData& a, const FringeData& b) {
    if (a.phi != b.phi) throw Error(ErrorCode::GridMismatch, "the two runs use different phase grids");
}

}  // namespace telesim
