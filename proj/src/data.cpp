#include "mwtgc/data.hpp"

#include "mwtgc/csv.hpp"
#include "mwtgc/error.hpp"
#include "mwtgc/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace mwtgc {

Normalizer fit_normalizer(const Matrix& training_values) {
    if (training_values.size() == 0) {
        throw std::invalid_argument("fit_normalizer: empty training range");
    }
    const double mean = training_values.mean();
    const double var = (training_values.array() - mean).square().mean();
    const double stddev = std::sqrt(var);
    if (!(stddev > 0.0) || !std::isfinite(stddev)) {
        throw NumericError("fit_normalizer: training speeds are constant, stddev is zero");
    }
    return Normalizer{mean, stddev};
}

WindowSet window_starts(int begin, int end, int window_len) {
    WindowSet set;
    for (int s = begin; s + window_len <= end; ++s) {
        set.starts.push_back(s);
    }
    return set;
}

WindowDataset window_dataset(const SpeedSeries& series, int h, int t_p, const SplitSpec& split) {
    if (h < 1 || t_p < 1) {
        throw std::invalid_argument("window_dataset: h and t_p must be >= 1");
    }
    if (split.train_days < 1 || split.val_days < 1 || split.test_days < 1) {
        throw std::invalid_argument("window_dataset: every split needs at least one day");
    }
    const int window_len = h + t_p;
    const int total = split.train_steps() + split.val_steps() + split.test_steps();
    if (series.step_count() < total) {
        throw InputError("window_dataset: series has " + std::to_string(series.step_count()) +
                         " steps, split layout needs " + std::to_string(total));
    }
    WindowDataset ds;
    ds.history_steps = h;
    ds.horizon_steps = t_p;
    ds.train_end = split.train_steps();
    ds.val_end = ds.train_end + split.val_steps();
    ds.test_end = ds.val_end + split.test_steps();
    ds.train = window_starts(0, ds.train_end, window_len);
    ds.val = window_starts(ds.train_end, ds.val_end, window_len);
    ds.test = window_starts(ds.val_end, ds.test_end, window_len);
    auto require_windows = [window_len](const WindowSet& set, const char* name, int len) {
        if (set.starts.empty()) {
            throw InputError(std::string("window_dataset: ") + name + " split has " +
                             std::to_string(len) + " steps; at least " +
                             std::to_string(window_len) + " are required for one window");
        }
    };
    require_windows(ds.train, "train", split.train_steps());
    require_windows(ds.val, "validation", split.val_steps());
    require_windows(ds.test, "test", split.test_steps());
    return ds;
}

namespace {

std::string padded_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", i);
    return buf;
}

RoadNetwork grid_network(const SynthSpec& spec) {
    const int rows = spec.grid_rows;
    const int cols = spec.grid_cols;
    if (rows < 1 || cols < 2) {
        throw std::invalid_argument("generate_synthetic: grid needs at least 1x2 cells");
    }
    RoadNetwork net;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            RoadSegment s;
            s.id = r * cols + c;
            s.name = padded_name(s.id);
            s.speed_limit_kmh = (r % 3 == 1) ? 80.0 : 60.0; // arterial rows
            s.mid_x_m = c * spec.spacing_m;
            s.mid_y_m = r * spec.spacing_m;
            s.heading_rad = ((r + c) % 2 == 0) ? 0.0 : M_PI / 2.0;
            s.length_m = spec.spacing_m;
            net.segments.push_back(std::move(s));
        }
    }
    auto link = [&net](int a, int b) {
        net.connections.push_back({a, b, false});
        net.connections.push_back({b, a, false});
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int id = r * cols + c;
            if (c + 1 < cols) {
                link(id, id + 1);
            }
            if (r + 1 < rows) {
                link(id, id + cols);
            }
        }
    }
    if (cols >= 4) {
        // a pair of U-turn connections; they must not add edges anywhere
        net.connections.push_back({0, 3, true});
        net.connections.push_back({3, 0, true});
    }
    return net;
}

RoadNetwork ring_network(const SynthSpec& spec) {
    const int n = spec.ring_size;
    if (n < 3) {
        throw std::invalid_argument("generate_synthetic: ring needs at least 3 segments");
    }
    RoadNetwork net;
    const double radius = n * spec.spacing_m / (2.0 * M_PI);
    for (int i = 0; i < n; ++i) {
        const double angle = 2.0 * M_PI * i / n;
        RoadSegment s;
        s.id = i;
        s.name = padded_name(i);
        s.speed_limit_kmh = (i % 4 == 0) ? 80.0 : 60.0;
        s.mid_x_m = radius * std::cos(angle);
        s.mid_y_m = radius * std::sin(angle);
        s.heading_rad = normalize_heading(angle + M_PI / 2.0); // tangent
        s.length_m = spec.spacing_m;
        net.segments.push_back(std::move(s));
    }
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        net.connections.push_back({i, j, false});
        net.connections.push_back({j, i, false});
    }
    return net;
}

} // namespace

SyntheticResult generate_synthetic(const SynthSpec& spec) {
    if (spec.days < 1) {
        throw std::invalid_argument("generate_synthetic: days must be >= 1");
    }
    SyntheticResult out;
    out.network =
        spec.topology == SynthSpec::Topology::Grid ? grid_network(spec) : ring_network(spec);
    out.network.validate();

    const int n = out.network.size();
    const int steps = spec.days * kStepsPerDay;

    // undirected neighbor lists from the non-U-turn connections
    std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
    for (const Connection& c : out.network.connections) {
        if (c.is_u_turn) {
            continue;
        }
        neighbors[static_cast<std::size_t>(c.from_id)].push_back(c.to_id);
    }

    // spatially smooth demand phase so nearby segments stay correlated
    double max_coord = 1.0;
    for (const RoadSegment& s : out.network.segments) {
        max_coord = std::max({max_coord, std::fabs(s.mid_x_m), std::fabs(s.mid_y_m)});
    }
    std::vector<double> phase(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const RoadSegment& s = out.network.segments[static_cast<std::size_t>(i)];
        phase[static_cast<std::size_t>(i)] = 0.6 * (s.mid_x_m + s.mid_y_m) / max_coord;
    }

    // incoming-edge lists for shock propagation (shock moves downstream)
    std::vector<std::vector<int>> upstream(static_cast<std::size_t>(n));
    for (const Connection& c : out.network.connections) {
        if (!c.is_u_turn) {
            upstream[static_cast<std::size_t>(c.to_id)].push_back(c.from_id);
        }
    }

    constexpr double relax = 0.25;       // pull toward the demand-set target speed
    constexpr double shock_decay = 0.95; // per-step shock persistence
    constexpr double shock_travel = 0.25; // fraction handed downstream per step
    const double event_prob = spec.event_rate / kStepsPerDay;

    SeededRng rng(spec.seed);
    Vector u = Vector::Ones(n); // relative speed, 1 = free flow
    Vector shock = Vector::Zero(n);
    Matrix values(n, steps);
    std::vector<std::int64_t> timestamps(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        timestamps[static_cast<std::size_t>(t)] = spec.start_epoch + t * kStepSeconds;
        const double day_frac = static_cast<double>(t % kStepsPerDay) / kStepsPerDay;

        // congestion shocks: new impulses, then decay while spreading along edges
        if (spec.event_rate > 0.0) {
            for (int i = 0; i < n; ++i) {
                if (rng.uniform01() < event_prob) {
                    shock[i] += spec.event_magnitude * rng.uniform(0.5, 1.0);
                }
            }
        }
        Vector next_shock = shock;
        for (int i = 0; i < n; ++i) {
            const auto& up = upstream[static_cast<std::size_t>(i)];
            double inflow = 0.0;
            if (!up.empty()) {
                for (const int j : up) {
                    inflow += shock[j];
                }
                inflow /= static_cast<double>(up.size());
            }
            next_shock[i] = shock_decay * ((1.0 - shock_travel) * shock[i] + shock_travel * inflow);
        }
        shock = next_shock;

        Vector next = u;
        for (int i = 0; i < n; ++i) {
            const auto& nb = neighbors[static_cast<std::size_t>(i)];
            double nb_mean = u[i];
            if (!nb.empty()) {
                double acc = 0.0;
                for (const int j : nb) {
                    acc += u[j];
                }
                nb_mean = acc / static_cast<double>(nb.size());
            }
            const double demand =
                spec.demand_amplitude * 0.5 *
                (1.0 + std::sin(2.0 * M_PI * day_frac + phase[static_cast<std::size_t>(i)] -
                                M_PI / 2.0));
            const double target = 1.0 - demand - std::min(shock[i], 0.7);
            double v = u[i] + spec.diffusion * (nb_mean - u[i]) + relax * (target - u[i]);
            if (spec.noise_std > 0.0) {
                v += spec.noise_std * rng.normal();
            }
            next[i] = std::clamp(v, 0.05, 1.0);
        }
        u = next;
        for (int i = 0; i < n; ++i) {
            double reported = u[i];
            if (spec.obs_noise_std > 0.0) { // sampled mean speeds, not the latent state
                reported = std::clamp(reported + spec.obs_noise_std * rng.normal(), 0.02, 1.0);
            }
            values(i, t) =
                reported * out.network.segments[static_cast<std::size_t>(i)].speed_limit_kmh;
        }
    }

    out.speeds.values_kmh = std::move(values);
    out.speeds.timestamps = std::move(timestamps);
    for (const RoadSegment& s : out.network.segments) {
        out.speeds.segment_names.push_back(s.name);
    }
    return out;
}

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// days since 1970-01-01 for a civil date (valid for years >= 1970)
std::int64_t days_from_civil(int y, int m, int d) {
    static const int cumulative[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    std::int64_t days = 0;
    for (int year = 1970; year < y; ++year) {
        days += is_leap(year) ? 366 : 365;
    }
    days += cumulative[m - 1];
    if (m > 2 && is_leap(y)) {
        days += 1;
    }
    return days + (d - 1);
}

} // namespace

std::int64_t parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &s) != 6) {
        throw InputError("cannot parse timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM:SS)");
    }
    if (y < 1970 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
        mi > 59 || s < 0 || s > 59) {
        throw InputError("timestamp '" + text + "' out of range");
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int year = 1970;
    while (true) {
        const int len = is_leap(year) ? 366 : 365;
        if (days < len) {
            break;
        }
        days -= len;
        ++year;
    }
    static const int month_len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int month = 1;
    for (int m = 0; m < 12; ++m) {
        int len = month_len[m];
        if (m == 1 && is_leap(year)) {
            len = 29;
        }
        if (days < len) {
            break;
        }
        days -= len;
        ++month;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", year, month,
                  static_cast<int>(days) + 1, static_cast<int>(rem / 3600),
                  static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
    return buf;
}

namespace {

bool is_missing_field(const std::string& field) {
    if (field.empty()) {
        return true;
    }
    std::string lower;
    for (char c : field) {
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return lower == "nan" || lower == "na";
}

} // namespace

SpeedSeries load_speeds(const std::string& path, const RoadNetwork& network) {
    const csv::Table table = csv::read_file(path);
    if (table.header.empty() || table.header[0] != "timestamp") {
        throw InputError(path + ": first column must be 'timestamp'");
    }
    const int n = network.size();

    std::map<std::string, int> net_index;
    for (const RoadSegment& s : network.segments) {
        net_index[s.name] = s.id;
    }
    std::vector<int> column_segment(table.header.size(), -1);
    std::set<std::string> seen;
    std::vector<std::string> unknown;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        auto it = net_index.find(name);
        if (it == net_index.end()) {
            unknown.push_back(name);
            continue;
        }
        if (!seen.insert(name).second) {
            throw InputError(path + ": duplicate speed column '" + name + "'");
        }
        column_segment[c] = it->second;
    }
    if (!unknown.empty()) {
        std::string msg = path + ": speed columns not present in the network:";
        for (const auto& name : unknown) {
            msg += " '" + name + "'";
        }
        throw InputError(msg);
    }
    if (static_cast<int>(seen.size()) != n) {
        std::string msg = path + ": network segments missing from the file:";
        for (const RoadSegment& s : network.segments) {
            if (seen.count(s.name) == 0) {
                msg += " '" + s.name + "'";
            }
        }
        throw InputError(msg);
    }
    if (table.rows.empty()) {
        throw InputError(path + ": no data rows");
    }

    // raw rows keyed by timestamp, NaN = missing
    std::vector<std::int64_t> raw_times;
    for (const auto& row : table.rows) {
        raw_times.push_back(parse_iso8601(row[0]));
    }
    for (std::size_t r = 1; r < raw_times.size(); ++r) {
        if (raw_times[r] <= raw_times[r - 1]) {
            throw InputError(path + ": timestamps must be strictly increasing (row " +
                             std::to_string(r + 2) + ")");
        }
        if ((raw_times[r] - raw_times[0]) % kStepSeconds != 0) {
            throw InputError(path + ": timestamp off the 5-minute grid at row " +
                             std::to_string(r + 2));
        }
    }

    const std::int64_t t0 = raw_times.front();
    const int total =
        static_cast<int>((raw_times.back() - t0) / kStepSeconds) + 1;

    SpeedSeries series;
    series.values_kmh = Matrix::Constant(n, total, std::numeric_limits<double>::quiet_NaN());
    series.timestamps.resize(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        series.timestamps[static_cast<std::size_t>(t)] = t0 + t * kStepSeconds;
    }
    for (const RoadSegment& s : network.segments) {
        series.segment_names.push_back(s.name);
    }

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const int t = static_cast<int>((raw_times[r] - t0) / kStepSeconds);
        const auto& row = table.rows[r];
        for (std::size_t c = 1; c < row.size(); ++c) {
            const int seg = column_segment[c];
            if (is_missing_field(row[c])) {
                continue;
            }
            const double v = csv::parse_double(row[c], path + " row " + std::to_string(r + 2));
            if (v < 0.0) {
                throw InputError(path + ": negative speed at row " + std::to_string(r + 2) +
                                 " column '" + table.header[c] + "'");
            }
            series.values_kmh(seg, t) = v;
        }
    }

    // per-segment linear interpolation; nearest value at the ends
    int imputed = 0;
    for (int i = 0; i < n; ++i) {
        int prev_known = -1;
        for (int t = 0; t < total; ++t) {
            if (!std::isnan(series.values_kmh(i, t))) {
                if (prev_known < t - 1) {
                    const int gap_begin = prev_known + 1;
                    for (int g = gap_begin; g < t; ++g) {
                        double v = 0.0;
                        if (prev_known < 0) {
                            v = series.values_kmh(i, t); // leading gap: nearest
                        } else {
                            const double a = series.values_kmh(i, prev_known);
                            const double b = series.values_kmh(i, t);
                            const double frac = static_cast<double>(g - prev_known) /
                                                static_cast<double>(t - prev_known);
                            v = a + frac * (b - a);
                        }
                        series.values_kmh(i, g) = v;
                        ++imputed;
                    }
                }
                prev_known = t;
            }
        }
        if (prev_known < 0) {
            throw InputError(path + ": segment '" + series.segment_names[static_cast<std::size_t>(i)] +
                             "' has no observed values");
        }
        for (int t = prev_known + 1; t < total; ++t) { // trailing gap: nearest
            series.values_kmh(i, t) = series.values_kmh(i, prev_known);
            ++imputed;
        }
    }
    series.imputed_count = imputed;
    return series;
}

void save_speeds(const SpeedSeries& series, const std::string& path) {
    csv::Table table;
    table.header.push_back("timestamp");
    for (const auto& name : series.segment_names) {
        table.header.push_back(name);
    }
    const Index n = series.segment_count();
    for (Index t = 0; t < series.step_count(); ++t) {
        std::vector<std::string> row;
        row.push_back(format_iso8601(series.timestamps[static_cast<std::size_t>(t)]));
        for (Index i = 0; i < n; ++i) {
            row.push_back(csv::format_double(series.values_kmh(i, t)));
        }
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

} // namespace mwtgc
