#include "rotorsim/pipeline/flight_log.hpp"

#include "rotorsim/core/csv.hpp"
#include "rotorsim/core/errors.hpp"
#include "rotorsim/pipeline/filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace rotorsim {

namespace {

const std::vector<std::string> kPoseColumns = {"t", "px", "py", "pz", "qw", "qx", "qy", "qz"};
const std::vector<std::string> kOnboardColumns = {"t",  "gx", "gy", "gz", "ax", "ay",
                                                  "az", "w1", "w2", "w3", "w4"};

std::vector<double> mapped_column(const CsvTable& table, const std::map<std::string, std::string>& names,
                                  const std::map<std::string, double>& scale, const std::string& canonical,
                                  double time_scale) {
    const auto it = names.find(canonical);
    const std::string& name = it == names.end() ? canonical : it->second;
    std::vector<double> col = table.column(name);
    double k = canonical == "t" ? time_scale : 1.0;
    if (const auto s = scale.find(canonical); s != scale.end()) k *= s->second;
    if (k != 1.0)
        for (double& v : col) v *= k;
    return col;
}

double median_step(const std::vector<double>& t) {
    std::vector<double> d(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) d[i] = t[i + 1] - t[i];
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid;
}

double interp(const std::vector<double>& t, const std::vector<double>& y, double x) {
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return y.front();
    if (it == t.end()) return y.back();
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    const double f = (x - t[i]) / (t[i + 1] - t[i]);
    return (1.0 - f) * y[i] + f * y[i + 1];
}

} // namespace

double FlightLog::mean_speed() const {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (const auto& x : samples) s += x.v.norm();
    return s / static_cast<double>(samples.size());
}

double FlightLog::max_speed() const {
    double s = 0.0;
    for (const auto& x : samples) s = std::max(s, x.v.norm());
    return s;
}

const std::vector<std::string>& flight_log_columns() {
    static const std::vector<std::string> cols = {
        "t",   "px",  "py",  "pz",  "qw",   "qx",   "qy",   "qz",   "vx", "vy",
        "vz",  "wx",  "wy",  "wz",  "dwx",  "dwy",  "dwz",  "ax",   "ay", "az",
        "mot1", "mot2", "mot3", "mot4", "fx", "fy", "fz",  "tx",   "ty", "tz"};
    return cols;
}

void write_flight_log(const std::filesystem::path& path, const FlightLog& log) {
    CsvTable table;
    table.header = flight_log_columns();
    table.rows.reserve(log.samples.size());
    for (const auto& s : log.samples) {
        table.rows.push_back({s.t,          s.p.x(),         s.p.y(),         s.p.z(),
                              s.q.w(),      s.q.x(),         s.q.y(),         s.q.z(),
                              s.v.x(),      s.v.y(),         s.v.z(),         s.omega.x(),
                              s.omega.y(),  s.omega.z(),     s.omega_dot.x(), s.omega_dot.y(),
                              s.omega_dot.z(), s.a.x(),      s.a.y(),         s.a.z(),
                              s.rotor_speeds[0], s.rotor_speeds[1], s.rotor_speeds[2],
                              s.rotor_speeds[3], s.wrench.f.x(), s.wrench.f.y(), s.wrench.f.z(),
                              s.wrench.tau.x(), s.wrench.tau.y(), s.wrench.tau.z()});
    }
    write_csv(path, table);
}

FlightLog read_flight_log(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    std::vector<std::size_t> idx;
    for (const auto& c : flight_log_columns()) idx.push_back(table.column_index(c));
    FlightLog log;
    log.name = path.stem().string();
    log.samples.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        auto v = [&](int k) { return row[idx[k]]; };
        FlightSample s;
        s.t = v(0);
        s.p = {v(1), v(2), v(3)};
        s.q = Quat(v(4), v(5), v(6), v(7));
        s.v = {v(8), v(9), v(10)};
        s.omega = {v(11), v(12), v(13)};
        s.omega_dot = {v(14), v(15), v(16)};
        s.a = {v(17), v(18), v(19)};
        for (int k = 0; k < 4; ++k) s.rotor_speeds[k] = v(20 + k);
        s.wrench.f = {v(24), v(25), v(26)};
        s.wrench.tau = {v(27), v(28), v(29)};
        log.samples.push_back(s);
    }
    return log;
}

std::vector<FlightLog> read_flight_logs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<FlightLog> logs;
    for (const auto& f : files) logs.push_back(read_flight_log(f));
    return logs;
}

Wrench measured_wrench(const Quat& q_WB, const Vec3& omega_B, const Vec3& a_W,
                       const Vec3& omega_dot_B, const VehicleParams& params) {
    Wrench w;
    w.f = params.mass * (q_WB.conjugate() * (a_W - params.gravity));
    const Vec3 Jw = params.inertia.cwiseProduct(omega_B);
    w.tau = params.inertia.cwiseProduct(omega_dot_B) + omega_B.cross(Jw);
    return w;
}

ColumnMapping ColumnMapping::identity() { return {}; }

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
    ColumnMapping m;
    auto read_names = [&](const char* key, std::map<std::string, std::string>& out,
                          const std::vector<std::string>& allowed) {
        if (!j.contains(key)) return;
        for (const auto& [k, v] : j.at(key).items()) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw InvalidInput(std::string("column mapping: unknown ") + key + " column '" + k + "'");
            out[k] = v.get<std::string>();
        }
    };
    try {
        read_names("pose", m.pose, kPoseColumns);
        read_names("onboard", m.onboard, kOnboardColumns);
        if (j.contains("scale"))
            for (const auto& [k, v] : j.at("scale").items()) m.scale[k] = v.get<double>();
        if (j.contains("time_scale")) m.time_scale = j.at("time_scale").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("column mapping: ") + e.what());
    }
    if (!(m.time_scale > 0.0)) throw InvalidInput("column mapping: time_scale must be positive");
    return m;
}

RawLog load_raw_log(const std::filesystem::path& pose_csv, const std::filesystem::path& onboard_csv,
                    const ColumnMapping& m) {
    RawLog raw;
    raw.name = pose_csv.stem().string();
    const CsvTable pose = read_csv(pose_csv);
    std::vector<std::vector<double>> pc;
    for (const auto& c : kPoseColumns) pc.push_back(mapped_column(pose, m.pose, m.scale, c, m.time_scale));
    for (std::size_t i = 0; i < pose.rows.size(); ++i) {
        PoseSample s;
        s.t = pc[0][i];
        s.p = {pc[1][i], pc[2][i], pc[3][i]};
        s.q = Quat(pc[4][i], pc[5][i], pc[6][i], pc[7][i]);
        if (!(s.q.norm() > 0.0)) throw InvalidInput("pose stream: zero quaternion");
        s.q.normalize();
        raw.pose.push_back(s);
    }
    const CsvTable onboard = read_csv(onboard_csv);
    std::vector<std::vector<double>> oc;
    for (const auto& c : kOnboardColumns)
        oc.push_back(mapped_column(onboard, m.onboard, m.scale, c, m.time_scale));
    for (std::size_t i = 0; i < onboard.rows.size(); ++i) {
        OnboardSample s;
        s.t = oc[0][i];
        s.gyro = {oc[1][i], oc[2][i], oc[3][i]};
        s.accel = {oc[4][i], oc[5][i], oc[6][i]};
        for (int k = 0; k < 4; ++k) s.rotor_speeds[k] = oc[7 + k][i];
        raw.onboard.push_back(s);
    }
    return raw;
}

void write_raw_log(const std::filesystem::path& pose_csv, const std::filesystem::path& onboard_csv,
                   const RawLog& raw) {
    CsvTable pose;
    pose.header = kPoseColumns;
    for (const auto& s : raw.pose)
        pose.rows.push_back({s.t, s.p.x(), s.p.y(), s.p.z(), s.q.w(), s.q.x(), s.q.y(), s.q.z()});
    write_csv(pose_csv, pose);
    CsvTable onboard;
    onboard.header = kOnboardColumns;
    for (const auto& s : raw.onboard)
        onboard.rows.push_back({s.t, s.gyro.x(), s.gyro.y(), s.gyro.z(), s.accel.x(), s.accel.y(),
                                s.accel.z(), s.rotor_speeds[0], s.rotor_speeds[1],
                                s.rotor_speeds[2], s.rotor_speeds[3]});
    write_csv(onboard_csv, onboard);
}

FlightLog assemble_flight_log(const RawLog& raw, const VehicleParams& params,
                              const AssembleOptions& options, AssembleReport* report) {
    if (raw.pose.size() < 4) throw InvalidInput("assemble_flight_log: pose stream needs >= 4 samples");
    if (raw.onboard.size() < 20)
        throw InvalidInput("assemble_flight_log: onboard stream needs >= 20 samples");
    for (std::size_t i = 1; i < raw.pose.size(); ++i)
        if (!(raw.pose[i].t > raw.pose[i - 1].t))
            throw InvalidInput("assemble_flight_log: pose time not increasing");
    for (std::size_t i = 1; i < raw.onboard.size(); ++i)
        if (!(raw.onboard[i].t > raw.onboard[i - 1].t))
            throw InvalidInput("assemble_flight_log: onboard time not increasing");

    std::vector<double> tp;
    std::vector<Vec3> pos;
    std::vector<Quat> att;
    for (const auto& s : raw.pose) {
        tp.push_back(s.t);
        pos.push_back(s.p);
        att.push_back(s.q);
    }
    const VectorSpline pos_spline(tp, pos, options.spline);
    const AttitudeSpline att_spline(tp, att, options.spline);

    std::vector<double> to;
    std::vector<Vec3> gyro;
    for (const auto& s : raw.onboard) {
        to.push_back(s.t);
        gyro.push_back(s.gyro);
    }
    const ClockSync clock = options.clock ? *options.clock : sync_clocks(att_spline, to, gyro, options.sync);

    // Uniform onboard grid; motor speeds interpolated onto it, then filtered.
    const double dt = median_step(to);
    const auto n_grid = static_cast<std::size_t>(std::floor((to.back() - to.front()) / dt + 1e-9)) + 1;
    std::vector<double> grid(n_grid);
    for (std::size_t k = 0; k < n_grid; ++k) grid[k] = to.front() + dt * static_cast<double>(k);
    const double cutoff = options.motor_cutoff_hz ? *options.motor_cutoff_hz : motor_cutoff_hz(params.tau_motor);
    std::array<std::vector<double>, kNumRotors> speeds;
    for (int r = 0; r < kNumRotors; ++r) {
        std::vector<double> w(to.size());
        for (std::size_t i = 0; i < to.size(); ++i) w[i] = raw.onboard[i].rotor_speeds[r];
        std::vector<double> g(n_grid);
        for (std::size_t k = 0; k < n_grid; ++k) g[k] = interp(to, w, grid[k]);
        speeds[r] = filter_motor_speeds(g, cutoff, 1.0 / dt);
    }

    FlightLog log;
    log.name = raw.name;
    const double t_lo = tp.front() + options.edge_trim;
    const double t_hi = tp.back() - options.edge_trim;
    for (std::size_t k = 0; k < n_grid; ++k) {
        const double t = clock.to_pose(grid[k]);
        if (t < t_lo || t > t_hi) continue;
        FlightSample s;
        s.t = t;
        s.p = pos_spline.value(t);
        s.v = pos_spline.derivative(t);
        s.a = pos_spline.second_derivative(t);
        s.q = att_spline.attitude(t);
        s.omega = att_spline.body_rate(t);
        s.omega_dot = att_spline.body_acceleration(t);
        for (int r = 0; r < kNumRotors; ++r) s.rotor_speeds[r] = std::max(0.0, speeds[r][k]);
        s.wrench = measured_wrench(s.q, s.omega, s.a, s.omega_dot, params);
        log.samples.push_back(s);
    }
    if (log.samples.empty()) throw InvalidInput("assemble_flight_log: streams do not overlap");
    if (report) {
        report->clock = clock;
        report->onboard_dt = dt;
    }
    return log;
}

DatasetSplit split_dataset(const std::vector<FlightLog>& logs, std::array<double, 3> fractions) {
    if (logs.empty()) throw InvalidInput("split_dataset: no logs");
    const double total = fractions[0] + fractions[1] + fractions[2];
    if (!(total > 0.0) || fractions[0] < 0.0 || fractions[1] < 0.0 || fractions[2] < 0.0)
        throw InvalidInput("split_dataset: invalid fractions");
    std::vector<double> speed(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) speed[i] = logs[i].mean_speed();
    std::vector<std::size_t> order(logs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return speed[a] < speed[b]; });

    DatasetSplit out;
    std::array<std::vector<std::size_t>*, 3> sets = {&out.train, &out.validation, &out.test};
    for (std::size_t k = 0; k < order.size(); ++k) {
        int pick = 0;
        double deficit = -1e300;
        for (int s = 0; s < 3; ++s) {
            const double d = fractions[s] / total * static_cast<double>(k + 1) -
                             static_cast<double>(sets[s]->size());
            if (d > deficit + 1e-12) {
                deficit = d;
                pick = s;
            }
        }
        sets[pick]->push_back(order[k]);
    }
    return out;
}

std::vector<FlightLog> filter_max_speed(const std::vector<FlightLog>& logs, double max_speed) {
    if (!(max_speed > 0.0)) throw InvalidInput("filter_max_speed: limit must be positive");
    std::vector<FlightLog> out;
    for (const auto& l : logs)
        if (l.max_speed() <= max_speed) out.push_back(l);
    return out;
}

} // namespace rotorsim
