#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/core/vehicle.hpp"
#include "rotorsim/pipeline/spline.hpp"
#include "rotorsim/pipeline/sync.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rotorsim {

/// One fused sample. Velocities and accelerations are world-frame, rates and
/// the measured wrench body-frame.
struct FlightSample {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    Quat q = Quat::Identity();
    Vec3 v = Vec3::Zero();
    Vec3 omega = Vec3::Zero();
    Vec3 omega_dot = Vec3::Zero();
    Vec3 a = Vec3::Zero();
    RotorSpeeds rotor_speeds;
    Wrench wrench;

    QuadrotorState state() const { return {p, q, v, omega}; }
};

struct FlightLog {
    std::string name;
    std::vector<FlightSample> samples;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    double mean_speed() const;
    double max_speed() const;
};

/// Column names of the processed-log CSV, in file order.
const std::vector<std::string>& flight_log_columns();

void write_flight_log(const std::filesystem::path& path, const FlightLog& log);
FlightLog read_flight_log(const std::filesystem::path& path);
/// Every *.csv in a directory, sorted by file name.
std::vector<FlightLog> read_flight_logs(const std::filesystem::path& dir);

/// Body-frame wrench that produces the given accelerations:
/// f = m q^-1 (a_W - g), tau = J omega_dot + omega x J omega.
Wrench measured_wrench(const Quat& q_WB, const Vec3& omega_B, const Vec3& a_W,
                       const Vec3& omega_dot_B, const VehicleParams& params);

struct PoseSample {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    Quat q = Quat::Identity();
};

struct OnboardSample {
    double t = 0.0;
    Vec3 gyro = Vec3::Zero();
    Vec3 accel = Vec3::Zero();
    RotorSpeeds rotor_speeds;
};

/// Two asynchronously clocked streams of one flight.
struct RawLog {
    std::string name;
    std::vector<PoseSample> pose;
    std::vector<OnboardSample> onboard;
};

/// Maps canonical column names (t, px, ..., qz / t, gx, ..., w4) to the names
/// in a foreign CSV, with optional unit scales per column.
struct ColumnMapping {
    std::map<std::string, std::string> pose;
    std::map<std::string, std::string> onboard;
    std::map<std::string, double> scale; // canonical name -> factor, default 1
    double time_scale = 1.0;             // applied to both t columns

    static ColumnMapping identity();
    static ColumnMapping from_json(const nlohmann::json& j);
};

RawLog load_raw_log(const std::filesystem::path& pose_csv, const std::filesystem::path& onboard_csv,
                    const ColumnMapping& mapping = ColumnMapping::identity());
void write_raw_log(const std::filesystem::path& pose_csv, const std::filesystem::path& onboard_csv,
                   const RawLog& raw);

struct AssembleOptions {
    SplineOptions spline;
    ClockSyncOptions sync;
    /// Motor-speed low-pass cutoff; unset means 1 / (2 pi tau_motor).
    std::optional<double> motor_cutoff_hz;
    double edge_trim = 0.05; // [s] dropped at both ends of the overlap
    /// Skip the correlation search and use this clock model.
    std::optional<ClockSync> clock;
};

struct AssembleReport {
    ClockSync clock;
    double onboard_dt = 0.0;
};

/// Splines the pose stream, synchronises the clocks, filters motor speeds and
/// resamples everything on the onboard grid, expressed in pose time.
FlightLog assemble_flight_log(const RawLog& raw, const VehicleParams& params,
                              const AssembleOptions& options = {},
                              AssembleReport* report = nullptr);

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Whole-trajectory 70/20/10 split stratified by mean speed: logs are visited
/// from slowest to fastest and each goes to the subset furthest below its
/// target share. Throws InvalidInput for an empty set.
DatasetSplit split_dataset(const std::vector<FlightLog>& logs,
                           std::array<double, 3> fractions = {0.7, 0.2, 0.1});

/// Keeps logs whose peak speed does not exceed max_speed.
std::vector<FlightLog> filter_max_speed(const std::vector<FlightLog>& logs, double max_speed);

} // namespace rotorsim
