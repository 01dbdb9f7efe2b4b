#include "rotorsim/core/errors.hpp"
#include "rotorsim/harness/controller.hpp"
#include "rotorsim/harness/metrics.hpp"
#include "rotorsim/harness/sweep.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace rotorsim;

namespace {

TrajectorySpec spec_of(TrajectoryFamily f, double speed = 1.0) {
    TrajectorySpec s;
    s.family = f;
    s.speed_scale = speed;
    return s;
}

const ModelResources& shared_resources() {
    static const ModelResources res = [] {
        SimConfig c;
        c.model = ModelSelection::parse("bem+nn");
        return load_resources(c);
    }();
    return res;
}

FlightLog positions(std::initializer_list<Vec3> ps, double dt = 0.01) {
    FlightLog l;
    double t = 0.0;
    for (const Vec3& p : ps) {
        FlightSample s;
        s.t = t;
        s.p = p;
        l.samples.push_back(s);
        t += dt;
    }
    return l;
}

} // namespace

TEST(Trajectory, LemniscateStartsAtCentreWithAnalyticVelocity) {
    const TrajectorySpec spec = spec_of(TrajectoryFamily::Lemniscate);
    const ReferencePoint r0 = generate_reference(spec, 0.0);
    EXPECT_NEAR((r0.p - spec.center).norm(), 0.0, 1e-15);
    // Gerono lemniscate (A sin th, B/2 sin 2th): velocity at th = 0 is w (A, B).
    const double w = spec.angular_rate;
    EXPECT_NEAR((r0.v - Vec3(w * spec.size_x, w * spec.size_y, 0.0)).norm(), 0.0, 1e-12);
    const double h = 1e-6;
    const Trajectory tr(spec);
    for (double t : {h, 1.0, 3.3, 7.0}) {
        const Vec3 fd = (tr.at(t + h).p - tr.at(t - h).p) / (2.0 * h);
        EXPECT_NEAR((fd - tr.at(t).v).norm(), 0.0, 1e-6) << t;
    }
}

TEST(Trajectory, AllFamiliesHaveConsistentDerivatives) {
    for (auto fam : all_trajectory_families()) {
        const Trajectory tr(spec_of(fam));
        const double T = tr.duration();
        ASSERT_GT(T, 0.0) << to_string(fam);
        const double h = 1e-5;
        for (double s : {0.1, 0.37, 0.5, 0.81}) {
            const double t = s * T;
            const ReferencePoint r = tr.at(t);
            const Vec3 fv = (tr.at(t + h).p - tr.at(t - h).p) / (2.0 * h);
            const Vec3 fa = (tr.at(t + h).v - tr.at(t - h).v) / (2.0 * h);
            EXPECT_NEAR((fv - r.v).norm(), 0.0, 1e-6 * std::max(1.0, r.v.norm())) << to_string(fam);
            EXPECT_NEAR((fa - r.a).norm(), 0.0, 1e-5 * std::max(1.0, r.a.norm())) << to_string(fam);
        }
        // Closed curves return to the start.
        EXPECT_NEAR((tr.at(T).p - tr.at(0.0).p).norm(), 0.0, 1e-9) << to_string(fam);
    }
}

TEST(Trajectory, SpeedScaleDoublesVelocity) {
    for (auto fam : all_trajectory_families()) {
        const Trajectory slow(spec_of(fam, 1.0)), fast(spec_of(fam, 2.0));
        EXPECT_NEAR(fast.duration(), 0.5 * slow.duration(), 1e-12);
        for (double t : {0.3, 1.7, 4.1}) {
            const ReferencePoint a = slow.at(t), b = fast.at(t / 2.0);
            EXPECT_NEAR((b.p - a.p).norm(), 0.0, 1e-12) << to_string(fam);
            EXPECT_NEAR((b.v - 2.0 * a.v).norm(), 0.0, 1e-12) << to_string(fam);
        }
    }
}

TEST(Trajectory, EllipseSatisfiesImplicitEquation) {
    const TrajectorySpec spec = spec_of(TrajectoryFamily::Ellipse);
    const Trajectory tr(spec);
    for (double t = 0.0; t <= tr.duration(); t += 0.05) {
        const Vec3 d = tr.at(t).p - spec.center;
        EXPECT_NEAR(std::pow(d.x() / spec.size_x, 2) + std::pow(d.y() / spec.size_y, 2), 1.0, 1e-12);
        EXPECT_EQ(d.z(), 0.0);
    }
}

TEST(Trajectory, OutsideWindowRejected) {
    const TrajectorySpec spec = spec_of(TrajectoryFamily::Ellipse);
    EXPECT_THROW(generate_reference(spec, -0.1), InvalidInput);
    EXPECT_THROW(generate_reference(spec, spec.duration() + 0.1), InvalidInput);
}

TEST(Trajectory, JsonRoundTripAndUnknownKeys) {
    TrajectorySpec spec = spec_of(TrajectoryFamily::RandomPoints, 1.5);
    spec.seed = 42;
    spec.laps = 2.0;
    const TrajectorySpec back = parse_trajectory_spec(to_json(spec));
    EXPECT_EQ(back.family, TrajectoryFamily::RandomPoints);
    EXPECT_EQ(back.seed, 42u);
    EXPECT_DOUBLE_EQ(back.speed_scale, 1.5);
    EXPECT_NEAR((Trajectory(back).at(3.0).p - Trajectory(spec).at(3.0).p).norm(), 0.0, 1e-12);
    EXPECT_THROW(parse_trajectory_spec(nlohmann::json::parse(R"({"family": "lemniscate", "radius": 2})")),
                 InvalidInput);
    EXPECT_THROW(parse_trajectory_family("spiral"), InvalidInput);
    for (auto fam : all_trajectory_families()) EXPECT_EQ(parse_trajectory_family(to_string(fam)), fam);
}

TEST(Controller, HoverCommandHoldsHover) {
    const VehicleParams vp = VehicleParams::defaults();
    const QuadraticCoeffs c{8.9e-7, 6.8e-9};
    const TrackingController ctl({}, vp, c);
    EXPECT_NEAR(ctl.hover_speed(), std::sqrt(vp.mass * 9.81 / (4.0 * c.c_lq)), 1e-9);
    QuadrotorState s;
    s.p_WB = Vec3(0, 0, 1.5);
    ReferencePoint ref;
    ref.p = s.p_WB;
    const RotorSpeeds w = ctl.command(s, ref);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(w[i], ctl.hover_speed(), 1e-6);
}

TEST(Controller, AllocationInvertsQuadraticMixer) {
    const VehicleParams vp = VehicleParams::defaults();
    const QuadraticCoeffs c{8.9e-7, 6.8e-9};
    const TrackingController ctl({}, vp, c);
    const Vec3 torque(0.02, -0.015, 0.004);
    const RotorSpeeds w = ctl.allocate(8.0, torque);
    Wrench total;
    for (int i = 0; i < 4; ++i) {
        const Wrench r = quadratic_rotor_wrench(w[i], c, vp.rotor_spin[i]);
        total.f += r.f;
        total.tau += r.tau + vp.rotor_positions[i].cross(r.f);
    }
    EXPECT_NEAR(total.f.z(), 8.0, 1e-9);
    EXPECT_NEAR((total.tau - torque).norm(), 0.0, 1e-9);
}

TEST(Controller, AllocationClampsToLimits) {
    const TrackingController ctl({}, VehicleParams::defaults(), {8.9e-7, 6.8e-9});
    const RotorSpeeds hi = ctl.allocate(1000.0, Vec3::Zero());
    const RotorSpeeds lo = ctl.allocate(0.0, Vec3(1.0, 0.0, 0.0));
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(hi[i], 3000.0);
        EXPECT_GE(lo[i], 0.0);
    }
}

TEST(Controller, GainsFromJson) {
    const auto j = nlohmann::json::parse(R"({"kp_pos": [1, 2, 3], "max_tilt_rad": 0.5})");
    const ControllerGains g = parse_controller_gains(j);
    EXPECT_EQ(g.kp_pos, Vec3(1, 2, 3));
    EXPECT_EQ(g.max_tilt, 0.5);
    EXPECT_EQ(g.kd_vel, ControllerGains{}.kd_vel);
    EXPECT_THROW(parse_controller_gains(nlohmann::json::parse(R"({"ki": 1})")), InvalidInput);
}

TEST(Models, ParseAndName) {
    ASSERT_EQ(all_model_selections().size(), 6u);
    for (const auto& m : all_model_selections()) EXPECT_EQ(ModelSelection::parse(m.name()), m);
    const ModelSelection m = ModelSelection::parse("bem+nn");
    EXPECT_EQ(m.rotor, RotorModelKind::Bem);
    EXPECT_TRUE(m.residual);
    EXPECT_THROW(ModelSelection::parse("blade"), InvalidInput);
    EXPECT_EQ(parse_model_list("all").size(), 6u);
    EXPECT_EQ(parse_model_list("fit,bem+nn").size(), 2u);
}

TEST(Models, ZeroBundleAddsNothing) {
    const auto& res = shared_resources();
    WrenchModel bem(ModelSelection::parse("bem"), res), bem_nn(ModelSelection::parse("bem+nn"), res);
    QuadrotorState s;
    s.v_WB = Vec3(2.0, -1.0, 0.3);
    const RotorSpeeds w = RotorSpeeds::uniform(1500.0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(bem_nn.advance_residual(i * 1e-3, s, w).f, Vec3::Zero());
    EXPECT_EQ(bem.rotor_wrench(s, w).f, bem_nn.rotor_wrench(s, w).f);
    WrenchModel none(ModelSelection::parse("none"), res);
    EXPECT_EQ(none.rotor_wrench(s, w).f, Vec3::Zero());
}

TEST(Simulation, HoverWithBemAndZeroNetSettles) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("bem+nn");
    cfg.trajectory = spec_of(TrajectoryFamily::Hover);
    cfg.duration = 8.0;
    cfg.initial_position_offset = Vec3(0.3, -0.2, 0.2);
    const SimResult r = track_and_simulate(cfg, shared_resources());
    ASSERT_EQ(r.status, SimStatus::Completed) << r.message;
    EXPECT_LT((r.log.samples.back().p - cfg.trajectory.center).norm(), 0.05);
    EXPECT_NEAR(r.end_time, 8.0, 1e-9);
}

TEST(Simulation, SlowLemniscateWithFitTracks) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("fit");
    cfg.trajectory = spec_of(TrajectoryFamily::Lemniscate);
    const SimResult r = track_and_simulate(cfg, shared_resources());
    ASSERT_EQ(r.status, SimStatus::Completed) << r.message;
    const double rmse = closed_loop_rmse(r.log, Trajectory(cfg.trajectory));
    EXPECT_TRUE(std::isfinite(rmse));
    EXPECT_LT(rmse, 0.2);
}

TEST(Simulation, ZeroGainsCrash) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("fit");
    cfg.trajectory = spec_of(TrajectoryFamily::Hover);
    cfg.duration = 30.0;
    cfg.gains = ControllerGains::zero();
    cfg.initial_body_rate = Vec3(0.5, -0.3, 0.0);
    const SimResult r = track_and_simulate(cfg, shared_resources());
    EXPECT_EQ(r.status, SimStatus::Crashed);
    EXPECT_EQ(exit_code(r.status), 2);
    EXPECT_LT(r.end_time, 30.0);
    EXPECT_FALSE(r.message.empty());
}

TEST(Simulation, WithoutRotorModelFallsAndCrashes) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("none");
    cfg.trajectory = spec_of(TrajectoryFamily::Hover);
    cfg.duration = 10.0;
    const SimResult r = track_and_simulate(cfg, shared_resources());
    EXPECT_EQ(r.status, SimStatus::Crashed);
}

TEST(Simulation, Deterministic) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("fit");
    cfg.trajectory = spec_of(TrajectoryFamily::RandomPoints);
    cfg.duration = 3.0;
    const SimResult a = track_and_simulate(cfg, shared_resources());
    const SimResult b = track_and_simulate(cfg, shared_resources());
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        ASSERT_EQ(a.log.samples[i].p, b.log.samples[i].p);
        ASSERT_EQ(a.log.samples[i].rotor_speeds.omega, b.log.samples[i].rotor_speeds.omega);
    }
}

TEST(Simulation, LoggedWrenchMatchesLoggedAcceleration) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("fit");
    cfg.trajectory = spec_of(TrajectoryFamily::SlantedCircle);
    cfg.duration = 2.0;
    const SimResult r = track_and_simulate(cfg, shared_resources());
    const VehicleParams& vp = shared_resources().vehicle;
    for (std::size_t i = 0; i < r.log.size(); i += 97) {
        const auto& s = r.log.samples[i];
        const Wrench m = measured_wrench(s.q, s.omega, s.a, s.omega_dot, vp);
        EXPECT_LT((m.f - s.wrench.f).norm(), 1e-9);
        EXPECT_LT((m.tau - s.wrench.tau).norm(), 1e-9);
    }
}

TEST(Simulation, ConfigFromJson) {
    const SimConfig cfg = load_sim_config(std::filesystem::path(ROTORSIM_CONFIG_DIR) / "sim_hover.json");
    EXPECT_EQ(cfg.model.name(), "bem+nn");
    EXPECT_EQ(cfg.trajectory.family, TrajectoryFamily::Hover);
    EXPECT_EQ(cfg.duration.value(), 10.0);
    EXPECT_EQ(cfg.vehicle_file.filename(), "vehicle.json");
    EXPECT_TRUE(cfg.vehicle_file.is_absolute() || cfg.vehicle_file.has_parent_path());
    EXPECT_THROW(parse_sim_config(nlohmann::json::parse(R"({"dt_s": -1})")), InvalidInput);
    EXPECT_THROW(parse_sim_config(nlohmann::json::parse(R"({"step": 1})")), InvalidInput);
}

TEST(Metrics, WrenchRmseExamples) {
    std::vector<Wrench> meas(50), pred(50);
    std::mt19937 rng(1);
    std::normal_distribution<double> nd;
    for (auto& w : meas) w = {Vec3(nd(rng), nd(rng), nd(rng)), Vec3(nd(rng), nd(rng), nd(rng))};
    const WrenchRmse zero = wrench_rmse(meas, meas);
    EXPECT_EQ(zero.F, 0.0);
    EXPECT_EQ(zero.M, 0.0);
    for (std::size_t i = 0; i < meas.size(); ++i) pred[i] = {meas[i].f + Vec3(0, 0, 1.0), meas[i].tau};
    const WrenchRmse e = wrench_rmse(pred, meas);
    EXPECT_NEAR(e.F_z, 1.0, 1e-12);
    EXPECT_NEAR(e.F_xy, 0.0, 1e-12);
    EXPECT_NEAR(e.F, std::sqrt(1.0 / 3.0), 1e-12);
    EXPECT_NEAR(e.M, 0.0, 1e-12);
    const WrenchRmse p = wrench_rmse(pred, meas, RmsePooling::PerAxisMean);
    EXPECT_NEAR(p.F, 1.0 / 3.0, 1e-12);
    EXPECT_THROW(wrench_rmse(std::span(pred).first(10), meas), InvalidInput);
}

TEST(Metrics, WrenchRmseGrowsWithNoise) {
    std::vector<Wrench> meas(500);
    double prev = 0.0;
    for (double sigma : {0.01, 0.1, 1.0}) {
        std::mt19937 rng(3);
        std::normal_distribution<double> nd(0.0, sigma);
        std::vector<Wrench> pred(meas.size());
        for (auto& w : pred) w = {Vec3(nd(rng), nd(rng), nd(rng)), 0.01 * Vec3(nd(rng), nd(rng), nd(rng))};
        const WrenchRmse e = wrench_rmse(pred, meas);
        EXPECT_GT(e.F, prev);
        EXPECT_NEAR(e.F, sigma, 0.1 * sigma);
        prev = e.F;
    }
}

TEST(Metrics, ClosedLoopRmseExamples) {
    const FlightLog a = positions({Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(2, 1, 1)});
    const FlightLog b = positions({Vec3(0.1, 0, 1), Vec3(1.1, 0, 1), Vec3(2.1, 1, 1)});
    EXPECT_EQ(closed_loop_rmse(a, a), 0.0);
    EXPECT_NEAR(closed_loop_rmse(a, b), 0.1, 1e-12);
    const FlightLog shifted = positions({Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(2, 1, 1)}, 0.02);
    EXPECT_THROW(closed_loop_rmse(a, shifted), InvalidInput);
    const FlightLog shorter = positions({Vec3(0, 0, 1)});
    EXPECT_THROW(closed_loop_rmse(a, shorter), InvalidInput);
}

TEST(Evaluation, TruthModelHasZeroError) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("fit");
    cfg.trajectory = spec_of(TrajectoryFamily::Ellipse);
    cfg.duration = 2.0;
    const SimResult r = track_and_simulate(cfg, shared_resources());
    const EvaluationRow row = evaluate_model(cfg.model, shared_resources(), {r.log});
    EXPECT_LT(row.rmse.F, 1e-9);
    EXPECT_LT(row.rmse.M, 1e-9);
    EXPECT_EQ(row.samples, r.log.size());
    const EvaluationRow other = evaluate_model(ModelSelection::parse("none"), shared_resources(), {r.log});
    EXPECT_GT(other.rmse.F_z, 1.0);
}

TEST(Sweep, TableHasModelColumnsAndCrashCells) {
    std::vector<SweepCase> cases;
    for (const char* m : {"none", "fit"}) cases.push_back({ModelSelection::parse(m), "hover", spec_of(TrajectoryFamily::Hover), nullptr});
    SimConfig base;
    base.duration = 6.0;
    const auto rows = run_sweep(cases, base, shared_resources(), 2);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].status, SimStatus::Crashed);
    EXPECT_TRUE(std::isnan(rows[0].rmse));
    EXPECT_EQ(rows[1].status, SimStatus::Completed);
    EXPECT_LT(rows[1].rmse, 1e-6);
    const auto path = std::filesystem::temp_directory_path() / "rotorsim_sweep_test.csv";
    write_sweep_table(path, rows);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::filesystem::remove(path);
    const std::string text = ss.str();
    EXPECT_NE(text.find("none"), std::string::npos);
    EXPECT_NE(text.find("fit"), std::string::npos);
    EXPECT_NE(text.find("crash"), std::string::npos);
}

TEST(Sweep, ReplaysRecordedLog) {
    SimConfig cfg;
    cfg.model = ModelSelection::parse("fit");
    cfg.trajectory = spec_of(TrajectoryFamily::Ellipse);
    cfg.duration = 4.0;
    const SimResult rec = track_and_simulate(cfg, shared_resources());
    const LogReference ref(rec.log);
    EXPECT_NEAR(ref.duration(), rec.log.samples.back().t - rec.log.samples.front().t, 1e-12);
    EXPECT_NEAR((ref.at(1.0).p - rec.log.samples[1000].p).norm(), 0.0, 1e-6);
    std::vector<SweepCase> cases{{ModelSelection::parse("fit"), "recorded", {}, &rec.log}};
    const auto rows = run_sweep(cases, cfg, shared_resources(), 1);
    ASSERT_EQ(rows[0].status, SimStatus::Completed);
    EXPECT_LT(rows[0].rmse, 0.2);
}
