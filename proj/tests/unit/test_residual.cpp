#include "rotorsim/core/errors.hpp"
#include "rotorsim/residual/bundle.hpp"
#include "rotorsim/residual/inference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rotorsim;

namespace {

void randomise(ResidualNetBundle& b, unsigned seed, float scale = 0.2f) {
    std::mt19937 rng(seed);
    std::normal_distribution<float> nd(0.0f, scale);
    for (auto& l : b.layers) {
        for (float& w : l.weight) w = nd(rng);
        for (float& w : l.bias) w = nd(rng);
    }
}

HistoryBuffer random_history(unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    HistoryBuffer h;
    for (int i = 0; i < kHistoryLength; ++i) {
        FeatureRow r;
        for (double& x : r) x = nd(rng);
        h.push(r);
    }
    return h;
}

// Single linear dense layer over the flattened [feature][time] history.
ResidualNetBundle linear_readout(unsigned seed) {
    ResidualNetBundle b;
    b.architecture = "custom";
    Layer l;
    l.kind = LayerKind::Dense;
    l.in = kInputFeatures * kHistoryLength;
    l.out = kResidualOutputs;
    l.activation = false;
    l.weight.assign(static_cast<std::size_t>(l.in * l.out), 0.0f);
    l.bias.assign(l.out, 0.0f);
    b.layers.push_back(l);
    randomise(b, seed, 1.0f);
    for (float& v : b.layers[0].bias) v = 0.0f;
    return b;
}

Eigen::Matrix<double, 6, 1> as_vector(const Wrench& w) {
    Eigen::Matrix<double, 6, 1> v;
    v << w.f, w.tau;
    return v;
}

} // namespace

TEST(Architecture, ParameterCountsNearTargets) {
    const std::pair<const char*, double> table[] = {
        {"tcn-small", 12000.0}, {"tcn-medium", 25000.0}, {"tcn-large", 72000.0}, {"mlp", 30000.0}};
    for (const auto& [tag, target] : table) {
        const auto n = static_cast<double>(build_architecture(tag).parameter_count());
        EXPECT_NEAR(n, target, 0.1 * target) << tag;
    }
    const auto medium = build_architecture("tcn-medium").parameter_count();
    EXPECT_GE(medium, 22500u);
    EXPECT_LE(medium, 27500u);
    const auto mlp = build_architecture("mlp").parameter_count();
    EXPECT_GE(mlp, 27000u);
    EXPECT_LE(mlp, 33000u);
}

TEST(Architecture, DeterministicPlans) {
    for (const auto& tag : architecture_tags())
        EXPECT_EQ(serialize_bundle(build_architecture(tag)), serialize_bundle(build_architecture(tag))) << tag;
}

TEST(Architecture, UnknownTagRejected) {
    EXPECT_THROW(build_architecture("transformer"), InvalidInput);
}

TEST(Architecture, PlansValidate) {
    for (const auto& tag : architecture_tags()) EXPECT_NO_THROW(build_architecture(tag).validate()) << tag;
}

TEST(Inference, ZeroWeightsGiveZeroWrench) {
    for (const auto& tag : architecture_tags()) {
        const Wrench w = predict_residual(build_architecture(tag), random_history(1));
        EXPECT_EQ(w.f, Vec3::Zero()) << tag;
        EXPECT_EQ(w.tau, Vec3::Zero()) << tag;
    }
}

TEST(Inference, LinearReadoutReturnsWeightColumn) {
    const ResidualNetBundle b = linear_readout(7);
    const int T = kHistoryLength;
    for (int j = 0; j < kInputFeatures; ++j)
        for (int t : {0, 7, T - 1}) {
            HistoryBuffer h;
            for (int k = 0; k < T; ++k) {
                FeatureRow r{};
                if (k == t) r[j] = 1.0;
                h.push(r);
            }
            const auto out = as_vector(predict_residual(b, h));
            const int col = j * T + t;
            for (int o = 0; o < kResidualOutputs; ++o)
                EXPECT_NEAR(out[o], b.layers[0].weight[o * b.layers[0].in + col], 1e-6) << j << "," << t;
        }
}

TEST(Inference, NormalisationRoundTrip) {
    // Output o reads input feature o at the newest time step, so the net is the
    // identity on normalised values.
    ResidualNetBundle b = linear_readout(1);
    auto& l = b.layers[0];
    std::fill(l.weight.begin(), l.weight.end(), 0.0f);
    for (int o = 0; o < kResidualOutputs; ++o) l.weight[o * l.in + o * kHistoryLength + kHistoryLength - 1] = 1.0f;
    b.input_mean = {0.5f, -1.0f, 2.0f, 0.0f, 0.25f, -0.75f, 1500.0f, 1500.0f, 1500.0f, 1500.0f};
    b.input_std = {2.0f, 0.5f, 1.0f, 4.0f, 0.25f, 1.5f, 300.0f, 300.0f, 300.0f, 300.0f};
    b.output_mean = {0.1f, -0.2f, 0.3f, 0.01f, -0.02f, 0.03f};
    b.output_std = {0.5f, 0.5f, 2.0f, 0.01f, 0.02f, 0.04f};
    const HistoryBuffer h = random_history(5);
    const auto out = as_vector(predict_residual(b, h));
    const FeatureRow& x = h.row(kHistoryLength - 1);
    for (int o = 0; o < kResidualOutputs; ++o) {
        const double z = (x[o] - b.input_mean[o]) / b.input_std[o];
        EXPECT_NEAR(out[o], b.output_std[o] * z + b.output_mean[o], 1e-6);
    }
}

TEST(Inference, Deterministic) {
    ResidualNetBundle b = build_architecture("tcn-medium");
    randomise(b, 3);
    const HistoryBuffer h = random_history(4);
    const Wrench a = predict_residual(b, h);
    InferenceWorkspace ws(b);
    for (int i = 0; i < 3; ++i) {
        const Wrench c = predict_residual(b, h, ws);
        EXPECT_EQ(a.f, c.f);
        EXPECT_EQ(a.tau, c.tau);
    }
}

TEST(Inference, OldestSampleReachesTheOutput) {
    for (const auto& tag : architecture_tags()) {
        ResidualNetBundle b = build_architecture(tag);
        randomise(b, 11);
        HistoryBuffer h = random_history(12);
        const auto base = as_vector(predict_residual(b, h));
        HistoryBuffer p;
        for (int k = 0; k < kHistoryLength; ++k) {
            FeatureRow r = h.row(k);
            if (k == 0) r[2] += 1.0;
            p.push(r);
        }
        EXPECT_GT((as_vector(predict_residual(b, p)) - base).norm(), 1e-6) << tag;
    }
}

TEST(Inference, ConvolutionIsCausal) {
    // Strip the dense head down to a readout of the first time step of every
    // channel: changing later samples must not move it.
    ResidualNetBundle b = build_architecture("tcn-small");
    randomise(b, 21);
    b.layers.resize(3);
    const int C = b.layers[2].out;
    Layer head;
    head.kind = LayerKind::Dense;
    head.in = C * kHistoryLength;
    head.out = kResidualOutputs;
    head.activation = false;
    head.weight.assign(static_cast<std::size_t>(head.in * head.out), 0.0f);
    head.bias.assign(head.out, 0.0f);
    for (int o = 0; o < kResidualOutputs; ++o)
        for (int c = 0; c < C; ++c) head.weight[o * head.in + c * kHistoryLength] = 0.1f * (o + 1) + 0.01f * c;
    b.layers.push_back(head);
    b.architecture = "custom";
    b.validate();

    HistoryBuffer h = random_history(8);
    const auto base = as_vector(predict_residual(b, h));
    HistoryBuffer p;
    for (int k = 0; k < kHistoryLength; ++k) {
        FeatureRow r = h.row(k);
        if (k > 0)
            for (double& x : r) x += 3.0;
        p.push(r);
    }
    EXPECT_EQ(as_vector(predict_residual(b, p)), base);
}

TEST(Inference, PartialHistoryNotReady) {
    HistoryBuffer h;
    for (int i = 0; i < kHistoryLength - 1; ++i) h.push(FeatureRow{});
    EXPECT_THROW(predict_residual(build_architecture("mlp"), h), NotReady);
}

TEST(Inference, ShapeMismatchRejected) {
    ResidualNetBundle b = build_architecture("mlp");
    b.layers[1].in += 1;
    HistoryBuffer h = random_history(1);
    EXPECT_THROW(predict_residual(b, h), BundleInvalid);
}

TEST(History, KeepsNewestRowsOldestFirst) {
    HistoryBuffer h(3);
    for (int i = 0; i < 5; ++i) {
        FeatureRow r{};
        r[0] = i;
        h.push(r);
    }
    EXPECT_TRUE(h.full());
    EXPECT_EQ(h.row(0)[0], 2.0);
    EXPECT_EQ(h.row(2)[0], 4.0);
    h.clear();
    EXPECT_EQ(h.size(), 0);
}

TEST(History, FeaturesAreBodyVelocityRatesAndSpeeds) {
    QuadrotorState s;
    s.q_WB = Quat(Eigen::AngleAxisd(std::acos(-1.0) / 2.0, Vec3::UnitZ()));
    s.v_WB = Vec3(1.0, 0.0, 0.0);
    s.omega_B = Vec3(0.1, 0.2, 0.3);
    RotorSpeeds w;
    w.omega = {1000.0, 1100.0, 1200.0, 1300.0};
    const FeatureRow r = make_features(s, w);
    EXPECT_NEAR(r[0], 0.0, 1e-15);
    EXPECT_NEAR(r[1], -1.0, 1e-15);
    EXPECT_EQ(r[3], 0.1);
    EXPECT_EQ(r[9], 1300.0);
}

TEST(Decimator, AlternatingStridesFromMillisecondStream) {
    HistoryDecimator d(2.5e-3, 1e-3);
    std::vector<int> kept;
    for (int i = 0; i < 41; ++i)
        if (d.accept(i * 1e-3)) kept.push_back(i);
    ASSERT_GE(kept.size(), 9u);
    for (std::size_t k = 1; k < kept.size(); ++k) EXPECT_EQ(kept[k] - kept[k - 1], k % 2 ? 2 : 3) << k;
    // Average spacing over a long run is the nominal 2.5 ms.
    d.reset();
    int first = -1, last = -1, n = 0;
    for (int i = 0; i < 100000; ++i)
        if (d.accept(i * 1e-3)) {
            if (first < 0) first = i;
            last = i;
            ++n;
        }
    EXPECT_NEAR((last - first) * 1e-3 / (n - 1), 2.5e-3, 0.01 * 2.5e-3);
}

TEST(Estimator, ZeroUntilHistoryFills) {
    auto b = std::make_shared<ResidualNetBundle>(build_architecture("mlp"));
    b->layers.back().bias = {1.0f, 2.0f, 3.0f, 0.1f, 0.2f, 0.3f};
    ResidualEstimator est(b, 1e-3);
    int steps_until_ready = -1;
    for (int i = 0; i < 100; ++i) {
        const Wrench& w = est.update(i * 1e-3, QuadrotorState{}, RotorSpeeds{});
        if (w.f.z() != 0.0) {
            steps_until_ready = i;
            break;
        }
    }
    // 20 rows at 2.5 ms average spacing, first row at t = 0.
    EXPECT_GE(steps_until_ready, 45);
    EXPECT_LE(steps_until_ready, 50);
    EXPECT_EQ(est.current().f, Vec3(1.0, 2.0, 3.0));
    est.reset();
    EXPECT_EQ(est.current().f, Vec3::Zero());
}

TEST(Bundle, RoundTripIsByteIdentical) {
    for (const auto& tag : architecture_tags()) {
        ResidualNetBundle b = build_architecture(tag);
        randomise(b, 99);
        b.input_mean[3] = 0.125f;
        b.output_std[5] = 3.5f;
        const std::string text = serialize_bundle(b);
        const ResidualNetBundle back = parse_bundle(text);
        EXPECT_EQ(serialize_bundle(back), text) << tag;
        EXPECT_EQ(back.layers.back().weight, b.layers.back().weight);
        EXPECT_EQ(back.parameter_count(), b.parameter_count());
    }
}

TEST(Bundle, FileRoundTripPredictsIdentically) {
    ResidualNetBundle b = build_architecture("tcn-small");
    randomise(b, 5);
    const auto path = std::filesystem::temp_directory_path() / "rotorsim_bundle_test.txt";
    save_bundle(path, b);
    const ResidualNetBundle back = load_bundle(path);
    std::filesystem::remove(path);
    const HistoryBuffer h = random_history(6);
    EXPECT_EQ(as_vector(predict_residual(b, h)), as_vector(predict_residual(back, h)));
}

TEST(Bundle, Base64IsLittleEndianFloat32) {
    EXPECT_EQ(encode_float_array({1.0f}), "AACAPw==");
    EXPECT_EQ(encode_float_array({}), "");
    const std::vector<float> v{1.0f, -2.5f, 3.14159274f, 1e-30f};
    EXPECT_EQ(decode_float_array(encode_float_array(v)), v);
    EXPECT_THROW(decode_float_array("AAC"), BundleInvalid);
    EXPECT_THROW(decode_float_array("AA*Pw==="), BundleInvalid);
}

TEST(Bundle, MalformedFilesRejected) {
    const std::string good = serialize_bundle(build_architecture("mlp"));
    auto replace = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        const auto pos = s.find(from);
        EXPECT_NE(pos, std::string::npos) << from;
        return s.replace(pos, from.size(), to);
    };
    EXPECT_THROW(parse_bundle(replace("# rotorsim", "# other")), BundleInvalid);
    EXPECT_THROW(parse_bundle(replace("format_version: 1", "format_version: 2")), BundleInvalid);
    EXPECT_THROW(parse_bundle(replace("\nend\n", "\n")), BundleInvalid);
    EXPECT_THROW(parse_bundle(replace("in=200", "in=201")), BundleInvalid);
    EXPECT_THROW(parse_bundle(replace("parameter_count: ", "parameter_count: 1")), BundleInvalid);
    EXPECT_THROW(parse_bundle(replace("activation=linear", "activation=tanh")), BundleInvalid);
    EXPECT_THROW(parse_bundle(replace("layer: dense", "layer: lstm")), BundleInvalid);
    EXPECT_THROW(parse_bundle(good.substr(0, good.size() / 2)), BundleInvalid);
}

TEST(Bundle, ValidationCatchesBadStatistics) {
    ResidualNetBundle b = build_architecture("tcn-small");
    b.input_std[0] = 0.0f;
    EXPECT_THROW(b.validate(), BundleInvalid);
    b = build_architecture("tcn-small");
    b.output_mean.pop_back();
    EXPECT_THROW(b.validate(), BundleInvalid);
    b = build_architecture("tcn-small");
    b.layers[0].weight[0] = std::nanf("");
    EXPECT_THROW(b.validate(), BundleInvalid);
}
