#include "rotorsim/residual/bundle.hpp"

#include "rotorsim/core/errors.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace rotorsim {

namespace {

namespace b64 = boost::beast::detail::base64;

constexpr int kFormatVersion = 1;
constexpr const char* kMagic = "# rotorsim residual-net bundle";

struct Plan {
    std::vector<int> channels; // conv widths; empty for the MLP
    std::vector<int> hidden;   // dense widths before the grouped head
    int head_groups = 2;
};

const std::map<std::string, Plan>& plans() {
    // Channel/hidden widths picked so the counts land on 12k, 25k, 72k and 30k.
    static const std::map<std::string, Plan> p = {
        {"tcn-small", {{8, 8, 8}, {70}, 2}},
        {"tcn-medium", {{16, 16, 16}, {72}, 2}},
        {"tcn-large", {{32, 32, 32}, {100}, 2}},
        {"mlp", {{}, {120, 48}, 2}},
    };
    return p;
}

Layer make_layer(LayerKind kind, int in, int out, int kernel, int dilation, int groups, bool act) {
    Layer l;
    l.kind = kind;
    l.in = in;
    l.out = out;
    l.kernel = kernel;
    l.dilation = dilation;
    l.groups = groups;
    l.activation = act;
    l.weight.assign(l.weight_count(), 0.0f);
    l.bias.assign(out, 0.0f);
    return l;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& v, const std::string& what) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw BundleInvalid("bundle: bad integer for " + what + ": '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw BundleInvalid("bundle: bad number for " + what + ": '" + v + "'");
    }
}

std::string layer_line(const Layer& l) {
    std::ostringstream s;
    if (l.kind == LayerKind::Dense)
        s << "dense in=" << l.in << " out=" << l.out << " groups=" << l.groups;
    else
        s << "causal_conv1d in=" << l.in << " out=" << l.out << " kernel=" << l.kernel
          << " dilation=" << l.dilation;
    s << " activation=" << (l.activation ? "leaky_relu" : "linear");
    return s.str();
}

Layer parse_layer_line(const std::string& text) {
    std::istringstream s(text);
    std::string kind;
    s >> kind;
    Layer l;
    if (kind == "dense")
        l.kind = LayerKind::Dense;
    else if (kind == "causal_conv1d")
        l.kind = LayerKind::CausalConv1d;
    else
        throw BundleInvalid("bundle: unknown layer kind '" + kind + "'");
    std::string tok;
    bool have_act = false;
    while (s >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw BundleInvalid("bundle: bad layer token '" + tok + "'");
        const std::string k = tok.substr(0, eq);
        const std::string v = tok.substr(eq + 1);
        if (k == "in") l.in = parse_int(v, k);
        else if (k == "out") l.out = parse_int(v, k);
        else if (k == "kernel") l.kernel = parse_int(v, k);
        else if (k == "dilation") l.dilation = parse_int(v, k);
        else if (k == "groups") l.groups = parse_int(v, k);
        else if (k == "activation") {
            if (v != "leaky_relu" && v != "linear")
                throw BundleInvalid("bundle: unknown activation '" + v + "'");
            l.activation = v == "leaky_relu";
            have_act = true;
        } else
            throw BundleInvalid("bundle: unknown layer attribute '" + k + "'");
    }
    if (!have_act) throw BundleInvalid("bundle: layer without activation");
    return l;
}

} // namespace

std::size_t Layer::weight_count() const {
    if (in <= 0 || out <= 0) return 0;
    if (kind == LayerKind::Dense) {
        if (groups <= 0) return 0;
        return static_cast<std::size_t>(out) * static_cast<std::size_t>(in / groups);
    }
    return static_cast<std::size_t>(out) * in * kernel;
}

std::size_t ResidualNetBundle::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.parameter_count();
    return n;
}

void ResidualNetBundle::validate() const {
    if (history_length <= 0 || input_features <= 0 || outputs <= 0)
        throw BundleInvalid("bundle: non-positive dimensions");
    if (!(std::isfinite(leaky_relu_slope)))
        throw BundleInvalid("bundle: non-finite leaky-ReLU slope");
    if (layers.empty()) throw BundleInvalid("bundle: no layers");
    auto check_stats = [](const std::vector<float>& v, std::size_t n, const char* name,
                          bool positive) {
        if (v.size() != n)
            throw BundleInvalid(std::string("bundle: ") + name + " has " +
                                std::to_string(v.size()) + " entries, expected " +
                                std::to_string(n));
        for (float x : v)
            if (!std::isfinite(x) || (positive && !(x > 0.0f)))
                throw BundleInvalid(std::string("bundle: invalid value in ") + name);
    };
    check_stats(input_mean, input_features, "input_mean", false);
    check_stats(input_std, input_features, "input_std", true);
    check_stats(output_mean, outputs, "output_mean", false);
    check_stats(output_std, outputs, "output_std", true);

    int channels = input_features;
    bool flat = false;
    int width = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        const std::string where = "bundle: layer " + std::to_string(i) + ": ";
        if (l.in <= 0 || l.out <= 0) throw BundleInvalid(where + "non-positive size");
        if (l.kind == LayerKind::CausalConv1d) {
            if (flat) throw BundleInvalid(where + "convolution after a dense layer");
            if (l.kernel < 1 || l.dilation < 1) throw BundleInvalid(where + "bad kernel/dilation");
            if (l.in != channels)
                throw BundleInvalid(where + "expects " + std::to_string(l.in) +
                                    " channels, gets " + std::to_string(channels));
            channels = l.out;
        } else {
            const int n = flat ? width : channels * history_length;
            if (l.in != n)
                throw BundleInvalid(where + "expects " + std::to_string(l.in) +
                                    " inputs, gets " + std::to_string(n));
            if (l.groups < 1 || l.in % l.groups != 0 || l.out % l.groups != 0)
                throw BundleInvalid(where + "sizes not divisible by groups");
            flat = true;
            width = l.out;
        }
        if (l.weight.size() != l.weight_count() || l.bias.size() != static_cast<std::size_t>(l.out))
            throw BundleInvalid(where + "weight/bias array size mismatch");
        for (float w : l.weight)
            if (!std::isfinite(w)) throw BundleInvalid(where + "non-finite weight");
        for (float b : l.bias)
            if (!std::isfinite(b)) throw BundleInvalid(where + "non-finite bias");
    }
    if (!flat || width != outputs)
        throw BundleInvalid("bundle: network does not end in " + std::to_string(outputs) +
                            " outputs");
}

const std::vector<std::string>& architecture_tags() {
    static const std::vector<std::string> tags = {"mlp", "tcn-small", "tcn-medium", "tcn-large"};
    return tags;
}

ResidualNetBundle build_architecture(const std::string& tag) {
    const auto it = plans().find(tag);
    if (it == plans().end()) throw InvalidInput("unknown architecture tag '" + tag + "'");
    const Plan& plan = it->second;

    ResidualNetBundle b;
    b.architecture = tag;
    int channels = kInputFeatures;
    int dilation = 1;
    for (int c : plan.channels) {
        b.layers.push_back(make_layer(LayerKind::CausalConv1d, channels, c, 3, dilation, 1, true));
        channels = c;
        dilation *= 2;
    }
    int width = channels * kHistoryLength;
    for (int h : plan.hidden) {
        b.layers.push_back(make_layer(LayerKind::Dense, width, h, 1, 1, 1, true));
        width = h;
    }
    // Separate force and torque heads.
    b.layers.push_back(
        make_layer(LayerKind::Dense, width, kResidualOutputs, 1, 1, plan.head_groups, false));
    return b;
}

std::string encode_float_array(const std::vector<float>& values) {
    std::vector<unsigned char> bytes(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t u = std::bit_cast<std::uint32_t>(values[i]);
        for (int k = 0; k < 4; ++k) bytes[4 * i + k] = static_cast<unsigned char>(u >> (8 * k));
    }
    std::string out(b64::encoded_size(bytes.size()), '\0');
    out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<float> decode_float_array(const std::string& text) {
    if (text.size() % 4 != 0) throw BundleInvalid("bundle: base64 length not a multiple of 4");
    std::vector<unsigned char> bytes(b64::decoded_size(text.size()));
    const auto [written, read] = b64::decode(bytes.data(), text.data(), text.size());
    // The decoder stops at the first padding character.
    const std::size_t pad = text.size() - read;
    if (pad > 2 || text.find_first_not_of('=', read) != std::string::npos)
        throw BundleInvalid("bundle: invalid base64 character");
    if (written % 4 != 0) throw BundleInvalid("bundle: array byte count not a multiple of 4");
    std::vector<float> out(written / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t u = 0;
        for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(bytes[4 * i + k]) << (8 * k);
        out[i] = std::bit_cast<float>(u);
    }
    return out;
}

void write_bundle(std::ostream& out, const ResidualNetBundle& b) {
    b.validate();
    char slope[64];
    std::snprintf(slope, sizeof slope, "%.9g", b.leaky_relu_slope);
    out << kMagic << '\n'
        << "format_version: " << kFormatVersion << '\n'
        << "architecture: " << b.architecture << '\n'
        << "leaky_relu_slope: " << slope << '\n'
        << "history_length: " << b.history_length << '\n'
        << "input_features: " << b.input_features << '\n'
        << "outputs: " << b.outputs << '\n'
        << "parameter_count: " << b.parameter_count() << '\n'
        << "layer_count: " << b.layers.size() << '\n';
    for (const auto& l : b.layers) out << "layer: " << layer_line(l) << '\n';
    out << "input_mean: " << encode_float_array(b.input_mean) << '\n'
        << "input_std: " << encode_float_array(b.input_std) << '\n'
        << "output_mean: " << encode_float_array(b.output_mean) << '\n'
        << "output_std: " << encode_float_array(b.output_std) << '\n';
    for (std::size_t i = 0; i < b.layers.size(); ++i) {
        out << "layer" << i << ".weight: " << encode_float_array(b.layers[i].weight) << '\n';
        out << "layer" << i << ".bias: " << encode_float_array(b.layers[i].bias) << '\n';
    }
    out << "end\n";
}

std::string serialize_bundle(const ResidualNetBundle& bundle) {
    std::ostringstream s;
    write_bundle(s, bundle);
    return s.str();
}

void save_bundle(const std::filesystem::path& path, const ResidualNetBundle& bundle) {
    const std::string text = serialize_bundle(bundle);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot write bundle " + path.string());
    f << text;
}

ResidualNetBundle read_bundle(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::vector<Layer> layers;
    std::string line;
    bool ended = false;
    if (!std::getline(in, line) || trim(line) != kMagic)
        throw BundleInvalid("bundle: missing header line '" + std::string(kMagic) + "'");
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line == "end") {
            ended = true;
            break;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw BundleInvalid("bundle: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "layer") {
            layers.push_back(parse_layer_line(value));
            continue;
        }
        if (!kv.emplace(key, value).second) throw BundleInvalid("bundle: duplicate key '" + key + "'");
    }
    if (!ended) throw BundleInvalid("bundle: missing 'end' line");

    auto take = [&](const std::string& key) -> std::string {
        const auto it = kv.find(key);
        if (it == kv.end()) throw BundleInvalid("bundle: missing key '" + key + "'");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    const int version = parse_int(take("format_version"), "format_version");
    if (version != kFormatVersion)
        throw BundleInvalid("bundle: unsupported format_version " + std::to_string(version));
    ResidualNetBundle b;
    b.architecture = take("architecture");
    b.leaky_relu_slope = parse_double(take("leaky_relu_slope"), "leaky_relu_slope");
    b.history_length = parse_int(take("history_length"), "history_length");
    b.input_features = parse_int(take("input_features"), "input_features");
    b.outputs = parse_int(take("outputs"), "outputs");
    const int declared = parse_int(take("parameter_count"), "parameter_count");
    const int count = parse_int(take("layer_count"), "layer_count");
    if (count != static_cast<int>(layers.size()))
        throw BundleInvalid("bundle: layer_count does not match layer lines");
    b.input_mean = decode_float_array(take("input_mean"));
    b.input_std = decode_float_array(take("input_std"));
    b.output_mean = decode_float_array(take("output_mean"));
    b.output_std = decode_float_array(take("output_std"));
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].weight = decode_float_array(take("layer" + std::to_string(i) + ".weight"));
        layers[i].bias = decode_float_array(take("layer" + std::to_string(i) + ".bias"));
    }
    b.layers = std::move(layers);
    if (!kv.empty()) throw BundleInvalid("bundle: unknown key '" + kv.begin()->first + "'");
    b.validate();
    if (static_cast<std::size_t>(declared) != b.parameter_count())
        throw BundleInvalid("bundle: declared parameter_count " + std::to_string(declared) +
                            " but layers hold " + std::to_string(b.parameter_count()));
    return b;
}

ResidualNetBundle parse_bundle(const std::string& text) {
    std::istringstream s(text);
    return read_bundle(s);
}

ResidualNetBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open bundle " + path.string());
    return read_bundle(f);
}

} // namespace rotorsim
