#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rotorsim {

inline constexpr int kHistoryLength = 20;
inline constexpr int kInputFeatures = 10; // v_B (3), omega_B (3), rotor speeds (4)
inline constexpr int kResidualOutputs = 6; // f (3), tau (3)

enum class LayerKind {
    Dense,        // y = W x + b; grouped when groups > 1
    CausalConv1d, // over the time axis, left zero padding
};

/// One layer of the residual network.
///
/// Dense: weight is [out][in / groups]; group g maps inputs
/// [g in/G, (g+1) in/G) to outputs [g out/G, (g+1) out/G).
/// CausalConv1d: weight is [out][in][kernel]; tap k reads t - (kernel-1-k) * dilation.
/// A dense layer following a convolution consumes the flattened [channel][time]
/// tensor (index c * T + t).
struct Layer {
    LayerKind kind = LayerKind::Dense;
    int in = 0;
    int out = 0;
    int kernel = 1;
    int dilation = 1;
    int groups = 1;
    bool activation = true; // leaky ReLU after the layer
    std::vector<float> weight;
    std::vector<float> bias;

    std::size_t weight_count() const;
    std::size_t parameter_count() const { return weight_count() + static_cast<std::size_t>(out); }
};

/// Architecture, weights and frozen normalisation statistics of a residual net.
struct ResidualNetBundle {
    std::string architecture; // mlp | tcn-small | tcn-medium | tcn-large | custom
    double leaky_relu_slope = 0.01;
    int history_length = kHistoryLength;
    int input_features = kInputFeatures;
    int outputs = kResidualOutputs;
    std::vector<Layer> layers;
    std::vector<float> input_mean = std::vector<float>(kInputFeatures, 0.0f);
    std::vector<float> input_std = std::vector<float>(kInputFeatures, 1.0f);
    std::vector<float> output_mean = std::vector<float>(kResidualOutputs, 0.0f);
    std::vector<float> output_std = std::vector<float>(kResidualOutputs, 1.0f);

    std::size_t parameter_count() const;

    /// Checks shape chaining from [features][history] to outputs, array sizes,
    /// finiteness and positive std. Throws BundleInvalid.
    void validate() const;
};

/// Layer plan with zero-filled weights. Throws InvalidInput for unknown tags.
ResidualNetBundle build_architecture(const std::string& tag);

/// Tags accepted by build_architecture.
const std::vector<std::string>& architecture_tags();

void write_bundle(std::ostream& out, const ResidualNetBundle& bundle);
void save_bundle(const std::filesystem::path& path, const ResidualNetBundle& bundle);
std::string serialize_bundle(const ResidualNetBundle& bundle);

/// Throws BundleInvalid on malformed input or failed validation.
ResidualNetBundle read_bundle(std::istream& in);
ResidualNetBundle load_bundle(const std::filesystem::path& path);
ResidualNetBundle parse_bundle(const std::string& text);

/// Little-endian float32 array <-> base64 text.
std::string encode_float_array(const std::vector<float>& values);
std::vector<float> decode_float_array(const std::string& text);

} // namespace rotorsim
