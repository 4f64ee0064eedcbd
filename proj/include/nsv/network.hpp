#ifndef NSV_NETWORK_HPP
#define NSV_NETWORK_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nsv {

enum class Activation { ReLU, Identity };

// One fully connected layer: rows of `weights` are neurons, columns are the
// previous layer's outputs.
struct Layer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd biases;
    Activation activation = Activation::ReLU;
};

// Feed-forward ReLU network with NNet-style normalization metadata.
// Immutable after construction; safe to share across threads.
class Network {
public:
    // Validates the layer chain, normalization vector lengths and range
    // positivity; throws nsv::Error on violation. Hidden layers must use
    // ReLU and the last layer Identity.
    Network(std::vector<Layer> layers,
            std::vector<double> input_mins,
            std::vector<double> input_maxes,
            std::vector<double> means,
            std::vector<double> ranges);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return output_dim_; }
    std::size_t num_layers() const { return layers_.size(); }
    const std::vector<Layer>& layers() const { return layers_; }

    const std::vector<double>& input_mins() const { return input_mins_; }
    const std::vector<double>& input_maxes() const { return input_maxes_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& ranges() const { return ranges_; }

    // (x_i - mean_i) / range_i per input coordinate.
    Eigen::VectorXd normalize_input(const Eigen::VectorXd& x) const;

    // Layer-by-layer evaluation in double precision. When normalized is
    // false the input is normalized first. The result stays in normalized
    // output units.
    Eigen::VectorXd forward(const Eigen::VectorXd& x, bool normalized = true) const;

    // y * range_out + mean_out elementwise; inverse of output normalization.
    Eigen::VectorXd denormalize_output(const Eigen::VectorXd& y) const;
    Eigen::VectorXd normalize_output(const Eigen::VectorXd& y) const;

    bool operator==(const Network& other) const;

private:
    std::vector<Layer> layers_;
    std::size_t input_dim_;
    std::size_t output_dim_;
    std::vector<double> input_mins_;
    std::vector<double> input_maxes_;
    std::vector<double> means_;
    std::vector<double> ranges_;
};

// Parse the NNet text layout: `//` comment lines, a
// numLayers,inputSize,outputSize,maxLayerSize header, a layer-sizes line,
// one unused flag line, input minima/maxima lines, means and ranges lines,
// then per layer the weight rows followed by one bias row per neuron.
// Accepts scientific notation; reports malformed input with line numbers.
Network parse_nnet(std::istream& in);
Network parse_nnet(const std::string& text);
Network load_nnet(const std::filesystem::path& file);

// Inverse of parse_nnet: floats are printed with 17 significant digits so
// the round-trip reproduces every double bit-for-bit.
void serialize_nnet(const Network& net, std::ostream& out);
std::string serialize_nnet(const Network& net);
void save_nnet(const Network& net, const std::filesystem::path& file);

} // namespace nsv

#endif
