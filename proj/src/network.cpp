#include "nsv/network.hpp"

#include "nsv/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace nsv {

namespace {

bool exact_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.array() == b.array()).all();
}

bool exact_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return a.size() == b.size() && (a.array() == b.array()).all();
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Line-oriented reader that skips blanks and // comments and remembers the
// 1-based number of the line it last handed out.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::size_t line_number() const { return line_number_; }

    std::string next_data_line(const char* what)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_number_;
            std::size_t start = line.find_first_not_of(" \t\r\n");
            if (start == std::string::npos)
                continue;
            if (line.compare(start, 2, "//") == 0)
                continue;
            return line;
        }
        throw ParseError(std::string("unexpected end of file, expected ") + what,
                         line_number_ + 1);
    }

private:
    std::istream& in_;
    std::size_t line_number_ = 0;
};

std::vector<double> parse_csv_doubles(const std::string& line, std::size_t line_no)
{
    std::vector<double> values;
    const char* p = line.c_str();
    while (true) {
        while (*p == ' ' || *p == '\t' || *p == ',')
            ++p;
        if (*p == '\0' || *p == '\r' || *p == '\n')
            break;
        char* end = nullptr;
        double v = std::strtod(p, &end);
        if (end == p)
            throw ParseError("expected a number, found '" + std::string(p) + "'",
                             line_no);
        values.push_back(v);
        p = end;
    }
    return values;
}

std::vector<double> expect_doubles(LineReader& reader, std::size_t count,
                                   const char* what)
{
    std::string line = reader.next_data_line(what);
    auto values = parse_csv_doubles(line, reader.line_number());
    if (values.size() != count)
        throw ParseError(std::string(what) + ": expected " + std::to_string(count) +
                             " values, found " + std::to_string(values.size()),
                         reader.line_number());
    return values;
}

std::size_t to_size(double v, const char* what, std::size_t line_no)
{
    if (v < 0 || v != std::floor(v))
        throw ParseError(std::string(what) + " must be a non-negative integer",
                         line_no);
    return static_cast<std::size_t>(v);
}

} // namespace

Network::Network(std::vector<Layer> layers,
                 std::vector<double> input_mins,
                 std::vector<double> input_maxes,
                 std::vector<double> means,
                 std::vector<double> ranges)
    : layers_(std::move(layers)),
      input_mins_(std::move(input_mins)),
      input_maxes_(std::move(input_maxes)),
      means_(std::move(means)),
      ranges_(std::move(ranges))
{
    if (layers_.empty())
        throw Error("network needs at least one layer");

    input_dim_ = static_cast<std::size_t>(layers_.front().weights.cols());
    output_dim_ = static_cast<std::size_t>(layers_.back().weights.rows());
    if (input_dim_ == 0 || output_dim_ == 0)
        throw Error("network input and output dimensions must be positive");

    std::size_t prev = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& layer = layers_[i];
        if (static_cast<std::size_t>(layer.weights.cols()) != prev)
            throw Error("layer " + std::to_string(i) + ": weight columns " +
                        std::to_string(layer.weights.cols()) +
                        " do not match previous layer size " + std::to_string(prev));
        if (layer.biases.size() != layer.weights.rows())
            throw Error("layer " + std::to_string(i) + ": bias length " +
                        std::to_string(layer.biases.size()) +
                        " does not match neuron count " +
                        std::to_string(layer.weights.rows()));
        const bool last = i + 1 == layers_.size();
        if (last && layer.activation != Activation::Identity)
            throw Error("output layer must have no activation");
        if (!last && layer.activation != Activation::ReLU)
            throw Error("hidden layer " + std::to_string(i) + " must use ReLU");
        prev = static_cast<std::size_t>(layer.weights.rows());
    }

    if (input_mins_.size() != input_dim_ || input_maxes_.size() != input_dim_)
        throw Error("input_mins/input_maxes must have length input_dim");
    if (means_.size() != input_dim_ + 1 || ranges_.size() != input_dim_ + 1)
        throw Error("means/ranges must have length input_dim + 1");
    for (double r : ranges_)
        if (!(r > 0.0))
            throw Error("range entries must be strictly positive");
}

Eigen::VectorXd Network::normalize_input(const Eigen::VectorXd& x) const
{
    if (static_cast<std::size_t>(x.size()) != input_dim_)
        throw Error("normalize_input: expected length " + std::to_string(input_dim_));
    Eigen::VectorXd z(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        z[i] = (x[i] - means_[static_cast<std::size_t>(i)]) /
               ranges_[static_cast<std::size_t>(i)];
    return z;
}

Eigen::VectorXd Network::forward(const Eigen::VectorXd& x, bool normalized) const
{
    if (static_cast<std::size_t>(x.size()) != input_dim_)
        throw Error("forward: input length " + std::to_string(x.size()) +
                    " does not match input_dim " + std::to_string(input_dim_));

    Eigen::VectorXd a = normalized ? x : normalize_input(x);
    for (const Layer& layer : layers_) {
        a = layer.weights * a + layer.biases;
        if (layer.activation == Activation::ReLU)
            a = a.cwiseMax(0.0);
    }
    return a;
}

Eigen::VectorXd Network::denormalize_output(const Eigen::VectorXd& y) const
{
    const double mean = means_[input_dim_];
    const double range = ranges_[input_dim_];
    return (y.array() * range + mean).matrix();
}

Eigen::VectorXd Network::normalize_output(const Eigen::VectorXd& y) const
{
    const double mean = means_[input_dim_];
    const double range = ranges_[input_dim_];
    return ((y.array() - mean) / range).matrix();
}

bool Network::operator==(const Network& other) const
{
    if (layers_.size() != other.layers_.size())
        return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].activation != other.layers_[i].activation ||
            !exact_equal(layers_[i].weights, other.layers_[i].weights) ||
            !exact_equal(layers_[i].biases, other.layers_[i].biases))
            return false;
    }
    return input_mins_ == other.input_mins_ && input_maxes_ == other.input_maxes_ &&
           means_ == other.means_ && ranges_ == other.ranges_;
}

Network parse_nnet(std::istream& in)
{
    LineReader reader(in);

    auto header = expect_doubles(reader, 4, "header");
    const std::size_t header_line = reader.line_number();
    const std::size_t num_layers = to_size(header[0], "numLayers", header_line);
    const std::size_t input_size = to_size(header[1], "inputSize", header_line);
    const std::size_t output_size = to_size(header[2], "outputSize", header_line);
    if (num_layers == 0 || input_size == 0 || output_size == 0)
        throw ParseError("header sizes must be positive", header_line);

    auto size_line = expect_doubles(reader, num_layers + 1, "layer sizes");
    std::vector<std::size_t> sizes;
    for (double v : size_line)
        sizes.push_back(to_size(v, "layer size", reader.line_number()));
    if (sizes.front() != input_size)
        throw ParseError("layer sizes line disagrees with declared input size",
                         reader.line_number());
    if (sizes.back() != output_size)
        throw ParseError("layer sizes line disagrees with declared output size",
                         reader.line_number());

    reader.next_data_line("unused flag line");

    auto mins = expect_doubles(reader, input_size, "input minima");
    auto maxes = expect_doubles(reader, input_size, "input maxima");
    auto means = expect_doubles(reader, input_size + 1, "means");
    auto ranges = expect_doubles(reader, input_size + 1, "ranges");
    for (double r : ranges)
        if (!(r > 0.0))
            throw ParseError("range entries must be strictly positive",
                             reader.line_number());

    std::vector<Layer> layers;
    layers.reserve(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) {
        const std::size_t rows = sizes[l + 1];
        const std::size_t cols = sizes[l];
        Eigen::MatrixXd weights(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            auto row = expect_doubles(reader, cols, "weight row");
            for (std::size_t c = 0; c < cols; ++c)
                weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    row[c];
        }
        Eigen::VectorXd biases(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            auto bias = expect_doubles(reader, 1, "bias row");
            biases[static_cast<Eigen::Index>(r)] = bias[0];
        }
        const bool last = l + 1 == num_layers;
        layers.push_back(
            {std::move(weights), std::move(biases),
             last ? Activation::Identity : Activation::ReLU});
    }

    return Network(std::move(layers), std::move(mins), std::move(maxes),
                   std::move(means), std::move(ranges));
}

Network parse_nnet(const std::string& text)
{
    std::istringstream in(text);
    return parse_nnet(in);
}

Network load_nnet(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error("cannot open network file " + file.string());
    return parse_nnet(in);
}

void serialize_nnet(const Network& net, std::ostream& out)
{
    const auto& layers = net.layers();
    std::size_t max_layer = net.input_dim();
    for (const Layer& layer : layers)
        max_layer = std::max(max_layer, static_cast<std::size_t>(layer.weights.rows()));

    auto write_row = [&out](const std::vector<double>& values) {
        for (double v : values)
            out << format_double(v) << ',';
        out << '\n';
    };

    out << "// NNet exported by nsverify\n";
    out << layers.size() << ',' << net.input_dim() << ',' << net.output_dim() << ','
        << max_layer << ",\n";
    out << net.input_dim() << ',';
    for (const Layer& layer : layers)
        out << layer.weights.rows() << ',';
    out << '\n';
    out << "0,\n";
    write_row(net.input_mins());
    write_row(net.input_maxes());
    write_row(net.means());
    write_row(net.ranges());

    for (const Layer& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                out << format_double(layer.weights(r, c)) << ',';
            out << '\n';
        }
        for (Eigen::Index r = 0; r < layer.biases.size(); ++r)
            out << format_double(layer.biases[r]) << ",\n";
    }
}

std::string serialize_nnet(const Network& net)
{
    std::ostringstream out;
    serialize_nnet(net, out);
    return out.str();
}

void save_nnet(const Network& net, const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out)
        throw Error("cannot write network file " + file.string());
    serialize_nnet(net, out);
}

} // namespace nsv
