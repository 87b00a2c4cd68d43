#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ult {

enum class layer_kind { dense, shared };
enum class activation { relu, identity };

std::string to_string(layer_kind k);
std::string to_string(activation a);
layer_kind parse_layer_kind(const std::string& s);
activation parse_activation(const std::string& s);

// widths = [n_0 ... n_L], kinds has one entry per layer.
//
// The network state is a grid of positions x channels. The input is one
// position with n_0 channels; a shared layer that follows the input or a
// dense layer first reinterprets its (1, n) state as (n, 1), so every
// component gets its own copy of the univariate subnet. A dense layer
// flattens the state position-major and produces a single position.
struct architecture {
    std::vector<int> widths;
    std::vector<layer_kind> kinds;
    activation output_activation = activation::identity;

    int depth() const { return static_cast<int>(kinds.size()); }
    void validate() const;

    // Per layer l (1-based): input columns per position and the number of
    // positions the block is applied to.
    int cols(int l) const;
    int positions(int l) const;
    int output_dim() const;
};

struct layer {
    layer_kind kind = layer_kind::dense;
    int rows = 0;
    int cols = 0;
    int positions = 1;
    std::vector<double> w; // row-major rows x cols
    std::vector<double> b;

    double weight(int r, int c) const { return w[static_cast<std::size_t>(r) * cols + c]; }
    double& weight(int r, int c) { return w[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t param_count() const { return w.size() + b.size(); }
};

class mother_net {
public:
    mother_net() = default;
    mother_net(architecture arch, std::vector<double> sigma_w);

    const architecture& arch() const { return arch_; }
    int depth() const { return arch_.depth(); }
    int input_dim() const { return arch_.widths.front(); }
    int output_dim() const { return arch_.output_dim(); }

    const std::vector<double>& sigma_w() const { return sigma_w_; }
    void set_sigma_w(std::vector<double> s);

    // 1-based layer access, matching W^(l).
    const layer& at(int l) const { return layers_.at(static_cast<std::size_t>(l - 1)); }
    layer& at(int l) { return layers_.at(static_cast<std::size_t>(l - 1)); }

    // Flat parameter indexing: per layer, weights (row-major) then biases.
    std::size_t param_count() const { return total_; }
    std::size_t weight_index(int l, int r, int c) const;
    std::size_t bias_index(int l, int r) const;

    double lambda() const;

private:
    architecture arch_;
    std::vector<layer> layers_;
    std::vector<double> sigma_w_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

struct prune_mask {
    std::vector<std::uint8_t> bits;

    static prune_mask all(const mother_net& net, bool keep);
    std::size_t count() const;
    bool operator==(const prune_mask&) const = default;
};

void check_mask(const mother_net& net, const prune_mask& mask);

// Dense reference evaluation, optionally masked.
std::vector<double> forward(const mother_net& net, const prune_mask* mask, std::span<const double> x);

// Copy of net with masked parameters set to zero.
mother_net apply_mask(const mother_net& net, const prune_mask& mask);

// forward(new) = (prod sigmas) * forward(old).
mother_net scale_transform(const mother_net& net, std::span<const double> sigmas);

double surviving_fraction(const mother_net& net, const prune_mask& mask);

// Sparse evaluator over the kept parameters. Accumulation order matches
// forward() so both give bitwise-identical outputs.
class sparse_net {
public:
    sparse_net(const mother_net& net, const prune_mask& mask);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    std::size_t nnz() const { return vals_.size(); }

    // scratch must be reused per thread; it is resized as needed.
    void eval(const double* x, double* out, std::vector<double>& scratch) const;
    std::vector<double> eval(std::span<const double> x) const;

private:
    struct row_span {
        std::uint32_t begin = 0, end = 0;
        bool has_bias = false;
        double bias = 0.0;
    };
    struct layer_plan {
        int rows = 0, cols = 0, positions = 1;
        bool relu = true;
        std::vector<row_span> row_spans;
        std::vector<int> active_rows;
    };
    std::vector<layer_plan> layers_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> vals_;
    int input_dim_ = 0, output_dim_ = 0;
    std::size_t max_state_ = 0;
};

} // namespace ult
