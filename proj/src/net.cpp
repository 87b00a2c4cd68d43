#include "ult/net.hpp"

#include "ult/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ult {

std::string to_string(layer_kind k) { return k == layer_kind::dense ? "dense" : "shared"; }
std::string to_string(activation a) { return a == activation::relu ? "relu" : "identity"; }

layer_kind parse_layer_kind(const std::string& s) {
    if (s == "dense") return layer_kind::dense;
    if (s == "shared" || s == "conv") return layer_kind::shared;
    throw shape_error("unknown layer kind '" + s + "'");
}

activation parse_activation(const std::string& s) {
    if (s == "relu") return activation::relu;
    if (s == "identity" || s == "linear") return activation::identity;
    throw shape_error("unknown activation '" + s + "'");
}

void architecture::validate() const {
    if (widths.size() < 2) throw shape_error("architecture needs at least one layer");
    if (kinds.size() + 1 != widths.size())
        throw shape_error("layer kinds must have one entry per layer");
    for (int w : widths)
        if (w < 1) throw shape_error("all widths must be >= 1");
}

int architecture::cols(int l) const {
    if (l == 1) return kinds[0] == layer_kind::shared ? 1 : widths[0] * 1;
    const auto k = kinds[static_cast<std::size_t>(l - 1)];
    const auto prev = kinds[static_cast<std::size_t>(l - 2)];
    if (k == layer_kind::shared) return prev == layer_kind::shared ? widths[static_cast<std::size_t>(l - 1)] : 1;
    return positions(l - 1) * widths[static_cast<std::size_t>(l - 1)];
}

int architecture::positions(int l) const {
    const auto k = kinds[static_cast<std::size_t>(l - 1)];
    if (k == layer_kind::dense) return 1;
    if (l == 1) return widths[0];
    const auto prev = kinds[static_cast<std::size_t>(l - 2)];
    if (prev == layer_kind::shared) return positions(l - 1);
    return widths[static_cast<std::size_t>(l - 1)];
}

int architecture::output_dim() const {
    const int L = depth();
    return positions(L) * widths.back();
}

mother_net::mother_net(architecture arch, std::vector<double> sigma_w)
    : arch_(std::move(arch)) {
    arch_.validate();
    const int L = arch_.depth();
    layers_.resize(static_cast<std::size_t>(L));
    offsets_.resize(static_cast<std::size_t>(L) + 1, 0);
    for (int l = 1; l <= L; ++l) {
        auto& ly = layers_[static_cast<std::size_t>(l - 1)];
        ly.kind = arch_.kinds[static_cast<std::size_t>(l - 1)];
        ly.rows = arch_.widths[static_cast<std::size_t>(l)];
        ly.cols = arch_.cols(l);
        ly.positions = arch_.positions(l);
        ly.w.assign(static_cast<std::size_t>(ly.rows) * ly.cols, 0.0);
        ly.b.assign(static_cast<std::size_t>(ly.rows), 0.0);
        offsets_[static_cast<std::size_t>(l)] = offsets_[static_cast<std::size_t>(l - 1)] + ly.param_count();
    }
    total_ = offsets_.back();
    if (sigma_w.empty()) sigma_w.assign(static_cast<std::size_t>(L), 2.0);
    set_sigma_w(std::move(sigma_w));
}

void mother_net::set_sigma_w(std::vector<double> s) {
    if (static_cast<int>(s.size()) != depth()) throw shape_error("sigma_w needs one entry per layer");
    for (double v : s)
        if (!(v > 0.0) || !std::isfinite(v)) throw domain_error("sigma_w must be finite and positive");
    sigma_w_ = std::move(s);
}

std::size_t mother_net::weight_index(int l, int r, int c) const {
    const auto& ly = at(l);
    return offsets_[static_cast<std::size_t>(l - 1)] + static_cast<std::size_t>(r) * ly.cols + c;
}

std::size_t mother_net::bias_index(int l, int r) const {
    const auto& ly = at(l);
    return offsets_[static_cast<std::size_t>(l - 1)] + ly.w.size() + static_cast<std::size_t>(r);
}

double mother_net::lambda() const {
    double lam = 1.0;
    for (double s : sigma_w_) lam *= 2.0 / s;
    return lam;
}

prune_mask prune_mask::all(const mother_net& net, bool keep) {
    prune_mask m;
    m.bits.assign(net.param_count(), keep ? 1 : 0);
    return m;
}

std::size_t prune_mask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

void check_mask(const mother_net& net, const prune_mask& mask) {
    if (mask.bits.size() != net.param_count())
        throw shape_error("mask has " + std::to_string(mask.bits.size()) + " bits, net has " +
                          std::to_string(net.param_count()) + " parameters");
}

std::vector<double> forward(const mother_net& net, const prune_mask* mask, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw shape_error("input has length " + std::to_string(x.size()) + ", expected " +
                          std::to_string(net.input_dim()));
    if (mask) check_mask(net, *mask);
    std::vector<double> cur(x.begin(), x.end()), next;
    const int L = net.depth();
    for (int l = 1; l <= L; ++l) {
        const auto& ly = net.at(l);
        const bool relu = l < L || net.arch().output_activation == activation::relu;
        next.assign(static_cast<std::size_t>(ly.positions) * ly.rows, 0.0);
        for (int p = 0; p < ly.positions; ++p) {
            const double* in = cur.data() + static_cast<std::size_t>(p) * ly.cols;
            for (int r = 0; r < ly.rows; ++r) {
                double acc = 0.0;
                for (int c = 0; c < ly.cols; ++c) {
                    if (mask && !mask->bits[net.weight_index(l, r, c)]) continue;
                    acc += ly.weight(r, c) * in[c];
                }
                if (!mask || mask->bits[net.bias_index(l, r)]) acc += ly.b[static_cast<std::size_t>(r)];
                next[static_cast<std::size_t>(p) * ly.rows + r] = relu ? (acc > 0.0 ? acc : 0.0) : acc;
            }
        }
        cur.swap(next);
    }
    return cur;
}

mother_net apply_mask(const mother_net& net, const prune_mask& mask) {
    check_mask(net, mask);
    mother_net out = net;
    for (int l = 1; l <= net.depth(); ++l) {
        auto& ly = out.at(l);
        for (int r = 0; r < ly.rows; ++r) {
            for (int c = 0; c < ly.cols; ++c)
                if (!mask.bits[net.weight_index(l, r, c)]) ly.weight(r, c) = 0.0;
            if (!mask.bits[net.bias_index(l, r)]) ly.b[static_cast<std::size_t>(r)] = 0.0;
        }
    }
    return out;
}

mother_net scale_transform(const mother_net& net, std::span<const double> sigmas) {
    if (static_cast<int>(sigmas.size()) != net.depth()) throw shape_error("need one sigma per layer");
    for (double s : sigmas)
        if (!(s > 0.0)) throw domain_error("scale_transform requires positive sigmas");
    mother_net out = net;
    double cum = 1.0;
    std::vector<double> new_sigma = net.sigma_w();
    for (int l = 1; l <= net.depth(); ++l) {
        const double s = sigmas[static_cast<std::size_t>(l - 1)];
        cum *= s;
        auto& ly = out.at(l);
        for (auto& w : ly.w) w *= s;
        for (auto& b : ly.b) b *= cum;
        new_sigma[static_cast<std::size_t>(l - 1)] *= s;
    }
    out.set_sigma_w(std::move(new_sigma));
    return out;
}

double surviving_fraction(const mother_net& net, const prune_mask& mask) {
    check_mask(net, mask);
    if (net.param_count() == 0) return 0.0;
    return static_cast<double>(mask.count()) / static_cast<double>(net.param_count());
}

sparse_net::sparse_net(const mother_net& net, const prune_mask& mask) {
    check_mask(net, mask);
    input_dim_ = net.input_dim();
    output_dim_ = net.output_dim();
    max_state_ = static_cast<std::size_t>(input_dim_);
    const int L = net.depth();
    for (int l = 1; l <= L; ++l) {
        const auto& ly = net.at(l);
        layer_plan plan;
        plan.rows = ly.rows;
        plan.cols = ly.cols;
        plan.positions = ly.positions;
        plan.relu = l < L || net.arch().output_activation == activation::relu;
        plan.row_spans.resize(static_cast<std::size_t>(ly.rows));
        for (int r = 0; r < ly.rows; ++r) {
            auto& rs = plan.row_spans[static_cast<std::size_t>(r)];
            rs.begin = static_cast<std::uint32_t>(vals_.size());
            for (int c = 0; c < ly.cols; ++c) {
                if (!mask.bits[net.weight_index(l, r, c)]) continue;
                cols_.push_back(static_cast<std::uint32_t>(c));
                vals_.push_back(ly.weight(r, c));
            }
            rs.end = static_cast<std::uint32_t>(vals_.size());
            rs.has_bias = mask.bits[net.bias_index(l, r)] != 0;
            rs.bias = ly.b[static_cast<std::size_t>(r)];
            if (rs.end > rs.begin || rs.has_bias) plan.active_rows.push_back(r);
        }
        max_state_ = std::max(max_state_, static_cast<std::size_t>(ly.positions) * ly.rows);
        layers_.push_back(std::move(plan));
    }
}

void sparse_net::eval(const double* x, double* out, std::vector<double>& scratch) const {
    scratch.resize(2 * max_state_);
    double* cur = scratch.data();
    double* next = scratch.data() + max_state_;
    std::copy(x, x + input_dim_, cur);
    for (const auto& plan : layers_) {
        const std::size_t n = static_cast<std::size_t>(plan.positions) * plan.rows;
        std::fill(next, next + n, 0.0);
        for (int p = 0; p < plan.positions; ++p) {
            const double* in = cur + static_cast<std::size_t>(p) * plan.cols;
            double* o = next + static_cast<std::size_t>(p) * plan.rows;
            for (int r : plan.active_rows) {
                const auto& rs = plan.row_spans[static_cast<std::size_t>(r)];
                double acc = 0.0;
                for (auto k = rs.begin; k < rs.end; ++k) acc += vals_[k] * in[cols_[k]];
                if (rs.has_bias) acc += rs.bias;
                o[r] = plan.relu ? (acc > 0.0 ? acc : 0.0) : acc;
            }
        }
        std::swap(cur, next);
    }
    std::copy(cur, cur + output_dim_, out);
}

std::vector<double> sparse_net::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim_) throw shape_error("input length mismatch");
    std::vector<double> out(static_cast<std::size_t>(output_dim_)), scratch;
    eval(x.data(), out.data(), scratch);
    return out;
}

} // namespace ult
