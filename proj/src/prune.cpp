#include "ult/prune.hpp"

#include "ult/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ult {

void linear_target::validate() const {
    if (W.empty()) throw shape_error("linear target needs at least one output row");
    const std::size_t d = W.front().size();
    if (d == 0) throw shape_error("linear target needs at least one input column");
    for (const auto& row : W)
        if (row.size() != d) throw shape_error("linear target rows differ in length");
    if (b.size() != W.size()) throw shape_error("linear target bias length mismatch");
    if (lo.size() != d || hi.size() != d) throw shape_error("linear target box must match input dimension");
}

double linear_target::Q() const {
    double q = 1.0;
    for (std::size_t j = 0; j < lo.size(); ++j) q += std::max(std::abs(lo[j]), std::abs(hi[j]));
    return q;
}

int linear_target::nonzeros() const {
    int n = 0;
    for (const auto& row : W)
        for (double w : row) n += w != 0.0;
    for (double v : b) n += v != 0.0;
    return n;
}

double linear_target::max_abs() const {
    double m = 0.0;
    for (const auto& row : W)
        for (double w : row) m = std::max(m, std::abs(w));
    for (double v : b) m = std::max(m, std::abs(v));
    return m;
}

namespace detail {

double univariate_budget(const pwl_rep& target, double lo, double hi, double eps) {
    double M = 0.0;
    for (double a : target.coeffs) M = std::max(M, std::abs(a));
    for (double s : target.knots) M = std::max(M, std::abs(s));
    M += 1.0;
    const double Q = std::max(std::abs(lo), std::abs(hi));
    return eps / (2.0 * target.N() * (Q + M));
}

construction::construction(const mother_net& net, const prune_options& opt) : opt_(opt) {
    std::vector<double> s;
    for (double sw : net.sigma_w()) s.push_back(2.0 / sw);
    cn_ = scale_transform(net, s);
    report_.mask = prune_mask::all(net, false);
    report_.lambda = net.lambda();
    claimed_.resize(static_cast<std::size_t>(net.depth()) + 1);
    for (int l = 1; l <= net.depth(); ++l) claimed_[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(net.at(l).rows), 0);
}

void construction::keep_weight(int l, int r, int c) { report_.mask.bits[cn_.weight_index(l, r, c)] = 1; }
void construction::keep_bias(int l, int r) { report_.mask.bits[cn_.bias_index(l, r)] = 1; }

bool construction::claimed(int l, int r) const {
    return claimed_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)] != 0;
}

void construction::claim(int l, int r, const std::string& kind, int source) {
    auto& c = claimed_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)];
    if (c) return;
    c = 1;
    report_.classes.push_back({l, r, kind, source});
}

void construction::solve_coefficient(const std::string& name, double target, double budget,
                                     const std::vector<double>& values, std::vector<int>& chosen) {
    const int n = static_cast<int>(values.size());
    auto best = serial::best_k(values, target, std::min(opt_.max_subset, n));
    chosen = best.idx;
    double achieved = 0.0;
    for (int k : chosen) achieved += values[static_cast<std::size_t>(k)];
    coefficient_record rec;
    rec.name = name;
    rec.target = target;
    rec.achieved = achieved;
    rec.error = best.err;
    rec.budget = budget;
    rec.ground = n;
    rec.chosen = static_cast<int>(chosen.size());
    rec.within_budget = best.err <= budget;
    if (n < opt_.min_ground_size)
        report_.failures.push_back("width: " + name + " has " + std::to_string(n) + " ground elements, needs " +
                                   std::to_string(opt_.min_ground_size));
    else if (n < opt_.ground_size)
        report_.notes.push_back("deficit: " + name + " has " + std::to_string(n) + " of " +
                                std::to_string(opt_.ground_size) + " ground elements");
    if (!rec.within_budget) {
        ++report_.budget_violations;
        report_.failures.push_back("approximation: " + name + " error " + std::to_string(best.err) +
                                   " exceeds budget " + std::to_string(budget));
    }
    report_.coefficients.push_back(std::move(rec));
}

namespace {

constexpr double relay_reach = 2.0;

std::vector<int> layer_quotas(int total, int layers) {
    std::vector<int> q(static_cast<std::size_t>(layers), total / layers);
    for (int k = 0; k < total % layers; ++k) ++q[static_cast<std::size_t>(k)];
    return q;
}

} // namespace

bool construction::build_segment(const segment_spec& sp) {
    const int D = sp.out - sp.in;
    if (D < 2) throw domain_error("a linear segment needs at least two layers");
    const int m = static_cast<int>(sp.outputs.size());
    const int F = static_cast<int>(sp.features.size());
    if (static_cast<int>(sp.coef.size()) != m || static_cast<int>(sp.bias.size()) != m ||
        static_cast<int>(sp.budget.size()) != m)
        throw shape_error("segment spec arrays must have one entry per output");
    const int first = sp.in + 1;
    const int last = sp.out - 1; // last ground layer
    const auto& out_layer = cn_.at(sp.out);

    std::vector<char> need_f(static_cast<std::size_t>(F), 0);
    bool need_bias = false;
    for (int i = 0; i < m; ++i) {
        for (int f = 0; f < F; ++f)
            if (sp.coef[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)] != 0.0) need_f[static_cast<std::size_t>(f)] = 1;
        if (sp.bias[static_cast<std::size_t>(i)] != 0.0) need_bias = true;
    }

    // Feature paths carry relu(sign z) * rho forward through layers first .. out-2.
    std::vector<std::vector<int>> pn(static_cast<std::size_t>(F));
    std::vector<std::vector<double>> rho(static_cast<std::size_t>(F));
    if (D >= 3) {
        for (int f = 0; f < F; ++f) {
            if (!need_f[static_cast<std::size_t>(f)]) continue;
            const auto& feat = sp.features[static_cast<std::size_t>(f)];
            path_record rec;
            double p = 1.0;
            for (int l = first; l <= sp.out - 2; ++l) {
                const auto& ly = cn_.at(l);
                int scanned = 0, found = -1;
                double w = 0.0;
                for (int r = 0; r < ly.rows && scanned < opt_.path_budget; ++r) {
                    if (claimed(l, r)) continue;
                    ++scanned;
                    w = l == first ? feat.sign * ly.weight(r, feat.col) : ly.weight(r, pn[static_cast<std::size_t>(f)].back());
                    if (path_accepts(w, p)) {
                        found = r;
                        break;
                    }
                }
                if (found < 0) {
                    report_.failures.push_back("path: " + sp.label + " feature " + std::to_string(f) +
                                               " found no acceptable weight in layer " + std::to_string(l));
                    return false;
                }
                p *= w;
                claim(l, found, "path", f);
                pn[static_cast<std::size_t>(f)].push_back(found);
                rho[static_cast<std::size_t>(f)].push_back(p);
                rec.layers.push_back(l);
                rec.neurons.push_back(found);
                rec.weights.push_back(w);
            }
            rec.product = p;
            rec.ok = path_product_in_range(p);
            if (!rec.ok) throw construction_error("path product left [1, 4/3]");
            report_.paths.push_back(std::move(rec));
        }
    }

    // Accumulator chains: ch[i][s] holds the neuron per layer first+1 .. out-1
    // (index l - first - 1), kap the signed product of weights from there to the output.
    std::vector<std::array<std::vector<int>, 2>> ch(static_cast<std::size_t>(m));
    std::vector<std::array<std::vector<double>, 2>> kap(static_cast<std::size_t>(m));
    if (D >= 3) {
        for (int i = 0; i < m; ++i) {
            const int o = sp.outputs[static_cast<std::size_t>(i)];
            for (int s = 0; s < 2; ++s) {
                const double sign = s == 0 ? 1.0 : -1.0;
                auto& cv = ch[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
                auto& kv = kap[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
                cv.assign(static_cast<std::size_t>(D - 2), -1);
                kv.assign(static_cast<std::size_t>(D - 2), 0.0);
                double kappa = 1.0;
                int next = -1;
                path_record rec;
                for (int l = last; l >= first + 1; --l) {
                    const auto& ly = cn_.at(l);
                    const auto& up = cn_.at(l + 1);
                    int scanned = 0, found = -1;
                    double w = 0.0;
                    for (int r = 0; r < ly.rows && scanned < opt_.path_budget; ++r) {
                        if (claimed(l, r)) continue;
                        ++scanned;
                        w = l == last ? up.weight(o, r) : up.weight(next, r);
                        const bool ok = l == last ? path_accepts(sign * w, 1.0) : path_accepts(w, std::abs(kappa));
                        if (ok) {
                            found = r;
                            break;
                        }
                    }
                    if (found < 0) {
                        report_.failures.push_back("path: " + sp.label + " chain for output " + std::to_string(i) +
                                                   " found no acceptable weight in layer " + std::to_string(l));
                        return false;
                    }
                    kappa *= w;
                    claim(l, found, "chain", i);
                    cv[static_cast<std::size_t>(l - first - 1)] = found;
                    kv[static_cast<std::size_t>(l - first - 1)] = kappa;
                    next = found;
                    rec.layers.push_back(l);
                    rec.neurons.push_back(found);
                    rec.weights.push_back(w);
                }
                rec.product = std::abs(kappa);
                rec.ok = path_product_in_range(rec.product);
                if (!rec.ok) throw construction_error("chain product left [1, 4/3]");
                report_.paths.push_back(std::move(rec));
            }
        }
    }

    auto enable_path = [&](int f, int upto) {
        const auto& feat = sp.features[static_cast<std::size_t>(f)];
        const auto& nodes = pn[static_cast<std::size_t>(f)];
        for (int l = first; l <= upto; ++l) {
            const int r = nodes[static_cast<std::size_t>(l - first)];
            if (l == first)
                keep_weight(l, r, feat.col);
            else
                keep_weight(l, r, nodes[static_cast<std::size_t>(l - first - 1)]);
        }
    };
    auto enable_chain = [&](int i, int s, int from) {
        const auto& nodes = ch[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
        for (int l = from; l <= last; ++l) {
            const int r = nodes[static_cast<std::size_t>(l - first - 1)];
            if (l < last)
                keep_weight(l + 1, nodes[static_cast<std::size_t>(l + 1 - first - 1)], r);
            else
                keep_weight(sp.out, sp.outputs[static_cast<std::size_t>(i)], r);
        }
    };

    bool one_signed = true;
    for (int f = 0; f < F; ++f) {
        const auto& feat = sp.features[static_cast<std::size_t>(f)];
        if (feat.sign > 0 ? feat.lo < 0.0 : feat.hi > 0.0) one_signed = false;
    }

    struct pool_entry {
        int r;
        double in_value;
    };
    // pools[layer offset][class], class F is the bias class.
    std::vector<std::vector<std::vector<pool_entry>>> pools(
        static_cast<std::size_t>(D - 1), std::vector<std::vector<pool_entry>>(static_cast<std::size_t>(F) + 1));
    // Sink slot for multi-class neurons below the last ground layer (0: chain+, 1: chain-).
    std::vector<std::vector<int>> multi_slot(static_cast<std::size_t>(D - 1));
    std::vector<char> multi_layer(static_cast<std::size_t>(D - 1), 0);

    for (int l = first; l <= last; ++l) {
        const auto li = static_cast<std::size_t>(l - first);
        const auto& ly = cn_.at(l);
        const bool multi = opt_.shared_pools && m == 1 && (l > first || one_signed);
        multi_layer[li] = multi;
        multi_slot[li].assign(static_cast<std::size_t>(ly.rows), -1);
        std::vector<pool_entry> elig_entry;
        std::vector<int> elig_cls;
        for (int r = 0; r < ly.rows; ++r) {
            if (claimed(l, r)) continue;
            elig_entry.clear();
            elig_cls.clear();
            for (int f = 0; f < F; ++f) {
                if (!need_f[static_cast<std::size_t>(f)]) continue;
                const auto& feat = sp.features[static_cast<std::size_t>(f)];
                double v;
                if (l == first)
                    v = feat.sign * ly.weight(r, feat.col);
                else
                    v = ly.weight(r, pn[static_cast<std::size_t>(f)][li - 1]) * rho[static_cast<std::size_t>(f)][li - 1];
                if (v > 0.0) {
                    elig_cls.push_back(f);
                    elig_entry.push_back({r, v});
                }
            }
            if (need_bias && ly.b[static_cast<std::size_t>(r)] > 0.0) {
                elig_cls.push_back(F);
                elig_entry.push_back({r, ly.b[static_cast<std::size_t>(r)]});
            }
            if (elig_cls.empty()) continue;
            auto& layer_pools = pools[li];
            if (multi) {
                if (l < last) {
                    const auto& up = cn_.at(l + 1);
                    const int cp = ch[0][0][li];
                    const int cm = ch[0][1][li];
                    int slot = -1;
                    if (up.weight(cp, r) > 0.0)
                        slot = 0;
                    else if (up.weight(cm, r) > 0.0)
                        slot = 1;
                    if (slot < 0) continue;
                    multi_slot[li][static_cast<std::size_t>(r)] = slot;
                }
                for (std::size_t k = 0; k < elig_cls.size(); ++k)
                    layer_pools[static_cast<std::size_t>(elig_cls[k])].push_back(elig_entry[k]);
            } else {
                std::size_t pick = 0;
                for (std::size_t k = 1; k < elig_cls.size(); ++k)
                    if (layer_pools[static_cast<std::size_t>(elig_cls[k])].size() <
                        layer_pools[static_cast<std::size_t>(elig_cls[pick])].size())
                        pick = k;
                layer_pools[static_cast<std::size_t>(elig_cls[pick])].push_back(elig_entry[pick]);
            }
        }
    }

    const auto quota = layer_quotas(opt_.ground_size, D - 1);
    std::vector<element> els;
    std::vector<double> values;
    std::vector<int> chosen;
    for (int i = 0; i < m; ++i) {
        const int o = sp.outputs[static_cast<std::size_t>(i)];
        for (int c = 0; c <= F; ++c) {
            const double target = c < F ? sp.coef[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]
                                        : sp.bias[static_cast<std::size_t>(i)];
            if (target == 0.0) continue;
            els.clear();
            for (int l = first; l <= last; ++l) {
                const auto li = static_cast<std::size_t>(l - first);
                int taken = 0;
                for (const auto& e : pools[li][static_cast<std::size_t>(c)]) {
                    if (taken >= quota[li]) break;
                    if (l == last) {
                        const double w = out_layer.weight(o, e.r);
                        if (w == 0.0) continue;
                        els.push_back({e.in_value * w, l, e.r, c, -1});
                        ++taken;
                        continue;
                    }
                    const auto& up = cn_.at(l + 1);
                    for (int s = 0; s < 2 && taken < quota[li]; ++s) {
                        if (multi_layer[li] && multi_slot[li][static_cast<std::size_t>(e.r)] != s) continue;
                        const int cn = ch[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)][li];
                        const double w = up.weight(cn, e.r);
                        if (!(w > 0.0)) continue;
                        els.push_back({e.in_value * w * kap[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)][li], l,
                                       e.r, c, s});
                        ++taken;
                    }
                }
            }
            if (c == F) els.push_back({out_layer.b[static_cast<std::size_t>(o)], sp.out, o, -1, -1});
            values.resize(els.size());
            for (std::size_t k = 0; k < els.size(); ++k) values[k] = els[k].value;
            std::string name = sp.label + "/out" + std::to_string(i) + "/";
            if (c < F) {
                const auto& feat = sp.features[static_cast<std::size_t>(c)];
                name += "z" + std::to_string(feat.col) + (feat.sign > 0 ? "+" : "-");
            } else {
                name += "bias";
            }
            solve_coefficient(name, target, sp.budget[static_cast<std::size_t>(i)], values, chosen);
            for (int k : chosen) {
                const auto& e = els[static_cast<std::size_t>(k)];
                if (e.cls < 0) {
                    keep_bias(sp.out, o);
                    continue;
                }
                const auto li = static_cast<std::size_t>(e.layer - first);
                if (e.cls == F) {
                    keep_bias(e.layer, e.neuron);
                } else if (e.layer == first) {
                    keep_weight(e.layer, e.neuron, sp.features[static_cast<std::size_t>(e.cls)].col);
                } else {
                    keep_weight(e.layer, e.neuron, pn[static_cast<std::size_t>(e.cls)][li - 1]);
                    enable_path(e.cls, e.layer - 1);
                }
                if (e.layer == last) {
                    keep_weight(sp.out, o, e.neuron);
                } else {
                    keep_weight(e.layer + 1, ch[static_cast<std::size_t>(i)][static_cast<std::size_t>(e.sink)][li], e.neuron);
                    enable_chain(i, e.sink, e.layer + 1);
                }
                std::string kind = "bias_pos";
                int source = -1;
                if (multi_layer[li]) {
                    kind = "shared";
                } else if (e.cls < F) {
                    const auto& feat = sp.features[static_cast<std::size_t>(e.cls)];
                    kind = feat.sign > 0 ? "pos_input" : "neg_input";
                    source = feat.col;
                }
                claim(e.layer, e.neuron, kind, source);
            }
        }
    }
    return true;
}

bool construction::direct_univariate(const std::string& label, int in, int out, int in_col, int out_row,
                                     const pwl_rep& target, double budget, const std::vector<int>& active) {
    const int l1 = in + 1;
    const auto& ly = cn_.at(l1);
    const auto& ol = cn_.at(out);
    std::vector<int> rows;
    std::vector<double> values;
    std::vector<int> chosen;
    for (int i : active) {
        const double s = target.knots[static_cast<std::size_t>(i)];
        rows.clear();
        values.clear();
        for (int r = 0; r < ly.rows && static_cast<int>(rows.size()) < opt_.ground_size; ++r) {
            if (claimed(l1, r)) continue;
            const double v = ly.weight(r, in_col);
            if (v < 1.0 || v > 2.0) continue;
            const double kink = -ly.b[static_cast<std::size_t>(r)] / v;
            if (std::abs(kink - s) > budget) continue;
            rows.push_back(r);
            values.push_back(ol.weight(out_row, r) * v);
        }
        solve_coefficient(label + "/knot" + std::to_string(i), target.coeffs[static_cast<std::size_t>(i)], budget,
                          values, chosen);
        for (int k : chosen) {
            const int r = rows[static_cast<std::size_t>(k)];
            keep_weight(l1, r, in_col);
            keep_bias(l1, r);
            keep_weight(out, out_row, r);
            claim(l1, r, "knot", i);
        }
    }
    const double aN = target.coeffs.back();
    if (aN != 0.0) {
        rows.clear();
        values.clear();
        for (int r = 0; r < ly.rows && static_cast<int>(rows.size()) < opt_.ground_size; ++r) {
            if (claimed(l1, r) || !(ly.b[static_cast<std::size_t>(r)] > 0.0)) continue;
            rows.push_back(r);
            values.push_back(ol.weight(out_row, r) * ly.b[static_cast<std::size_t>(r)]);
        }
        rows.push_back(-1);
        values.push_back(ol.b[static_cast<std::size_t>(out_row)]);
        solve_coefficient(label + "/bias", aN, budget, values, chosen);
        for (int k : chosen) {
            const int r = rows[static_cast<std::size_t>(k)];
            if (r < 0) {
                keep_bias(out, out_row);
                continue;
            }
            keep_bias(l1, r);
            keep_weight(out, out_row, r);
            claim(l1, r, "bias_pos", -1);
        }
    }
    return true;
}

bool construction::build_univariate(const std::string& label, int in, int out, int in_col, int out_row,
                                    const pwl_rep& target, double lo, double hi, double eps) {
    target.validate();
    if (!(hi > lo)) throw domain_error("univariate domain must have hi > lo");
    double minv = std::min(eval(target, lo), eval(target, hi));
    for (double s : target.knots)
        if (s > lo && s < hi) minv = std::min(minv, eval(target, s));
    if (minv < -1e-12) throw domain_error("univariate target is negative on its domain (min " + std::to_string(minv) + ")");
    const int D = out - in;
    if (D < 2) throw domain_error("univariate construction needs depth >= 2");
    const double budget = univariate_budget(target, lo, hi, eps);
    if (std::max(std::abs(lo), std::abs(hi)) < 1.0)
        report_.notes.push_back("budget: " + label + " domain bound below 1");

    // Knots at or beyond hi never bend the function on the domain, and slope changes at
    // rounding level (sin at its symmetry points) are dropped.
    double amax = 0.0;
    for (double a : target.coeffs) amax = std::max(amax, std::abs(a));
    std::vector<int> active;
    for (int i = 0; i < target.N(); ++i)
        if (target.knots[static_cast<std::size_t>(i)] < hi &&
            std::abs(target.coeffs[static_cast<std::size_t>(i)]) > 1e-12 * (1.0 + amax))
            active.push_back(i);

    if (D == 2) return direct_univariate(label, in, out, in_col, out_row, target, budget, active);

    const int kl = in + 2;
    const auto& knot_layer = cn_.at(kl);
    const auto& ol = cn_.at(out);
    std::vector<feature_ref> feats;
    if (hi > 0.0) feats.push_back({in_col, 1, lo, hi});
    if (lo < 0.0) feats.push_back({in_col, -1, lo, hi});

    std::vector<int> knot_rows, knot_ids;
    std::vector<double> scale, out_w;
    for (int i : active) {
        const double a = target.coeffs[static_cast<std::size_t>(i)];
        int found = -1;
        for (int r = 0; r < knot_layer.rows; ++r) {
            if (claimed(kl, r)) continue;
            if (D == 3) {
                const double w = ol.weight(out_row, r);
                if (w * a > 0.0 && std::abs(w) >= 1.0) {
                    found = r;
                    break;
                }
            } else {
                found = r;
                break;
            }
        }
        if (found < 0) {
            report_.failures.push_back("width: " + label + " has no free knot neuron for knot " + std::to_string(i));
            continue;
        }
        claim(kl, found, "knot", i);
        knot_rows.push_back(found);
        knot_ids.push_back(i);
        // With a relay, the knot neuron carries c relu(x - s) for c >= 1 so the relay
        // coefficient a / c stays within reach of a few ground elements.
        const double w = D == 3 ? ol.weight(out_row, found) : 1.0;
        const double c = D == 3 ? a / w : std::max(1.0, std::abs(a) / relay_reach);
        out_w.push_back(D == 3 ? w : 1.0 / c);
        scale.push_back(c);
    }

    segment_spec ks;
    ks.label = label + "/knots";
    ks.in = in;
    ks.out = kl;
    ks.outputs = knot_rows;
    ks.features = feats;
    for (std::size_t k = 0; k < knot_rows.size(); ++k) {
        std::vector<double> row;
        for (const auto& f : feats) row.push_back(f.sign > 0 ? scale[k] : -scale[k]);
        ks.coef.push_back(row);
        ks.bias.push_back(-scale[k] * target.knots[static_cast<std::size_t>(knot_ids[k])]);
        ks.budget.push_back(budget / std::abs(out_w[k]));
    }
    if (!knot_rows.empty() && !build_segment(ks)) return false;

    const double aN = target.coeffs.back();
    if (D == 3) {
        for (int r : knot_rows) keep_weight(out, out_row, r);
        if (aN != 0.0) {
            std::vector<int> rows;
            std::vector<double> values;
            std::vector<int> chosen;
            for (int r = 0; r < knot_layer.rows && static_cast<int>(rows.size()) < opt_.ground_size; ++r) {
                if (claimed(kl, r) || !(knot_layer.b[static_cast<std::size_t>(r)] > 0.0)) continue;
                rows.push_back(r);
                values.push_back(knot_layer.b[static_cast<std::size_t>(r)] * ol.weight(out_row, r));
            }
            rows.push_back(-1);
            values.push_back(ol.b[static_cast<std::size_t>(out_row)]);
            solve_coefficient(label + "/bias", aN, budget, values, chosen);
            for (int k : chosen) {
                const int r = rows[static_cast<std::size_t>(k)];
                if (r < 0) {
                    keep_bias(out, out_row);
                    continue;
                }
                keep_bias(kl, r);
                keep_weight(out, out_row, r);
                claim(kl, r, "bias_pos", -1);
            }
        }
        return true;
    }

    segment_spec rs;
    rs.label = label + "/relay";
    rs.in = kl;
    rs.out = out;
    rs.outputs = {out_row};
    std::vector<double> row;
    for (std::size_t k = 0; k < knot_rows.size(); ++k) {
        const double s = target.knots[static_cast<std::size_t>(knot_ids[k])];
        rs.features.push_back({knot_rows[k], 1, 0.0, std::max(0.0, hi - s)});
        row.push_back(target.coeffs[static_cast<std::size_t>(knot_ids[k])] / scale[k]);
    }
    rs.coef.push_back(row);
    rs.bias.push_back(aN);
    rs.budget.push_back(budget);
    return build_segment(rs);
}

} // namespace detail

namespace {

void finalize(ticket_report& rep, const mother_net& net, const probe_grid& grid, const target_fn& target, double eps,
              double delta) {
    rep.eps = eps;
    rep.delta = delta;
    rep.fraction = surviving_fraction(net, rep.mask);
    rep.grid_points = grid.size();
    const sparse_net sn(net, rep.mask);
    rep.sup_error = parallel::sup_error(sn, rep.lambda, grid, target).err;
    rep.success = rep.failures.empty() && rep.sup_error <= eps;
}

} // namespace

ticket_report prune_linear(const mother_net& net, const linear_target& target, double eps, double delta,
                           const prune_options& opt) {
    target.validate();
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1)) throw domain_error("eps and delta must lie in (0,1)");
    const int L = net.depth();
    if (L < 2) throw domain_error("prune_linear needs a mother net of depth >= 2");
    const int d = target.d();
    const int m = target.m();
    if (net.input_dim() != d) throw shape_error("target input dimension does not match net");
    if (net.output_dim() != m || net.at(L).positions != 1) throw shape_error("target output dimension does not match net");
    if (net.at(1).kind == layer_kind::shared && d != 1)
        throw shape_error("prune_linear needs a dense first layer for d > 1");

    detail::construction c(net, opt);
    detail::segment_spec sp;
    sp.label = "linear";
    sp.in = 0;
    sp.out = L;
    for (int i = 0; i < m; ++i) sp.outputs.push_back(i);
    for (int j = 0; j < d; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (target.hi[u] > 0.0) sp.features.push_back({j, 1, target.lo[u], target.hi[u]});
        if (target.lo[u] < 0.0) sp.features.push_back({j, -1, target.lo[u], target.hi[u]});
    }
    const double budget = eps / target.Q();
    for (int i = 0; i < m; ++i) {
        std::vector<double> row;
        for (const auto& f : sp.features)
            row.push_back(f.sign * target.W[static_cast<std::size_t>(i)][static_cast<std::size_t>(f.col)]);
        sp.coef.push_back(row);
        sp.bias.push_back(target.b[static_cast<std::size_t>(i)]);
        sp.budget.push_back(budget);
    }
    c.build_segment(sp);

    const bool relu_out = net.arch().output_activation == activation::relu;
    target_fn fn = [&target, relu_out, d, m](const double* x, double* y) {
        for (int i = 0; i < m; ++i) {
            double acc = target.b[static_cast<std::size_t>(i)];
            for (int j = 0; j < d; ++j) acc += target.W[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * x[j];
            y[i] = relu_out ? std::max(acc, 0.0) : acc;
        }
    };
    probe_grid grid(target.lo, target.hi, opt.grid_points);
    auto rep = std::move(c.report());
    finalize(rep, net, grid, fn, eps, delta);
    return rep;
}

ticket_report prune_univariate(const mother_net& net, const pwl_rep& target, double lo, double hi, double eps,
                               double delta, const prune_options& opt) {
    if (!(eps > 0 && eps < 1 && delta > 0 && delta < 1)) throw domain_error("eps and delta must lie in (0,1)");
    const int L = net.depth();
    if (L < 2) throw domain_error("prune_univariate needs a mother net of depth >= 2");
    if (net.input_dim() != 1 || net.output_dim() != 1) throw shape_error("prune_univariate needs a [1, ..., 1] net");
    detail::construction c(net, opt);
    c.build_univariate("univariate", 0, L, 0, 0, target, lo, hi, eps);
    target_fn fn = [&target](const double* x, double* y) { y[0] = eval(target, x[0]); };
    probe_grid grid({lo}, {hi}, opt.grid_points);
    auto rep = std::move(c.report());
    finalize(rep, net, grid, fn, eps, delta);
    return rep;
}

int required_width(width_kind kind, double M, double N, double Q, int d, int m, int L0, double eps, double delta,
                   double C) {
    if (!(eps > 0 && delta > 0 && C > 0 && M > 0 && Q > 0)) throw domain_error("required_width needs positive arguments");
    if (L0 < 2) throw domain_error("required_width needs L0 >= 2");
    double n = 0.0;
    if (kind == width_kind::linear) {
        if (L0 == 2)
            n = C * M * d * std::log(M / std::min(delta / (N + 1.0), eps / Q));
        else
            n = C * M * d / (L0 - 1) *
                std::log(M / std::min(delta / (2.0 * (m + d) * (L0 - 1) + N + 1.0), eps / Q));
    } else {
        const double e = eps / (2.0 * (Q + M));
        if (L0 == 2)
            n = C * M * Q / eps * std::log(M / std::min(delta / (N + 1.0), e));
        else
            n = C * std::max(M, N) / (L0 - 2) * std::log(M / std::min(delta / (L0 * (N + 2.0) - 1.0), e));
    }
    return std::max(0, static_cast<int>(std::ceil(n - 1e-9)));
}

sup_result recompute_error(const mother_net& net, const prune_mask& mask, const probe_grid& grid,
                           const target_fn& target) {
    return sup_error_dense(net, mask, net.lambda(), grid, target);
}

} // namespace ult
