#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "slf/core.hpp"

namespace slf::gbt {

struct TrainParams {
    int nrounds = 500;
    int max_depth = 8;
    double eta = 0.05;
    double lambda = 1.0;
    double gamma = 0.0;
    int min_samples_leaf = 1;
    double base_score = 0.0;

    void validate() const {
        if (nrounds < 0) throw InvalidArgument("TrainParams: nrounds must be >= 0");
        if (max_depth < 0 || max_depth > 14)
            throw InvalidArgument("TrainParams: max_depth must be in [0, 14]");
        if (!(eta > 0.0) || eta > 1.0)
            throw InvalidArgument("TrainParams: eta must be in (0, 1]");
        if (lambda < 0.0) throw InvalidArgument("TrainParams: lambda must be >= 0");
        if (gamma < 0.0) throw InvalidArgument("TrainParams: gamma must be >= 0");
        if (min_samples_leaf < 1)
            throw InvalidArgument("TrainParams: min_samples_leaf must be >= 1");
        if (!std::isfinite(base_score))
            throw InvalidArgument("TrainParams: base_score must be finite");
    }
};

struct GradHess {
    double g = 0.0;
    double h = 0.0;
};

/// Squared-error loss l = (pred - target)^2 / 2.
inline GradHess grad_hess(double target, double pred) {
    return {pred - target, 1.0};
}

inline double leaf_weight(double g_sum, double h_sum, double lambda) {
    if (!(h_sum + lambda > 0.0))
        throw InvalidArgument("leaf_weight: H + lambda must be > 0");
    return -g_sum / (h_sum + lambda);
}

inline double split_gain(double gl, double hl, double gr, double hr, double lambda,
                         double gamma) {
    const double gt = gl + gr;
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                  gt * gt / (hl + hr + lambda)) -
           gamma;
}

/// Flat binary tree; nodes[0] is the root, feature < 0 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    double weight = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double eval(const double* features) const {
        std::int32_t i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            const double v = features[n.feature];
            const bool go_left = is_missing(v) ? n.default_left : v < n.threshold;
            i = go_left ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].weight;
    }
};

struct BoostedModel {
    std::vector<Tree> trees;
    double eta = 1.0;
    double base_score = 0.0;
    int n_features = 0;

    double predict(std::span<const double> features) const {
        if (static_cast<int>(features.size()) != n_features)
            throw InvalidArgument("predict: feature length mismatch");
        double acc = 0.0;
        for (const Tree& t : trees) acc += t.eval(features.data());
        return base_score + eta * acc;
    }
};

/// Row-major dense matrix; kMissing (NaN) marks absent entries.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), data(r * c, kMissing) {}

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    double gain = 0.0;
};

namespace detail {

/// Threshold strictly above `lo` and at most `hi`, so `x < threshold` routes
/// values <= lo left and values >= hi right even for adjacent doubles.
inline double midpoint(double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    return mid > lo ? mid : hi;
}

struct BestSplit {
    double gain = 0.0;  // candidates must exceed 0 to register
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;

    bool valid() const { return feature >= 0; }
};

inline void consider(BestSplit& best, int feature, double threshold, bool default_left,
                     double gl, double hl, std::int64_t cl, double gt, double ht,
                     std::int64_t ct, const TrainParams& p) {
    const std::int64_t cr = ct - cl;
    if (cl < p.min_samples_leaf || cr < p.min_samples_leaf) return;
    const double gr = gt - gl;
    const double hr = ht - hl;
    const double gain = 0.5 * (gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda) -
                               gt * gt / (ht + p.lambda)) -
                        p.gamma;
    if (gain > best.gain) best = {gain, feature, threshold, default_left};
}

}  // namespace detail

/// Exhaustive single-node split search over every feature, every midpoint
/// between consecutive distinct present values, and both missing-value
/// default directions. Ties resolve to the lowest feature index, then the
/// lowest threshold, then default-left.
inline std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x,
                                                     std::span<const GradHess> gh,
                                                     std::span<const std::int32_t> members,
                                                     const TrainParams& p) {
    p.validate();
    double gt = 0.0, ht = 0.0;
    for (std::int32_t r : members) {
        gt += gh[static_cast<std::size_t>(r)].g;
        ht += gh[static_cast<std::size_t>(r)].h;
    }
    const auto ct = static_cast<std::int64_t>(members.size());

    detail::BestSplit best;
    std::vector<std::pair<double, std::int32_t>> present;
    for (int f = 0; f < static_cast<int>(x.cols); ++f) {
        present.clear();
        double miss_g = 0.0, miss_h = 0.0;
        std::int64_t miss_c = 0;
        for (std::int32_t r : members) {
            const double v = x(static_cast<std::size_t>(r), static_cast<std::size_t>(f));
            if (is_missing(v)) {
                miss_g += gh[static_cast<std::size_t>(r)].g;
                miss_h += gh[static_cast<std::size_t>(r)].h;
                ++miss_c;
            } else {
                present.emplace_back(v, r);
            }
        }
        std::sort(present.begin(), present.end());

        double pg = 0.0, ph = 0.0;
        std::int64_t pc = 0;
        for (std::size_t i = 0; i < present.size(); ++i) {
            pg += gh[static_cast<std::size_t>(present[i].second)].g;
            ph += gh[static_cast<std::size_t>(present[i].second)].h;
            ++pc;
            if (i + 1 >= present.size() || present[i + 1].first == present[i].first)
                continue;
            const double thr = detail::midpoint(present[i].first, present[i + 1].first);
            if (miss_c > 0) {
                detail::consider(best, f, thr, true, pg + miss_g, ph + miss_h,
                                 pc + miss_c, gt, ht, ct, p);
                detail::consider(best, f, thr, false, pg, ph, pc, gt, ht, ct, p);
            } else {
                detail::consider(best, f, thr, true, pg, ph, pc, gt, ht, ct, p);
            }
        }
    }
    if (!best.valid()) return std::nullopt;
    return SplitCandidate{best.feature, best.threshold, best.default_left, best.gain};
}

/// Level-wise exact-greedy trainer over one feature matrix. Presorts each
/// feature once, so several models (or rounds) on the same matrix share the
/// expensive setup. Single-threaded; all reductions run in a fixed order,
/// so results are bit-reproducible.
class Booster {
  public:
    explicit Booster(const FeatureMatrix& x)
        : x_(x),
          n_rows_(static_cast<std::int64_t>(x.rows)),
          n_cols_(static_cast<int>(x.cols)) {
        if (n_rows_ >= std::numeric_limits<std::int32_t>::max())
            throw InvalidArgument("Booster: row count exceeds supported range");
        build_presort();
        node_of_.resize(static_cast<std::size_t>(n_rows_));
        g_.resize(static_cast<std::size_t>(n_rows_));
    }

    /// Squared-error boosting: g = pred - target, h = 1. When `final_pred`
    /// is given it receives the model's predictions on the training rows.
    BoostedModel train(std::span<const double> targets, const TrainParams& p,
                       std::vector<double>* final_pred = nullptr) {
        p.validate();
        if (n_rows_ == 0) throw InvalidArgument("train: empty dataset");
        if (static_cast<std::int64_t>(targets.size()) != n_rows_)
            throw InvalidArgument("train: target count mismatch");
        for (double t : targets)
            if (!std::isfinite(t)) throw InvalidArgument("train: non-finite target");

        build_recip_table(p.lambda);
        pred_.assign(static_cast<std::size_t>(n_rows_), p.base_score);

        BoostedModel model;
        model.eta = p.eta;
        model.base_score = p.base_score;
        model.n_features = n_cols_;
        model.trees.reserve(static_cast<std::size_t>(p.nrounds));
        for (int round = 0; round < p.nrounds; ++round) {
            for (std::int64_t r = 0; r < n_rows_; ++r)
                g_[static_cast<std::size_t>(r)] =
                    pred_[static_cast<std::size_t>(r)] - targets[static_cast<std::size_t>(r)];
            refresh_sorted_g();
            model.trees.push_back(build_tree<true>(p, pred_.data(), p.eta));
        }
        if (final_pred) *final_pred = pred_;
        return model;
    }

    /// One tree from caller-supplied gradients, arbitrary Hessians.
    Tree fit_tree(std::span<const GradHess> gh, const TrainParams& p) {
        p.validate();
        if (n_rows_ == 0) throw InvalidArgument("fit_tree: empty dataset");
        if (static_cast<std::int64_t>(gh.size()) != n_rows_)
            throw InvalidArgument("fit_tree: gradient count mismatch");
        h_.resize(static_cast<std::size_t>(n_rows_));
        for (std::int64_t r = 0; r < n_rows_; ++r) {
            g_[static_cast<std::size_t>(r)] = gh[static_cast<std::size_t>(r)].g;
            h_[static_cast<std::size_t>(r)] = gh[static_cast<std::size_t>(r)].h;
        }
        refresh_sorted_g();
        refresh_sorted_h();
        return build_tree<false>(p, nullptr, 0.0);
    }

  private:
    static constexpr std::uint16_t kDead = 0xFFFF;

    struct LevelNode {
        double g_sum = 0.0;
        double h_sum = 0.0;
        std::int32_t count = 0;
        std::int32_t tree_index = 0;
        std::int32_t left_local = -1;  // < 0 once finalized as a leaf
        double leaf_w = 0.0;
        detail::BestSplit best;
    };

    void build_presort() {
        std::vector<std::vector<std::pair<double, std::int32_t>>> tmp(
            static_cast<std::size_t>(n_cols_));
        for (auto& v : tmp) v.reserve(static_cast<std::size_t>(n_rows_) / 2 + 16);
        for (std::int64_t r = 0; r < n_rows_; ++r) {
            const double* row = x_.row_ptr(static_cast<std::size_t>(r));
            for (int f = 0; f < n_cols_; ++f)
                if (!is_missing(row[f]))
                    tmp[static_cast<std::size_t>(f)].emplace_back(
                        row[f], static_cast<std::int32_t>(r));
        }
        order_.resize(static_cast<std::size_t>(n_cols_));
        vals_.resize(static_cast<std::size_t>(n_cols_));
        sorted_g_.resize(static_cast<std::size_t>(n_cols_));
        for (int f = 0; f < n_cols_; ++f) {
            auto& col = tmp[static_cast<std::size_t>(f)];
            std::sort(col.begin(), col.end());
            order_[static_cast<std::size_t>(f)].resize(col.size());
            vals_[static_cast<std::size_t>(f)].resize(col.size());
            sorted_g_[static_cast<std::size_t>(f)].resize(col.size());
            for (std::size_t i = 0; i < col.size(); ++i) {
                vals_[static_cast<std::size_t>(f)][i] = col[i].first;
                order_[static_cast<std::size_t>(f)][i] = col[i].second;
            }
            col.clear();
            col.shrink_to_fit();
        }
    }

    void refresh_sorted_g() {
        for (int f = 0; f < n_cols_; ++f) {
            const auto& ord = order_[static_cast<std::size_t>(f)];
            auto& gs = sorted_g_[static_cast<std::size_t>(f)];
            for (std::size_t i = 0; i < ord.size(); ++i)
                gs[i] = g_[static_cast<std::size_t>(ord[i])];
        }
    }

    void refresh_sorted_h() {
        sorted_h_.resize(static_cast<std::size_t>(n_cols_));
        for (int f = 0; f < n_cols_; ++f) {
            const auto& ord = order_[static_cast<std::size_t>(f)];
            auto& hs = sorted_h_[static_cast<std::size_t>(f)];
            hs.resize(ord.size());
            for (std::size_t i = 0; i < ord.size(); ++i)
                hs[i] = h_[static_cast<std::size_t>(ord[i])];
        }
    }

    // 1/(count + lambda) for every possible child count; trades the two
    // divisions per split candidate for L1/L2 table loads.
    void build_recip_table(double lambda) {
        if (!recip_.empty() && recip_lambda_ == lambda) return;
        recip_.resize(static_cast<std::size_t>(n_rows_) + 1);
        for (std::int64_t c = 0; c <= n_rows_; ++c)
            recip_[static_cast<std::size_t>(c)] = 1.0 / (static_cast<double>(c) + lambda);
        recip_lambda_ = lambda;
    }

    template <bool UnitH>
    void scan_feature(int f, std::vector<LevelNode>& level, const TrainParams& p) {
        const std::size_t n_nodes = level.size();
        present_g_.assign(n_nodes, 0.0);
        present_c_.assign(n_nodes, 0);
        if constexpr (!UnitH) present_h_.assign(n_nodes, 0.0);

        const auto& ord = order_[static_cast<std::size_t>(f)];
        const double* gs = sorted_g_[static_cast<std::size_t>(f)].data();
        const std::size_t m = ord.size();

        // Resolves the row->node indirection once; the second pass then
        // streams node ids sequentially instead of re-gathering.
        node_sorted_.resize(m);
        const std::uint16_t* node_of = node_of_.data();
        const std::int32_t* ord_p = ord.data();
        for (std::size_t i = 0; i < m; ++i) {
            if (i + 24 < m) __builtin_prefetch(node_of + ord_p[i + 24], 0, 1);
            const std::uint16_t n = node_of[ord_p[i]];
            node_sorted_[i] = n;
            if (n == kDead) continue;
            present_g_[n] += gs[i];
            ++present_c_[n];
            if constexpr (!UnitH) present_h_[n] += sorted_h_[static_cast<std::size_t>(f)][i];
        }

        miss_g_.resize(n_nodes);
        miss_c_.resize(n_nodes);
        if constexpr (!UnitH) miss_h_.resize(n_nodes);
        if constexpr (UnitH) parent_score_.resize(n_nodes);
        bool any_boundary = false;
        for (std::size_t n = 0; n < n_nodes; ++n) {
            miss_g_[n] = level[n].g_sum - present_g_[n];
            miss_c_[n] = level[n].count - present_c_[n];
            if constexpr (!UnitH) miss_h_[n] = level[n].h_sum - present_h_[n];
            if constexpr (UnitH)
                parent_score_[n] = level[n].g_sum * level[n].g_sum *
                                   recip_[static_cast<std::size_t>(level[n].count)];
            if (present_c_[n] > 1) any_boundary = true;
        }
        if (!any_boundary) return;

        prefix_g_.assign(n_nodes, 0.0);
        prefix_c_.assign(n_nodes, 0);
        if constexpr (!UnitH) prefix_h_.assign(n_nodes, 0.0);
        last_val_.assign(n_nodes, 0.0);

        const double* vs = vals_[static_cast<std::size_t>(f)].data();
        const double lambda = p.lambda;
        const double gamma = p.gamma;
        const std::int32_t msl = p.min_samples_leaf;

        const std::uint16_t* ns = node_sorted_.data();
        for (std::size_t i = 0; i < m; ++i) {
            const std::uint16_t n = ns[i];
            if (n == kDead) continue;
            const double v = vs[i];
            const double gv = gs[i];
            const std::int32_t pc = prefix_c_[n];
            if (pc > 0 && v != last_val_[n]) {
                LevelNode& node = level[n];
                const double thr = detail::midpoint(last_val_[n], v);
                const double gt = node.g_sum;
                const std::int32_t ct = node.count;
                const double pg = prefix_g_[n];
                if constexpr (UnitH) {
                    const double parent_score = parent_score_[n];
                    auto eval_dir = [&](double gl, std::int32_t cl, bool dleft) {
                        const std::int32_t cr = ct - cl;
                        if (cl < msl || cr < msl) return;
                        const double gr = gt - gl;
                        const double gain =
                            0.5 * (gl * gl * recip_[static_cast<std::size_t>(cl)] +
                                   gr * gr * recip_[static_cast<std::size_t>(cr)] -
                                   parent_score) -
                            gamma;
                        if (gain > node.best.gain) node.best = {gain, f, thr, dleft};
                    };
                    if (miss_c_[n] > 0) {
                        eval_dir(pg + miss_g_[n], pc + miss_c_[n], true);
                        eval_dir(pg, pc, false);
                    } else {
                        eval_dir(pg, pc, true);
                    }
                } else {
                    const double ht = node.h_sum;
                    const double ph = prefix_h_[n];
                    auto eval_dir = [&](double gl, double hl, std::int32_t cl, bool dleft) {
                        const std::int32_t cr = ct - cl;
                        if (cl < msl || cr < msl) return;
                        const double gr = gt - gl;
                        const double hr = ht - hl;
                        const double gain = 0.5 * (gl * gl / (hl + lambda) +
                                                   gr * gr / (hr + lambda) -
                                                   gt * gt / (ht + lambda)) -
                                            gamma;
                        if (gain > node.best.gain) node.best = {gain, f, thr, dleft};
                    };
                    if (miss_c_[n] > 0) {
                        eval_dir(pg + miss_g_[n], ph + miss_h_[n], pc + miss_c_[n], true);
                        eval_dir(pg, ph, pc, false);
                    } else {
                        eval_dir(pg, ph, pc, true);
                    }
                }
            }
            prefix_g_[n] += gv;
            prefix_c_[n] = pc + 1;
            if constexpr (!UnitH) prefix_h_[n] += sorted_h_[static_cast<std::size_t>(f)][i];
            last_val_[n] = v;
        }
    }

    template <bool UnitH>
    Tree build_tree(const TrainParams& p, double* pred, double eta) {
        Tree tree;
        tree.nodes.emplace_back();
        std::fill(node_of_.begin(), node_of_.end(), std::uint16_t{0});

        std::vector<LevelNode> level(1);
        {
            LevelNode& root = level[0];
            for (std::int64_t r = 0; r < n_rows_; ++r) root.g_sum += g_[static_cast<std::size_t>(r)];
            if constexpr (UnitH) {
                root.h_sum = static_cast<double>(n_rows_);
            } else {
                for (std::int64_t r = 0; r < n_rows_; ++r)
                    root.h_sum += h_[static_cast<std::size_t>(r)];
            }
            root.count = static_cast<std::int32_t>(n_rows_);
            root.tree_index = 0;
        }

        std::vector<LevelNode> next;
        for (int depth = 0;; ++depth) {
            const bool at_max = depth >= p.max_depth;
            if (!at_max) {
                const bool searchable = std::any_of(
                    level.begin(), level.end(), [&](const LevelNode& n) {
                        return n.count >= 2 * p.min_samples_leaf;
                    });
                if (searchable)
                    for (int f = 0; f < n_cols_; ++f) scan_feature<UnitH>(f, level, p);
            }

            next.clear();
            for (LevelNode& n : level) {
                if (!at_max && n.best.valid()) {
                    const auto left_tree = static_cast<std::int32_t>(tree.nodes.size());
                    tree.nodes.emplace_back();
                    tree.nodes.emplace_back();
                    TreeNode& s = tree.nodes[static_cast<std::size_t>(n.tree_index)];
                    s.feature = n.best.feature;
                    s.threshold = n.best.threshold;
                    s.default_left = n.best.default_left;
                    s.left = left_tree;
                    s.right = left_tree + 1;
                    n.left_local = static_cast<std::int32_t>(next.size());
                    LevelNode l, r;
                    l.tree_index = left_tree;
                    r.tree_index = left_tree + 1;
                    next.push_back(l);
                    next.push_back(r);
                } else {
                    const double h_eff = UnitH ? static_cast<double>(n.count) : n.h_sum;
                    n.leaf_w = leaf_weight(n.g_sum, h_eff, p.lambda);
                    n.left_local = -1;
                    tree.nodes[static_cast<std::size_t>(n.tree_index)].weight = n.leaf_w;
                }
            }

            for (std::int64_t r = 0; r < n_rows_; ++r) {
                const std::uint16_t nid = node_of_[static_cast<std::size_t>(r)];
                if (nid == kDead) continue;
                const LevelNode& n = level[nid];
                if (n.left_local < 0) {
                    if (pred) pred[static_cast<std::size_t>(r)] += eta * n.leaf_w;
                    node_of_[static_cast<std::size_t>(r)] = kDead;
                    continue;
                }
                const TreeNode& s = tree.nodes[static_cast<std::size_t>(n.tree_index)];
                const double v = x_(static_cast<std::size_t>(r),
                                    static_cast<std::size_t>(s.feature));
                const bool go_left = is_missing(v) ? s.default_left : v < s.threshold;
                const auto child =
                    static_cast<std::uint16_t>(n.left_local + (go_left ? 0 : 1));
                node_of_[static_cast<std::size_t>(r)] = child;
                LevelNode& c = next[child];
                c.g_sum += g_[static_cast<std::size_t>(r)];
                if constexpr (!UnitH) c.h_sum += h_[static_cast<std::size_t>(r)];
                ++c.count;
            }
            if (next.empty()) break;
            level.swap(next);
        }
        return tree;
    }

    const FeatureMatrix& x_;
    std::int64_t n_rows_;
    int n_cols_;

    std::vector<std::vector<std::int32_t>> order_;
    std::vector<std::vector<double>> vals_;
    std::vector<std::vector<double>> sorted_g_;
    std::vector<std::vector<double>> sorted_h_;
    std::vector<std::uint16_t> node_of_;
    std::vector<std::uint16_t> node_sorted_;
    std::vector<double> g_, h_, pred_;
    std::vector<double> recip_;
    double recip_lambda_ = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> present_g_, present_h_, miss_g_, miss_h_, parent_score_;
    std::vector<double> prefix_g_, prefix_h_, last_val_;
    std::vector<std::int32_t> present_c_, prefix_c_;
    std::vector<std::int32_t> miss_c_;
};

inline Tree fit_tree(const FeatureMatrix& x, std::span<const GradHess> gh,
                     const TrainParams& p) {
    Booster b(x);
    return b.fit_tree(gh, p);
}

inline BoostedModel train(const FeatureMatrix& x, std::span<const double> targets,
                          const TrainParams& p) {
    Booster b(x);
    return b.train(targets, p);
}

}  // namespace slf::gbt
