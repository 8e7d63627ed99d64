// Information-gain trees, the one-level stump and the three tree ensembles
// (bagged random forest, random committee, random subspace).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "crowncount/util.hpp"
#include "internal.hpp"

namespace crowncount {

double DecisionTree::predict_p1(std::span<const double> x) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& n = nodes[node];
        node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[node].p1;
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) {
        return 0;
    }
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [node, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes[node].feature >= 0) {
            stack.emplace_back(static_cast<std::size_t>(nodes[node].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[node].right), d + 1);
        }
    }
    return deepest;
}

namespace detail {

namespace {

double entropy(double c0, double c1) {
    const double n = c0 + c1;
    double h = 0.0;
    for (const double c : {c0, c1}) {
        if (c > 0.0) {
            const double p = c / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Midpoint between two consecutive distinct values that still separates them.
double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> labels, const TreeParams& params, std::uint64_t seed)
        : x_(x), labels_(labels), params_(params), rng_(seed) {
        features_.resize(x.cols());
        std::iota(features_.begin(), features_.end(), 0);
    }

    DecisionTree build(std::span<const std::size_t> rows) {
        DecisionTree tree;
        struct Pending {
            std::size_t node;
            std::vector<std::size_t> rows;
            int depth;
        };
        tree.nodes.emplace_back();
        std::vector<Pending> stack;
        stack.push_back(Pending{0, std::vector<std::size_t>(rows.begin(), rows.end()), 0});
        while (!stack.empty()) {
            Pending current = std::move(stack.back());
            stack.pop_back();
            double c1 = 0.0;
            for (const std::size_t r : current.rows) {
                c1 += labels_[r];
            }
            const double n = static_cast<double>(current.rows.size());
            tree.nodes[current.node].p1 = n > 0 ? c1 / n : 0.0;

            const bool pure = c1 == 0.0 || c1 == n;
            const bool depth_capped = params_.max_depth > 0 && current.depth >= params_.max_depth;
            if (pure || depth_capped || current.rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) {
                continue;
            }
            const Split split = best_split(current.rows, n - c1, c1);
            if (split.feature < 0) {
                continue;
            }
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (const std::size_t r : current.rows) {
                (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
            }
            const std::size_t left_id = tree.nodes.size();
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& node = tree.nodes[current.node];
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = static_cast<int>(left_id);
            node.right = static_cast<int>(left_id + 1);
            // right pushed first so the left subtree is expanded first
            stack.push_back(Pending{left_id + 1, std::move(right), current.depth + 1});
            stack.push_back(Pending{left_id, std::move(left), current.depth + 1});
        }
        return tree;
    }

private:
    Split best_split(const std::vector<std::size_t>& rows, double c0, double c1) {
        const std::size_t m = features_.size();
        const bool randomized = params_.features_per_split < m;
        if (randomized) {
            std::shuffle(features_.begin(), features_.end(), rng_);
        }
        const double parent = entropy(c0, c1);
        Split best;
        for (std::size_t k = 0; k < m; ++k) {
            if (randomized && k >= params_.features_per_split && best.feature >= 0) {
                break;
            }
            const Split candidate = best_threshold(rows, features_[k], parent, c0, c1);
            if (candidate.feature < 0) {
                continue;
            }
            if (best.feature < 0 || candidate.gain > best.gain ||
                (candidate.gain == best.gain && candidate.feature < best.feature)) {
                best = candidate;
            }
        }
        return best;
    }

    Split best_threshold(const std::vector<std::size_t>& rows, int feature, double parent, double c0, double c1) {
        const auto f = static_cast<std::size_t>(feature);
        column_.clear();
        for (const std::size_t r : rows) {
            column_.emplace_back(x_(r, f), labels_[r]);
        }
        std::sort(column_.begin(), column_.end());
        const double n = c0 + c1;
        const auto min_leaf = static_cast<double>(params_.min_leaf);
        double left0 = 0.0;
        double left1 = 0.0;
        Split best;
        for (std::size_t i = 0; i + 1 < column_.size(); ++i) {
            (column_[i].second == 1 ? left1 : left0) += 1.0;
            if (column_[i].first == column_[i + 1].first) {
                continue;
            }
            const double nl = left0 + left1;
            const double nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) {
                continue;
            }
            const double gain = parent - (nl / n) * entropy(left0, left1) - (nr / n) * entropy(c0 - left0, c1 - left1);
            if (gain > 1e-12 && gain > best.gain) {
                best = Split{feature, midpoint(column_[i].first, column_[i + 1].first), gain};
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const int> labels_;
    TreeParams params_;
    std::mt19937_64 rng_;
    std::vector<int> features_;
    std::vector<std::pair<double, int>> column_;
};

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

}  // namespace

DecisionTree build_tree(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> rows,
                        const TreeParams& params, std::uint64_t seed) {
    TreeBuilder builder(x, labels, params, seed);
    return builder.build(rows);
}

TreeEnsembleModel fit_random_forest(const TrainingSet& data, int trees, const TreeParams& params, bool bootstrap,
                                    std::uint64_t seed, bool parallel) {
    const std::size_t n = data.size();
    TreeEnsembleModel model;
    model.trees.resize(static_cast<std::size_t>(trees));
    // Every tree draws from its own stream, so the thread count cannot change the result.
    const auto grow = [&](std::size_t t) {
        const std::uint64_t tree_seed = derive_seed(seed, t);
        std::vector<std::size_t> rows;
        if (bootstrap) {
            std::mt19937_64 sampler(derive_seed(tree_seed, "bootstrap"));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            rows.resize(n);
            for (auto& r : rows) {
                r = pick(sampler);
            }
        } else {
            rows = all_rows(n);
        }
        model.trees[t] = build_tree(data.features, data.labels, rows, params, derive_seed(tree_seed, "split"));
    };
    if (parallel) {
        parallel_for(0, model.trees.size(), grow);
    } else {
        for (std::size_t t = 0; t < model.trees.size(); ++t) {
            grow(t);
        }
    }
    return model;
}

TreeEnsembleModel fit_random_committee(const TrainingSet& data, int trees, const TreeParams& params,
                                       std::uint64_t seed) {
    TreeEnsembleModel model;
    const std::vector<std::size_t> rows = all_rows(data.size());
    for (int t = 0; t < trees; ++t) {
        model.trees.push_back(
            build_tree(data.features, data.labels, rows, params, derive_seed(seed, static_cast<std::uint64_t>(t))));
    }
    return model;
}

TreeEnsembleModel fit_random_subspace(const TrainingSet& data, int trees, const TreeParams& params,
                                      double fraction, std::uint64_t seed) {
    const std::size_t n = data.size();
    const std::size_t m = data.feature_count();
    const std::size_t width =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(fraction * static_cast<double>(m))), 1, m);
    const std::vector<std::size_t> rows = all_rows(n);
    TreeParams sub_params = params;
    sub_params.features_per_split = width;

    TreeEnsembleModel model;
    std::vector<int> columns(m);
    for (int t = 0; t < trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::iota(columns.begin(), columns.end(), 0);
        std::shuffle(columns.begin(), columns.end(), rng);
        std::vector<int> subset(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(width));
        std::sort(subset.begin(), subset.end());

        Matrix projected(n, width);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < width; ++j) {
                projected(i, j) = data.features(i, static_cast<std::size_t>(subset[j]));
            }
        }
        DecisionTree tree = build_tree(projected, data.labels, rows, sub_params, 0);
        for (TreeNode& node : tree.nodes) {
            if (node.feature >= 0) {
                node.feature = subset[static_cast<std::size_t>(node.feature)];
            }
        }
        model.trees.push_back(std::move(tree));
        model.feature_subsets.push_back(std::move(subset));
    }
    return model;
}

double predict_p1(const TreeEnsembleModel& model, std::span<const double> x) {
    double sum = 0.0;
    for (const DecisionTree& tree : model.trees) {
        sum += tree.predict_p1(x);
    }
    return sum / static_cast<double>(model.trees.size());
}

double predict_p1(const DecisionTree& model, std::span<const double> x) { return model.predict_p1(x); }

DecisionStumpModel fit_decision_stump(const TrainingSet& data) {
    const std::size_t n = data.size();
    const std::size_t m = data.feature_count();
    double total1 = 0.0;
    for (const int y : data.labels) {
        total1 += y;
    }
    const double total0 = static_cast<double>(n) - total1;

    DecisionStumpModel best;
    best.p1_left = best.p1_right = total1 / static_cast<double>(n);
    best.threshold = std::numeric_limits<double>::max();
    double best_errors = std::min(total0, total1);
    bool found = false;

    std::vector<std::pair<double, int>> column(n);
    for (std::size_t f = 0; f < m; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = {data.features(i, f), data.labels[i]};
        }
        std::sort(column.begin(), column.end());
        double left0 = 0.0;
        double left1 = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            (column[i].second == 1 ? left1 : left0) += 1.0;
            if (column[i].first == column[i + 1].first) {
                continue;
            }
            const double right0 = total0 - left0;
            const double right1 = total1 - left1;
            const double errors = std::min(left0, left1) + std::min(right0, right1);
            if (!found || errors < best_errors) {
                found = true;
                best_errors = errors;
                best.feature = static_cast<int>(f);
                best.threshold = midpoint(column[i].first, column[i + 1].first);
                best.p1_left = left1 / (left0 + left1);
                best.p1_right = right1 / (right0 + right1);
            }
        }
    }
    return best;
}

double predict_p1(const DecisionStumpModel& model, std::span<const double> x) {
    return x[static_cast<std::size_t>(model.feature)] <= model.threshold ? model.p1_left : model.p1_right;
}

}  // namespace detail
}  // namespace crowncount
