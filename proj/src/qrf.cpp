#include "carbonci/qrf.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "carbonci/conformal.hpp"
#include "carbonci/error.hpp"

namespace carbonci::conformal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Lag matrix view: row i (0-based over targets) has features residuals[i..i+w-1]
/// and target residuals[i+w].
struct TrainingSet {
    std::span<const double> residuals;
    int lags;

    std::size_t rows() const { return residuals.size() - static_cast<std::size_t>(lags); }
    double feature(std::size_t row, int f) const { return residuals[row + static_cast<std::size_t>(f)]; }
    double target(std::size_t row) const { return residuals[row + static_cast<std::size_t>(lags)]; }
};

/// Grows one tree on a bootstrap sample. Each lag feature is sorted once; nodes own a
/// contiguous range of every per-feature order, kept sorted by stable partitioning.
class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& data, const QrfParams& params, std::uint64_t stream_seed)
        : data_(data), params_(params), rng_(stream_seed) {}

    QrfModel::Tree build(const std::vector<std::size_t>& sample) {
        const std::size_t n = sample.size();
        sample_ = &sample;
        order_.assign(static_cast<std::size_t>(data_.lags), std::vector<Entry>(n));
        for (int f = 0; f < data_.lags; ++f) {
            auto& ord = order_[static_cast<std::size_t>(f)];
            for (std::size_t i = 0; i < n; ++i) {
                ord[i] = {data_.feature(sample[i], f), data_.target(sample[i]), static_cast<std::uint32_t>(i)};
            }
            std::sort(ord.begin(), ord.end(), [](const Entry& a, const Entry& b) {
                return a.x < b.x || (a.x == b.x && a.id < b.id);
            });
        }
        goes_left_.assign(n, 0);
        scratch_.resize(n);
        features_.resize(static_cast<std::size_t>(data_.lags));
        grow(0, n, 0);
        order_.clear();
        populate();
        return std::move(tree_);
    }

private:
    struct Entry {
        double x;
        double y;
        std::uint32_t id; // position in the bootstrap sample
    };

    std::size_t draw(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

    int make_leaf(std::size_t begin, std::size_t end) {
        std::vector<std::size_t> rows;
        rows.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) rows.push_back((*sample_)[order_[0][i].id]);
        tree_.nodes.emplace_back();
        leaf_rows_.emplace_back(tree_.nodes.size() - 1, std::move(rows));
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    /// Fills leaf target multisets, either from the in-bag draws or by routing every
    /// training row down the finished tree.
    void populate() {
        std::vector<std::vector<double>> by_node(tree_.nodes.size());
        if (params_.leaf_targets == LeafTargets::InBag) {
            for (const auto& [node, rows] : leaf_rows_) {
                for (std::size_t r : rows) by_node[node].push_back(data_.target(r));
            }
        } else {
            for (std::size_t r = 0; r < data_.rows(); ++r) {
                std::size_t node = 0;
                while (tree_.nodes[node].feature >= 0) {
                    const auto& nd = tree_.nodes[node];
                    node = static_cast<std::size_t>(data_.feature(r, nd.feature) <= nd.threshold ? nd.left : nd.right);
                }
                by_node[node].push_back(data_.target(r));
            }
        }
        for (std::size_t i = 0; i < tree_.nodes.size(); ++i) {
            auto& node = tree_.nodes[i];
            if (node.feature >= 0) continue;
            std::sort(by_node[i].begin(), by_node[i].end());
            node.leaf_begin = static_cast<int>(tree_.targets.size());
            tree_.targets.insert(tree_.targets.end(), by_node[i].begin(), by_node[i].end());
            node.leaf_end = static_cast<int>(tree_.targets.size());
        }
        leaf_rows_.clear();
    }

    int grow(std::size_t begin, std::size_t end, int depth) {
        const std::size_t n = end - begin;
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf_size));
        if ((params_.max_depth >= 0 && depth >= params_.max_depth) || n < 2 * min_leaf) {
            return make_leaf(begin, end);
        }

        // ceil(w/3) candidate features, partial Fisher-Yates.
        const int lags = data_.lags;
        const int mtry = std::max(1, (lags + 2) / 3);
        std::iota(features_.begin(), features_.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const std::size_t j = static_cast<std::size_t>(i) + draw(static_cast<std::size_t>(lags - i));
            std::swap(features_[static_cast<std::size_t>(i)], features_[j]);
        }

        double total = 0.0;
        for (std::size_t i = begin; i < end; ++i) total += order_[0][i].y;
        const double parent_score = total * total / static_cast<double>(n);

        double best_score = parent_score;
        int best_feature = -1;
        std::size_t best_left = 0;
        double best_threshold = 0.0;

        for (int k = 0; k < mtry; ++k) {
            const int f = features_[static_cast<std::size_t>(k)];
            const Entry* xy = order_[static_cast<std::size_t>(f)].data() + begin;
            double left_sum = 0.0;
            for (std::size_t left = 1; left < n; ++left) {
                left_sum += xy[left - 1].y;
                if (left < min_leaf || n - left < min_leaf) continue;
                if (!(xy[left - 1].x < xy[left].x)) continue;
                const double right_sum = total - left_sum;
                // Maximizing this is minimizing the children's summed squared error.
                const double score = left_sum * left_sum / static_cast<double>(left) +
                                     right_sum * right_sum / static_cast<double>(n - left);
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    best_left = left;
                    double mid = xy[left - 1].x + 0.5 * (xy[left].x - xy[left - 1].x);
                    if (!(mid < xy[left].x)) mid = xy[left - 1].x;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) {
            return make_leaf(begin, end);
        }

        const auto& chosen = order_[static_cast<std::size_t>(best_feature)];
        for (std::size_t i = begin; i < end; ++i) goes_left_[chosen[i].id] = i < begin + best_left ? 1 : 0;
        for (auto& ord : order_) {
            std::size_t l = begin, r = 0;
            for (std::size_t i = begin; i < end; ++i) {
                if (goes_left_[ord[i].id]) {
                    ord[l++] = ord[i];
                } else {
                    scratch_[r++] = ord[i];
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                      ord.begin() + static_cast<std::ptrdiff_t>(l));
        }

        const int index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes.back().feature = best_feature;
        tree_.nodes.back().threshold = best_threshold;
        const int l = grow(begin, begin + best_left, depth + 1);
        const int r = grow(begin + best_left, end, depth + 1);
        tree_.nodes[static_cast<std::size_t>(index)].left = l;
        tree_.nodes[static_cast<std::size_t>(index)].right = r;
        return index;
    }

    const TrainingSet& data_;
    const QrfParams& params_;
    std::mt19937_64 rng_;
    const std::vector<std::size_t>* sample_ = nullptr;
    std::vector<std::vector<Entry>> order_;
    std::vector<char> goes_left_;
    std::vector<Entry> scratch_;
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> leaf_rows_;
    std::vector<int> features_;
    QrfModel::Tree tree_;
};

const QrfModel::Node& find_leaf(const QrfModel::Tree& tree, std::span<const double> recent) {
    const QrfModel::Node* node = &tree.nodes.front();
    while (node->feature >= 0) {
        const double x = recent[static_cast<std::size_t>(node->feature)];
        node = &tree.nodes[static_cast<std::size_t>(x <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

std::size_t subtree_depth(const QrfModel::Tree& tree, int index) {
    const auto& node = tree.nodes[static_cast<std::size_t>(index)];
    if (node.feature < 0) return 0;
    return 1 + std::max(subtree_depth(tree, node.left), subtree_depth(tree, node.right));
}

} // namespace

double ConditionalDistribution::quantile(double p) const {
    if (values_.empty()) {
        throw Error(ErrorCode::EmptyInput, "empty conditional distribution");
    }
    if (cumulative_.empty()) {
        return values_[type1_rank(p, values_.size()) - 1];
    }
    // Smallest value whose cumulative weight reaches p of the total.
    const double target = p * total_weight_ * (1.0 - 1e-12);
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) return values_.back();
    return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

std::size_t QrfModel::leaf_count() const {
    std::size_t n = 0;
    for (const auto& t : trees_) {
        for (const auto& node : t.nodes) n += node.feature < 0 ? 1 : 0;
    }
    return n;
}

std::size_t QrfModel::depth() const {
    std::size_t d = 0;
    for (const auto& t : trees_) d = std::max(d, subtree_depth(t, 0));
    return d;
}

ConditionalDistribution QrfModel::conditional(std::span<const double> recent) const {
    if (recent.size() != static_cast<std::size_t>(lag_window_)) {
        throw Error(ErrorCode::LagLengthMismatch, "expected " + std::to_string(lag_window_) + " lagged residuals, got " +
                                                      std::to_string(recent.size()));
    }
    std::vector<const Node*> leaves;
    leaves.reserve(trees_.size());
    bool uniform = true;
    std::size_t pooled = 0;
    for (const auto& tree : trees_) {
        leaves.push_back(&find_leaf(tree, recent));
        const auto sz = static_cast<std::size_t>(leaves.back()->leaf_end - leaves.back()->leaf_begin);
        if (pooled > 0 && sz != static_cast<std::size_t>(leaves.front()->leaf_end - leaves.front()->leaf_begin)) {
            uniform = false;
        }
        pooled += sz;
    }

    ConditionalDistribution dist;
    if (uniform) {
        // Equal leaf sizes: equal per-tree weights are equal per-element weights.
        dist.values_.reserve(pooled);
        for (std::size_t t = 0; t < trees_.size(); ++t) {
            const auto& targets = trees_[t].targets;
            dist.values_.insert(dist.values_.end(), targets.begin() + leaves[t]->leaf_begin,
                                targets.begin() + leaves[t]->leaf_end);
        }
        std::sort(dist.values_.begin(), dist.values_.end());
        dist.total_weight_ = static_cast<double>(pooled);
        return dist;
    }

    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(pooled);
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        const auto& targets = trees_[t].targets;
        const double w = 1.0 / static_cast<double>(leaves[t]->leaf_end - leaves[t]->leaf_begin);
        for (int i = leaves[t]->leaf_begin; i < leaves[t]->leaf_end; ++i) {
            atoms.emplace_back(targets[static_cast<std::size_t>(i)], w);
        }
    }
    std::sort(atoms.begin(), atoms.end());
    dist.values_.reserve(atoms.size());
    dist.cumulative_.reserve(atoms.size());
    double cum = 0.0;
    for (const auto& [v, w] : atoms) {
        cum += w;
        dist.values_.push_back(v);
        dist.cumulative_.push_back(cum);
    }
    dist.total_weight_ = static_cast<double>(trees_.size());
    return dist;
}

double QrfModel::quantile(std::span<const double> recent, double p) const {
    return conditional(recent).quantile(p);
}

QrfModel qrf_fit(std::span<const double> residuals, int lag_window, const QrfParams& params, std::uint64_t seed) {
    if (lag_window < 1) {
        throw Error(ErrorCode::InvalidArgument, "lag window must be >= 1");
    }
    if (params.n_trees < 1) {
        throw Error(ErrorCode::InvalidArgument, "forest needs at least one tree");
    }
    if (residuals.size() <= static_cast<std::size_t>(lag_window) + 1) {
        throw Error(ErrorCode::WindowTooSmall, std::to_string(residuals.size()) + " residuals cannot train lag window " +
                                                   std::to_string(lag_window));
    }

    QrfModel model;
    model.lag_window_ = lag_window;
    model.seed_ = seed;
    model.trees_.resize(static_cast<std::size_t>(params.n_trees));

    if (params.max_depth == 0) {
        // A root-only tree never reads its features, so every residual in the window
        // is a usable target, including the first w that lack a full lag vector.
        for (std::size_t t = 0; t < model.trees_.size(); ++t) {
            QrfModel::Tree tree;
            if (params.bootstrap) {
                std::mt19937_64 tree_rng(splitmix64(seed ^ splitmix64(t)));
                tree.targets.reserve(residuals.size());
                for (std::size_t i = 0; i < residuals.size(); ++i) {
                    tree.targets.push_back(residuals[static_cast<std::size_t>(tree_rng() % residuals.size())]);
                }
            } else {
                tree.targets.assign(residuals.begin(), residuals.end());
            }
            std::sort(tree.targets.begin(), tree.targets.end());
            tree.nodes.push_back({-1, 0.0, -1, -1, 0, static_cast<int>(tree.targets.size())});
            model.trees_[t] = std::move(tree);
        }
        return model;
    }

    const TrainingSet data{residuals, lag_window};
    const std::size_t rows = data.rows();

    auto fit_tree = [&](std::size_t t) {
        const std::uint64_t stream = splitmix64(seed ^ splitmix64(t));
        TreeBuilder builder(data, params, stream);
        std::vector<std::size_t> sample(rows);
        if (params.bootstrap) {
            std::mt19937_64 boot(splitmix64(stream));
            for (auto& s : sample) s = static_cast<std::size_t>(boot() % rows);
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        model.trees_[t] = builder.build(sample);
    };

    const std::size_t n_trees = model.trees_.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, params.threads)), n_trees);
    if (workers <= 1) {
        for (std::size_t t = 0; t < n_trees; ++t) fit_tree(t);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> failures(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t t = w; t < n_trees; t += workers) fit_tree(t);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& f : failures) {
            if (f) std::rethrow_exception(f);
        }
    }
    return model;
}

double qrf_quantile(const QrfModel& model, std::span<const double> recent, double p) {
    return model.quantile(recent, p);
}

} // namespace carbonci::conformal
