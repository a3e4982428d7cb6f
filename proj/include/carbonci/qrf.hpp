#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace carbonci::conformal {

/// What a leaf keeps: the bootstrap draws that built it, or every training pair that
/// falls into it (each pair once).
enum class LeafTargets { InBag, AllRows };

struct QrfParams {
    int n_trees = 25;
    int max_depth = -1;     // -1: unlimited. 0: every tree is a single root leaf.
    int min_leaf_size = 5;
    bool bootstrap = true;
    int threads = 1;        // trees are fitted concurrently; output does not depend on this
    LeafTargets leaf_targets = LeafTargets::AllRows;
};

/// Pooled leaf multisets reached by one lag vector, weighted equally per tree.
class ConditionalDistribution {
public:
    ConditionalDistribution() = default;

    /// Type-1 (ceil-index) quantile of the weighted pool. p=0 gives the minimum, p=1 the maximum.
    double quantile(double p) const;
    std::size_t size() const { return values_.size(); }

private:
    friend class QrfModel;
    std::vector<double> values_;     // ascending
    std::vector<double> cumulative_; // per-tree-normalized cumulative weight; empty when uniform
    double total_weight_ = 0.0;
};

/// Quantile regression forest over lagged residuals: features are the previous
/// `lag_window` residuals, the target is the next residual. Leaves keep the full
/// target multiset.
class QrfModel {
public:
    int lag_window() const { return lag_window_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t tree_count() const { return trees_.size(); }
    std::size_t leaf_count() const;
    std::size_t depth() const;

    ConditionalDistribution conditional(std::span<const double> recent) const;
    double quantile(std::span<const double> recent, double p) const;

    bool operator==(const QrfModel&) const = default;

    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int leaf_begin = 0; // into Tree::targets
        int leaf_end = 0;
        bool operator==(const Node&) const = default;
    };
    struct Tree {
        std::vector<Node> nodes;
        std::vector<double> targets;
        bool operator==(const Tree&) const = default;
    };

    const std::vector<Tree>& trees() const { return trees_; }

private:
    friend QrfModel qrf_fit(std::span<const double>, int, const QrfParams&, std::uint64_t);
    std::vector<Tree> trees_;
    int lag_window_ = 0;
    std::uint64_t seed_ = 0;
};

/// Fits on pairs (residuals[i-w..i-1] -> residuals[i]). Each tree draws its bootstrap
/// sample and feature subsets from its own stream seeded by (seed, tree index).
QrfModel qrf_fit(std::span<const double> residuals, int lag_window, const QrfParams& params, std::uint64_t seed);

double qrf_quantile(const QrfModel& model, std::span<const double> recent, double p);

} // namespace carbonci::conformal
