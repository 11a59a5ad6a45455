#pragma once

#include "bp/dataset.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bp {

/// Row-major numeric matrix; the feature/target container for training.
struct DataMatrix {
    int cols = 0;
    std::vector<double> data;

    int rows() const {
        return cols == 0 ? 0 : static_cast<int>(data.size()) / cols;
    }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct TreeParams {
    int max_features = 5;     // features examined per split
    int min_samples_leaf = 2; // smallest allowed leaf
    int max_depth = -1;       // -1 = unlimited ("fully grown")
};

/// Internal nodes carry (feature, threshold, children); leaves carry the
/// mean target. n_samples / impurity stay around for inspection.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int n_samples = 0;
    double impurity = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    std::vector<double> raw_importance; // per-feature sum of p(t) * delta_i(t)

    double predict(const double* row) const;
};

/// Greedy variance-reduction CART over the given rows. The split
/// maximizing the impurity decrease wins; ties go to the lowest feature
/// index, then the lowest threshold.
Tree fit_tree(const DataMatrix& x, const std::vector<double>& y,
              const std::vector<int>& rows, const TreeParams& params,
              std::uint64_t seed);

struct ForestParams {
    int num_trees = 200;
    TreeParams tree;
    bool bootstrap = true; // off only for degenerate-ensemble tests
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// One independent forest per target column.
struct ForestModel {
    ForestParams params;
    std::uint64_t seed = 0;
    int num_features = 0;
    std::array<std::vector<Tree>, kNumMitigations> forests;

    bool trained() const { return !forests[0].empty(); }
};

/// Y must have kNumMitigations columns and X kNumFeatures columns.
ForestModel fit_forest(const DataMatrix& x, const DataMatrix& y,
                       const ForestParams& params, std::uint64_t seed);

/// Mean of the per-tree predictions, clamped to the valid log-BER range.
std::array<double, kNumMitigations> predict(const ForestModel& model,
                                            const std::array<double, kNumFeatures>& x);

struct ImportanceReport {
    std::array<std::array<double, kNumFeatures>, kNumMitigations> per_target{};
    std::array<double, kNumFeatures> combined{};
};

/// Mean-decrease-of-impurity importances, normalized to sum to one per
/// target; the combined report averages the per-target vectors.
ImportanceReport mdi_importance(const ForestModel& model);

/// Per-column root-mean-square error between two target matrices.
std::array<double, kNumMitigations> rmse(const DataMatrix& pred,
                                         const DataMatrix& truth);

/// Everything needed to reuse a model later: the ensemble, the feature
/// pipeline learned from the training split, and the split itself.
struct ModelFile {
    ForestModel model;
    FeatureStats stats;
    std::vector<int> train_indices;
    std::vector<int> test_indices;
};

void save_model(const ModelFile& mf, const std::string& path);
ModelFile load_model(const std::string& path);

/// Assemble feature/target matrices for a subset of records.
DataMatrix feature_matrix(const std::vector<TrialRecord>& records,
                          const std::vector<int>& indices,
                          const FeatureStats& stats);
DataMatrix target_matrix(const std::vector<TrialRecord>& records,
                         const std::vector<int>& indices);

} // namespace bp
