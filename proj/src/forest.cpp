#include "bp/forest.hpp"

#include "bp/parallel.hpp"
#include "bp/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace bp {

namespace {

constexpr double kLogBerMin = -40.0;            // 10 log10(1e-4)
const double kLogBerMax = 10.0 * std::log10(0.5);

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0; // delta_i(t)
};

struct NodeStats {
    int n = 0;
    double mean = 0.0;
    double impurity = 0.0; // variance of the node's targets
};

NodeStats node_stats(const std::vector<double>& y, const std::vector<int>& rows) {
    NodeStats s;
    s.n = static_cast<int>(rows.size());
    double sum = 0.0, sumsq = 0.0;
    for (int r : rows) {
        sum += y[static_cast<std::size_t>(r)];
        sumsq += y[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(r)];
    }
    s.mean = sum / s.n;
    s.impurity = std::max(0.0, sumsq / s.n - s.mean * s.mean);
    return s;
}

class TreeBuilder {
public:
    TreeBuilder(const DataMatrix& x, const std::vector<double>& y,
                const TreeParams& params, std::uint64_t seed, int total_samples)
        : x_(x), y_(y), params_(params), rng_(seed), total_(total_samples) {
        tree_.raw_importance.assign(static_cast<std::size_t>(x.cols), 0.0);
        features_.resize(static_cast<std::size_t>(x.cols));
        std::iota(features_.begin(), features_.end(), 0);
    }

    Tree build(std::vector<int> rows) {
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<int> rows, int depth) {
        const NodeStats stats = node_stats(y_, rows);
        const int node_id = static_cast<int>(tree_.nodes.size());
        TreeNode node;
        node.value = stats.mean;
        node.n_samples = stats.n;
        node.impurity = stats.impurity;
        tree_.nodes.push_back(node);

        const bool can_split = stats.n >= 2 * params_.min_samples_leaf &&
                               stats.impurity > 1e-24 &&
                               (params_.max_depth < 0 || depth < params_.max_depth);
        if (!can_split) return node_id;

        const SplitChoice split = best_split(rows, stats);
        if (!split.found) return node_id;

        tree_.raw_importance[static_cast<std::size_t>(split.feature)] +=
            (static_cast<double>(stats.n) / total_) * split.gain;

        std::vector<int> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (int r : rows) {
            if (x_.at(r, split.feature) <= split.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        tree_.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
        tree_.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
        const int left = grow(std::move(left_rows), depth + 1);
        tree_.nodes[static_cast<std::size_t>(node_id)].left = left;
        const int right = grow(std::move(right_rows), depth + 1);
        tree_.nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

    SplitChoice best_split(const std::vector<int>& rows, const NodeStats& stats) {
        // Seeded feature subsample, examined in ascending index order so
        // equal gains resolve to the lowest feature.
        const int p = x_.cols;
        const int mtry = std::clamp(params_.max_features, 1, p);
        for (int i = 0; i < mtry; ++i) {
            const int j =
                i + static_cast<int>(rng_.bounded(static_cast<std::uint64_t>(p - i)));
            std::swap(features_[static_cast<std::size_t>(i)],
                      features_[static_cast<std::size_t>(j)]);
        }
        std::sort(features_.begin(), features_.begin() + mtry);

        SplitChoice best;
        const int n = stats.n;
        sorted_.assign(rows.begin(), rows.end());
        for (int fi = 0; fi < mtry; ++fi) {
            const int f = features_[static_cast<std::size_t>(fi)];
            std::sort(sorted_.begin(), sorted_.end(), [&](int a, int b) {
                return x_.at(a, f) < x_.at(b, f);
            });
            double left_sum = 0.0, left_sumsq = 0.0;
            double total_sum = stats.mean * n;
            double total_sumsq = (stats.impurity + stats.mean * stats.mean) * n;
            for (int i = 0; i < n - 1; ++i) {
                const double yi = y_[static_cast<std::size_t>(sorted_[i])];
                left_sum += yi;
                left_sumsq += yi * yi;
                const double v = x_.at(sorted_[i], f);
                const double vnext = x_.at(sorted_[i + 1], f);
                if (!(v < vnext)) continue;
                const int nl = i + 1, nr = n - nl;
                if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf)
                    continue;
                const double lmean = left_sum / nl;
                const double rsum = total_sum - left_sum;
                const double rmean = rsum / nr;
                const double limp =
                    std::max(0.0, left_sumsq / nl - lmean * lmean);
                const double rimp = std::max(
                    0.0, (total_sumsq - left_sumsq) / nr - rmean * rmean);
                const double gain =
                    stats.impurity -
                    (nl * limp + nr * rimp) / static_cast<double>(n);
                if (gain > best.gain + 1e-15 ||
                    (!best.found && gain > 1e-15)) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (v + vnext);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    const DataMatrix& x_;
    const std::vector<double>& y_;
    const TreeParams& params_;
    Rng rng_;
    int total_;
    Tree tree_;
    std::vector<int> features_;
    std::vector<int> sorted_;
};

} // namespace

double Tree::predict(const double* row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

Tree fit_tree(const DataMatrix& x, const std::vector<double>& y,
              const std::vector<int>& rows, const TreeParams& params,
              std::uint64_t seed) {
    if (rows.empty() || x.rows() == 0 || y.empty())
        throw config_error("fit_tree: empty input");
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw dimension_error("fit_tree: X and y row counts differ");
    TreeBuilder builder(x, y, params, seed, static_cast<int>(rows.size()));
    return builder.build(rows);
}

ForestModel fit_forest(const DataMatrix& x, const DataMatrix& y,
                       const ForestParams& params, std::uint64_t seed) {
    if (x.cols != kNumFeatures)
        throw dimension_error("fit_forest: X must have 14 feature columns");
    if (y.cols != kNumMitigations || y.rows() != x.rows())
        throw dimension_error("fit_forest: Y must be N x 5 matching X");
    if (params.num_trees < 1) throw config_error("fit_forest: num_trees must be >= 1");

    const int n = x.rows();
    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.num_features = x.cols;
    for (auto& f : model.forests)
        f.resize(static_cast<std::size_t>(params.num_trees));

    std::array<std::vector<double>, kNumMitigations> targets;
    for (int t = 0; t < kNumMitigations; ++t) {
        targets[t].resize(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) targets[t][static_cast<std::size_t>(r)] = y.at(r, t);
    }

    const std::size_t total =
        static_cast<std::size_t>(kNumMitigations) * params.num_trees;
    const unsigned threads =
        params.threads == 0 ? default_threads() : params.threads;
    parallel_for(total, threads, [&](std::size_t idx) {
        const int t = static_cast<int>(idx) / params.num_trees;
        const int m = static_cast<int>(idx) % params.num_trees;
        const std::uint64_t tree_seed =
            mix_seed(seed, 0x1000 + static_cast<std::uint64_t>(idx));
        std::vector<int> rows(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            Rng boot(mix_seed(tree_seed, 0x01));
            for (int i = 0; i < n; ++i)
                rows[static_cast<std::size_t>(i)] =
                    static_cast<int>(boot.bounded(static_cast<std::uint64_t>(n)));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        model.forests[t][static_cast<std::size_t>(m)] =
            fit_tree(x, targets[t], rows, params.tree, mix_seed(tree_seed, 0x02));
    });
    return model;
}

std::array<double, kNumMitigations> predict(
    const ForestModel& model, const std::array<double, kNumFeatures>& x) {
    if (!model.trained()) throw std::logic_error("predict: model is not trained");
    std::array<double, kNumMitigations> out{};
    for (int t = 0; t < kNumMitigations; ++t) {
        double acc = 0.0;
        for (const Tree& tree : model.forests[t]) acc += tree.predict(x.data());
        out[t] = std::clamp(acc / static_cast<double>(model.forests[t].size()),
                            kLogBerMin, kLogBerMax);
    }
    return out;
}

ImportanceReport mdi_importance(const ForestModel& model) {
    ImportanceReport rep;
    for (int t = 0; t < kNumMitigations; ++t) {
        auto& imp = rep.per_target[t];
        for (const Tree& tree : model.forests[t])
            for (int f = 0; f < kNumFeatures; ++f)
                imp[f] += tree.raw_importance[static_cast<std::size_t>(f)];
        const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (total > 0.0)
            for (double& v : imp) v /= total;
    }
    for (int f = 0; f < kNumFeatures; ++f) {
        double acc = 0.0;
        for (int t = 0; t < kNumMitigations; ++t) acc += rep.per_target[t][f];
        rep.combined[f] = acc / kNumMitigations;
    }
    const double total =
        std::accumulate(rep.combined.begin(), rep.combined.end(), 0.0);
    if (total > 0.0)
        for (double& v : rep.combined) v /= total;
    return rep;
}

std::array<double, kNumMitigations> rmse(const DataMatrix& pred,
                                         const DataMatrix& truth) {
    if (pred.cols != truth.cols || pred.rows() != truth.rows() || pred.rows() == 0)
        throw dimension_error("rmse: shape mismatch");
    std::array<double, kNumMitigations> out{};
    for (int t = 0; t < pred.cols; ++t) {
        double acc = 0.0;
        for (int r = 0; r < pred.rows(); ++r) {
            const double d = pred.at(r, t) - truth.at(r, t);
            acc += d * d;
        }
        out[static_cast<std::size_t>(t)] = std::sqrt(acc / pred.rows());
    }
    return out;
}

DataMatrix feature_matrix(const std::vector<TrialRecord>& records,
                          const std::vector<int>& indices,
                          const FeatureStats& stats) {
    DataMatrix m;
    m.cols = kNumFeatures;
    m.data.reserve(indices.size() * kNumFeatures);
    for (int idx : indices) {
        const auto row =
            normalize_features(records[static_cast<std::size_t>(idx)].meta, stats);
        m.data.insert(m.data.end(), row.begin(), row.end());
    }
    return m;
}

DataMatrix target_matrix(const std::vector<TrialRecord>& records,
                         const std::vector<int>& indices) {
    DataMatrix m;
    m.cols = kNumMitigations;
    m.data.reserve(indices.size() * kNumMitigations);
    for (int idx : indices) {
        const auto row = target_vector(records[static_cast<std::size_t>(idx)].bers);
        m.data.insert(m.data.end(), row.begin(), row.end());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

using json = nlohmann::json;

json tree_to_json(const Tree& tree) {
    json j;
    auto& f = j["f"] = json::array();
    auto& thr = j["t"] = json::array();
    auto& l = j["l"] = json::array();
    auto& r = j["r"] = json::array();
    auto& v = j["v"] = json::array();
    auto& n = j["n"] = json::array();
    auto& imp = j["i"] = json::array();
    for (const TreeNode& node : tree.nodes) {
        f.push_back(node.feature);
        thr.push_back(node.threshold);
        l.push_back(node.left);
        r.push_back(node.right);
        v.push_back(node.value);
        n.push_back(node.n_samples);
        imp.push_back(node.impurity);
    }
    j["importance"] = tree.raw_importance;
    return j;
}

Tree tree_from_json(const json& j) {
    Tree tree;
    const json& f = j.at("f");
    const json& thr = j.at("t");
    const json& l = j.at("l");
    const json& r = j.at("r");
    const json& v = j.at("v");
    const json& n = j.at("n");
    const json& imp = j.at("i");
    const std::size_t count = f.size();
    if (thr.size() != count || l.size() != count || r.size() != count ||
        v.size() != count || n.size() != count || imp.size() != count)
        throw schema_error("load_model: ragged tree arrays");
    tree.nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        TreeNode& node = tree.nodes[i];
        node.feature = f[i].get<int>();
        node.threshold = thr[i].get<double>();
        node.left = l[i].get<int>();
        node.right = r[i].get<int>();
        node.value = v[i].get<double>();
        node.n_samples = n[i].get<int>();
        node.impurity = imp[i].get<double>();
    }
    tree.raw_importance = j.at("importance").get<std::vector<double>>();
    return tree;
}

} // namespace

void save_model(const ModelFile& mf, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["seed"] = mf.model.seed;
    j["num_features"] = mf.model.num_features;
    j["params"] = {{"num_trees", mf.model.params.num_trees},
                   {"bootstrap", mf.model.params.bootstrap},
                   {"max_features", mf.model.params.tree.max_features},
                   {"min_samples_leaf", mf.model.params.tree.min_samples_leaf},
                   {"max_depth", mf.model.params.tree.max_depth}};
    j["feature_names"] = feature_names();
    j["stats"] = {{"modes", mf.stats.modes},
                  {"mins", mf.stats.mins},
                  {"maxs", mf.stats.maxs}};
    j["train_indices"] = mf.train_indices;
    j["test_indices"] = mf.test_indices;
    json forests = json::array();
    for (int t = 0; t < kNumMitigations; ++t) {
        json trees = json::array();
        for (const Tree& tree : mf.model.forests[t]) trees.push_back(tree_to_json(tree));
        forests.push_back(std::move(trees));
    }
    j["forests"] = std::move(forests);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("save_model: cannot open " + tmp);
        out << j.dump();
        if (!out) throw std::runtime_error("save_model: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("save_model: cannot move " + tmp + " to " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw schema_error(std::string("load_model: ") + e.what());
    }
    if (j.value("schema_version", 0) != 1)
        throw schema_error("load_model: unsupported schema version");

    ModelFile mf;
    mf.model.seed = j.at("seed").get<std::uint64_t>();
    mf.model.num_features = j.at("num_features").get<int>();
    const json& p = j.at("params");
    mf.model.params.num_trees = p.at("num_trees").get<int>();
    mf.model.params.bootstrap = p.at("bootstrap").get<bool>();
    mf.model.params.tree.max_features = p.at("max_features").get<int>();
    mf.model.params.tree.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    mf.model.params.tree.max_depth = p.at("max_depth").get<int>();
    const json& s = j.at("stats");
    mf.stats.modes = s.at("modes").get<std::array<double, 6>>();
    mf.stats.mins = s.at("mins").get<std::array<double, kNumFeatures>>();
    mf.stats.maxs = s.at("maxs").get<std::array<double, kNumFeatures>>();
    mf.train_indices = j.at("train_indices").get<std::vector<int>>();
    mf.test_indices = j.at("test_indices").get<std::vector<int>>();
    const json& forests = j.at("forests");
    if (forests.size() != kNumMitigations)
        throw schema_error("load_model: expected 5 target forests");
    for (int t = 0; t < kNumMitigations; ++t) {
        for (const json& tj : forests[static_cast<std::size_t>(t)])
            mf.model.forests[t].push_back(tree_from_json(tj));
    }
    return mf;
}

} // namespace bp
