#pragma once

#include <cema/index.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cema {

/// Sparse feature vector: (column, relative frequency), ascending column.
struct FeatureVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
    bool empty_in_space = false; // no in-space lemma at all

    std::vector<double> dense(std::size_t size) const;
};

/// Lemma-id lookup tables of a feature space for one particular index.
struct FeatureBinding {
    std::vector<std::int32_t> lemma_col;                  // per LemmaId, -1 when absent
    std::unordered_map<std::uint64_t, std::uint32_t> bilemma_col;
};

/// Top-M lemmas followed by top-M adjacent lemma pairs, named by string so a
/// trained model can be applied to another index.
class FeatureSpace {
public:
    FeatureSpace() = default;
    FeatureSpace(std::vector<std::string> lemmas, std::vector<std::pair<std::string, std::string>> bilemmas);

    /// Most frequent features over the training charters (ties by string).
    static FeatureSpace fit(const Index& index, std::span<const CharterIdx> training, std::size_t top_lemmas,
                            std::size_t top_bilemmas);

    std::size_t size() const noexcept { return lemmas_.size() + bilemmas_.size(); }
    std::size_t lemma_count() const noexcept { return lemmas_.size(); }
    const std::vector<std::string>& lemmas() const noexcept { return lemmas_; }
    const std::vector<std::pair<std::string, std::string>>& bilemmas() const noexcept { return bilemmas_; }

    FeatureBinding bind(const Index& index) const;

private:
    std::vector<std::string> lemmas_;
    std::vector<std::pair<std::string, std::string>> bilemmas_;
};

/// Feature counts divided by the charter's token count; out-of-space lemmas
/// are ignored. A charter without tokens is a DataError.
FeatureVector featurize(const Index& index, CharterIdx charter, const FeatureSpace& space,
                        const FeatureBinding& binding);
FeatureVector featurize(const Index& index, CharterIdx charter, const FeatureSpace& space);

enum class ModelKind { multinomial_bayes, logistic };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct TrainParams {
    ModelKind kind = ModelKind::logistic;
    std::size_t top_lemmas = 2000;
    std::size_t top_bilemmas = 2000;
    double lambda = 1e-4; // L2 strength (logistic)
    int epochs = 200;     // gradient steps (logistic)
    double rate = 1.0;    // initial step, halved while the loss would rise
};

struct LabeledDoc {
    CharterIdx charter = 0;
    std::string label;
};

/// Charters carrying `field`, labelled by its value.
std::vector<LabeledDoc> labeled_charters(const Index& index, const std::string& field = "doc_type");
/// Charters lacking `field`.
std::vector<CharterIdx> unlabeled_charters(const Index& index, const std::string& field = "doc_type");

/// Linear scorer: p = softmax(bias + weights * (x .* scale)). Both model
/// kinds reduce to this form.
class Model {
public:
    ModelKind kind = ModelKind::logistic;
    std::vector<std::string> labels;
    FeatureSpace space;
    Eigen::MatrixXd weights; // classes x features
    Eigen::VectorXd bias;    // classes
    Eigen::VectorXd scale;   // features
    TrainParams params;
    std::uint64_t seed = 0;
    std::vector<double> loss_history; // logistic: objective before each step, then final

    std::vector<double> predict_proba(const FeatureVector& x) const;
    std::size_t predict(const FeatureVector& x) const;
    std::ptrdiff_t label_index(const std::string& label) const;

    nlohmann::json to_json() const;
    /// Throws DataError on an unknown format or version.
    static Model from_json(const nlohmann::json& j);
};

inline constexpr int model_format_version = 1;

/// Needs at least two distinct labels. Fully deterministic; `seed` is
/// recorded only.
Model train(const Index& index, std::span<const LabeledDoc> docs, const TrainParams& params, std::uint64_t seed = 0);

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

struct EvalReport {
    std::vector<std::string> labels;                  // sorted union of true and predicted
    std::vector<std::vector<std::uint64_t>> confusion; // [true][predicted]
    std::vector<ClassMetrics> classes;
    double macro_f1 = 0.0; // over classes with support
    double accuracy = 0.0;
    int folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// Produces one predicted label per test document from a training fold.
using FoldPredictor =
    std::function<std::vector<std::string>(std::span<const LabeledDoc> train, std::span<const LabeledDoc> test)>;

/// Stratified k-fold cross-validation. Folds run in parallel.
EvalReport evaluate(std::span<const LabeledDoc> docs, const FoldPredictor& predictor, int folds, std::uint64_t seed);

/// Cross-validates `train` with the feature space fitted on each training fold.
EvalReport evaluate_model(const Index& index, std::span<const LabeledDoc> docs, const TrainParams& params,
                          int folds, std::uint64_t seed);

/// Fold number per document, as used by evaluate.
std::vector<int> stratified_folds(std::span<const LabeledDoc> docs, int folds, std::uint64_t seed,
                                  std::vector<std::string>* warnings = nullptr);

struct ScreenHit {
    std::string charter_id;
    double p_target = 0.0;
    std::string predicted;
};

/// Unlabelled charters (by `field`) with p(target) >= threshold, by
/// descending probability then id.
std::vector<ScreenHit> screen(const Model& model, const Index& index, const std::string& target, double threshold,
                              const std::string& field = "doc_type");

} // namespace cema
