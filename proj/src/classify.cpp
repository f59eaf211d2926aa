#include <cema/classify.hpp>
#include <cema/contingency.hpp>
#include <cema/error.hpp>
#include <cema/random.hpp>

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cema {

namespace {

std::uint64_t pair_key(LemmaId a, LemmaId b)
{
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseRows design_matrix(const std::vector<FeatureVector>& xs, std::size_t features, const Eigen::VectorXd& scale)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (const auto& [c, v] : xs[i].entries)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(c), v * scale(c));
    SparseRows x(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(features));
    x.setFromTriplets(trip.begin(), trip.end());
    return x;
}

// Row-wise softmax in place.
void softmax_rows(Eigen::MatrixXd& s)
{
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double m = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - m).exp();
        s.row(i) /= s.row(i).sum();
    }
}

struct Objective {
    const SparseRows& x;
    const std::vector<int>& y;
    double lambda;

    double loss(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Eigen::MatrixXd* probs = nullptr) const
    {
        Eigen::MatrixXd s = x * w.transpose();
        s.rowwise() += b.transpose();
        double nll = 0.0;
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            const double m = s.row(i).maxCoeff();
            const double lse = m + std::log((s.row(i).array() - m).exp().sum());
            nll += lse - s(i, y[static_cast<std::size_t>(i)]);
        }
        if (probs) {
            softmax_rows(s);
            *probs = std::move(s);
        }
        return nll / static_cast<double>(x.rows()) + 0.5 * lambda * w.squaredNorm();
    }
};

std::vector<FeatureVector> featurize_all(const Index& index, std::span<const CharterIdx> charters,
                                         const FeatureSpace& space, const FeatureBinding& binding)
{
    std::vector<FeatureVector> out(charters.size());
    const auto n = static_cast<std::int64_t>(charters.size());
#pragma omp parallel for schedule(dynamic, 32)
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = featurize(index, charters[static_cast<std::size_t>(i)], space, binding);
    return out;
}

} // namespace

std::vector<double> FeatureVector::dense(std::size_t size) const
{
    std::vector<double> d(size, 0.0);
    for (const auto& [c, v] : entries)
        d[c] = v;
    return d;
}

FeatureSpace::FeatureSpace(std::vector<std::string> lemmas, std::vector<std::pair<std::string, std::string>> bilemmas)
    : lemmas_(std::move(lemmas)), bilemmas_(std::move(bilemmas))
{
}

FeatureSpace FeatureSpace::fit(const Index& index, std::span<const CharterIdx> training, std::size_t top_lemmas,
                               std::size_t top_bilemmas)
{
    std::unordered_map<LemmaId, std::uint64_t> lf;
    std::unordered_map<std::uint64_t, std::uint64_t> bf;
    for (auto c : training) {
        auto toks = index.lemmas_of(c);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            ++lf[toks[i]];
            if (i > 0 && top_bilemmas > 0)
                ++bf[pair_key(toks[i - 1], toks[i])];
        }
    }
    const auto& names = index.lemmas();

    std::vector<std::pair<std::uint64_t, std::string>> lcands;
    for (const auto& [l, f] : lf)
        lcands.emplace_back(f, names[l]);
    std::sort(lcands.begin(), lcands.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (lcands.size() > top_lemmas)
        lcands.resize(top_lemmas);

    std::vector<std::pair<std::uint64_t, std::pair<std::string, std::string>>> bcands;
    for (const auto& [k, f] : bf)
        bcands.push_back({f, {names[static_cast<LemmaId>(k >> 32)], names[static_cast<LemmaId>(k & 0xFFFFFFFFu)]}});
    std::sort(bcands.begin(), bcands.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (bcands.size() > top_bilemmas)
        bcands.resize(top_bilemmas);

    std::vector<std::string> lemmas;
    for (auto& [_, s] : lcands)
        lemmas.push_back(std::move(s));
    std::vector<std::pair<std::string, std::string>> bilemmas;
    for (auto& [_, p] : bcands)
        bilemmas.push_back(std::move(p));
    return FeatureSpace(std::move(lemmas), std::move(bilemmas));
}

FeatureBinding FeatureSpace::bind(const Index& index) const
{
    FeatureBinding b;
    b.lemma_col.assign(index.lemmas().size(), -1);
    for (std::size_t i = 0; i < lemmas_.size(); ++i)
        if (auto id = index.lemmas().find(lemmas_[i]))
            b.lemma_col[*id] = static_cast<std::int32_t>(i);
    for (std::size_t i = 0; i < bilemmas_.size(); ++i) {
        auto a = index.lemmas().find(bilemmas_[i].first);
        auto c = index.lemmas().find(bilemmas_[i].second);
        if (a && c)
            b.bilemma_col.emplace(pair_key(*a, *c), static_cast<std::uint32_t>(lemmas_.size() + i));
    }
    return b;
}

FeatureVector featurize(const Index& index, CharterIdx charter, const FeatureSpace& space,
                        const FeatureBinding& binding)
{
    auto toks = index.lemmas_of(charter);
    if (toks.empty())
        throw DataError("cannot featurize empty charter " + index.charter(charter).id);
    std::map<std::uint32_t, std::uint64_t> counts;
    bool any_lemma = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (auto c = binding.lemma_col[toks[i]]; c >= 0) {
            ++counts[static_cast<std::uint32_t>(c)];
            any_lemma = true;
        }
        if (i > 0 && !binding.bilemma_col.empty())
            if (auto it = binding.bilemma_col.find(pair_key(toks[i - 1], toks[i])); it != binding.bilemma_col.end())
                ++counts[it->second];
    }
    (void)space;
    FeatureVector fv;
    const double n = static_cast<double>(toks.size());
    for (const auto& [c, k] : counts)
        fv.entries.emplace_back(c, static_cast<double>(k) / n);
    fv.empty_in_space = !any_lemma;
    return fv;
}

FeatureVector featurize(const Index& index, CharterIdx charter, const FeatureSpace& space)
{
    return featurize(index, charter, space, space.bind(index));
}

std::string to_string(ModelKind k)
{
    return k == ModelKind::logistic ? "logistic" : "bayes";
}

ModelKind parse_model_kind(std::string_view s)
{
    if (s == "logistic" || s == "linear_logistic")
        return ModelKind::logistic;
    if (s == "bayes" || s == "multinomial_bayes")
        return ModelKind::multinomial_bayes;
    throw UsageError("unknown model kind: " + std::string(s));
}

std::vector<LabeledDoc> labeled_charters(const Index& index, const std::string& field)
{
    std::vector<LabeledDoc> out;
    for (CharterIdx c = 0; c < index.charter_count(); ++c)
        if (auto v = charter_field(index.charter(c), field))
            out.push_back({c, std::string(*v)});
    return out;
}

std::vector<CharterIdx> unlabeled_charters(const Index& index, const std::string& field)
{
    std::vector<CharterIdx> out;
    for (CharterIdx c = 0; c < index.charter_count(); ++c)
        if (!charter_field(index.charter(c), field))
            out.push_back(c);
    return out;
}

std::vector<double> Model::predict_proba(const FeatureVector& x) const
{
    Eigen::VectorXd s = bias;
    for (const auto& [c, v] : x.entries)
        s += weights.col(c) * (v * scale(c));
    const double m = s.maxCoeff();
    Eigen::VectorXd e = (s.array() - m).exp();
    e /= e.sum();
    return std::vector<double>(e.data(), e.data() + e.size());
}

std::size_t Model::predict(const FeatureVector& x) const
{
    const auto p = predict_proba(x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::ptrdiff_t Model::label_index(const std::string& label) const
{
    auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : it - labels.begin();
}

nlohmann::json Model::to_json() const
{
    nlohmann::json j;
    j["format"] = "cema-model";
    j["version"] = model_format_version;
    j["kind"] = to_string(kind);
    j["labels"] = labels;
    j["features"]["lemmas"] = space.lemmas();
    auto bl = nlohmann::json::array();
    for (const auto& [a, b] : space.bilemmas())
        bl.push_back({a, b});
    j["features"]["bilemmas"] = bl;
    auto w = nlohmann::json::array();
    for (Eigen::Index c = 0; c < weights.rows(); ++c)
        w.push_back(std::vector<double>(weights.row(c).begin(), weights.row(c).end()));
    j["parameters"]["weights"] = w;
    j["parameters"]["bias"] = std::vector<double>(bias.data(), bias.data() + bias.size());
    j["parameters"]["scale"] = std::vector<double>(scale.data(), scale.data() + scale.size());
    j["hyperparameters"] = {{"top_lemmas", params.top_lemmas}, {"top_bilemmas", params.top_bilemmas},
                            {"lambda", params.lambda},         {"epochs", params.epochs},
                            {"rate", params.rate},             {"seed", seed}};
    return j;
}

Model Model::from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format") != "cema-model")
            throw DataError("not a model document");
        if (j.at("version").get<int>() != model_format_version)
            throw DataError("unsupported model version");
        Model m;
        m.kind = parse_model_kind(j.at("kind").get<std::string>());
        m.labels = j.at("labels").get<std::vector<std::string>>();
        auto lemmas = j.at("features").at("lemmas").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> bilemmas;
        for (const auto& p : j.at("features").at("bilemmas"))
            bilemmas.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        m.space = FeatureSpace(std::move(lemmas), std::move(bilemmas));
        const auto& params = j.at("parameters");
        const auto f = static_cast<Eigen::Index>(m.space.size());
        const auto c = static_cast<Eigen::Index>(m.labels.size());
        m.weights.resize(c, f);
        const auto& w = params.at("weights");
        if (static_cast<Eigen::Index>(w.size()) != c)
            throw DataError("model weights do not match labels");
        for (Eigen::Index r = 0; r < c; ++r) {
            auto row = w.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != f)
                throw DataError("model weights do not match features");
            for (Eigen::Index k = 0; k < f; ++k)
                m.weights(r, k) = row[static_cast<std::size_t>(k)];
        }
        auto b = params.at("bias").get<std::vector<double>>();
        auto s = params.at("scale").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(b.size()) != c || static_cast<Eigen::Index>(s.size()) != f)
            throw DataError("model parameter sizes inconsistent");
        m.bias = Eigen::Map<Eigen::VectorXd>(b.data(), c);
        m.scale = Eigen::Map<Eigen::VectorXd>(s.data(), f);
        if (auto h = j.find("hyperparameters"); h != j.end()) {
            m.params.kind = m.kind;
            m.params.top_lemmas = h->value("top_lemmas", m.params.top_lemmas);
            m.params.top_bilemmas = h->value("top_bilemmas", m.params.top_bilemmas);
            m.params.lambda = h->value("lambda", m.params.lambda);
            m.params.epochs = h->value("epochs", m.params.epochs);
            m.params.rate = h->value("rate", m.params.rate);
            m.seed = h->value("seed", std::uint64_t{0});
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
}

Model train(const Index& index, std::span<const LabeledDoc> docs, const TrainParams& params, std::uint64_t seed)
{
    std::set<std::string> label_set;
    for (const auto& d : docs)
        label_set.insert(d.label);
    if (label_set.size() < 2)
        throw DataError("training needs at least two classes");

    Model m;
    m.kind = params.kind;
    m.params = params;
    m.seed = seed;
    m.labels.assign(label_set.begin(), label_set.end());

    std::vector<CharterIdx> charters;
    std::vector<int> y;
    for (const auto& d : docs) {
        charters.push_back(d.charter);
        y.push_back(static_cast<int>(m.label_index(d.label)));
    }
    m.space = FeatureSpace::fit(index, charters, params.top_lemmas, params.top_bilemmas);
    const auto binding = m.space.bind(index);
    const auto xs = featurize_all(index, charters, m.space, binding);

    const auto nc = static_cast<Eigen::Index>(m.labels.size());
    const auto nf = static_cast<Eigen::Index>(m.space.size());
    const auto n = static_cast<double>(docs.size());

    if (params.kind == ModelKind::multinomial_bayes) {
        // Relative frequencies rescaled to the mean training length act as
        // pseudo-counts, so predictions stay invariant to a charter's length.
        double mean_len = 0.0;
        for (auto c : charters)
            mean_len += static_cast<double>(index.token_count(c));
        mean_len /= n;

        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(nc, nf);
        Eigen::VectorXd docs_per_class = Eigen::VectorXd::Zero(nc);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            docs_per_class(y[i]) += 1.0;
            for (const auto& [c, v] : xs[i].entries)
                counts(y[i], c) += v * mean_len;
        }
        m.weights.resize(nc, nf);
        m.bias.resize(nc);
        for (Eigen::Index c = 0; c < nc; ++c) {
            const double denom = static_cast<double>(nf) + counts.row(c).sum();
            for (Eigen::Index f = 0; f < nf; ++f)
                m.weights(c, f) = std::log((1.0 + counts(c, f)) / denom);
            m.bias(c) = std::log(docs_per_class(c) / n);
        }
        m.scale = Eigen::VectorXd::Constant(nf, mean_len);
        return m;
    }

    // Logistic: features max-abs scaled to [0, 1] on the training set.
    m.scale = Eigen::VectorXd::Zero(nf);
    for (const auto& x : xs)
        for (const auto& [c, v] : x.entries)
            m.scale(c) = std::max(m.scale(c), v);
    for (Eigen::Index f = 0; f < nf; ++f)
        m.scale(f) = m.scale(f) > 0.0 ? 1.0 / m.scale(f) : 0.0;

    const SparseRows x = design_matrix(xs, m.space.size(), m.scale);
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), nc);
    for (std::size_t i = 0; i < y.size(); ++i)
        onehot(static_cast<Eigen::Index>(i), y[i]) = 1.0;

    Objective obj{x, y, params.lambda};
    m.weights = Eigen::MatrixXd::Zero(nc, nf);
    m.bias = Eigen::VectorXd::Zero(nc);
    Eigen::MatrixXd probs;
    double loss = obj.loss(m.weights, m.bias, &probs);
    double step = params.rate;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        m.loss_history.push_back(loss);
        const Eigen::MatrixXd resid = (probs - onehot) / n;
        const Eigen::MatrixXd grad_w = Eigen::MatrixXd(x.transpose() * resid).transpose() + params.lambda * m.weights;
        const Eigen::VectorXd grad_b = resid.colwise().sum().transpose();

        bool improved = false;
        step = std::min(params.rate, step * 2.0);
        for (int tries = 0; tries < 60; ++tries) {
            Eigen::MatrixXd w = m.weights - step * grad_w;
            Eigen::VectorXd b = m.bias - step * grad_b;
            Eigen::MatrixXd p;
            const double l = obj.loss(w, b, &p);
            if (l <= loss) {
                improved = l < loss;
                m.weights = std::move(w);
                m.bias = std::move(b);
                probs = std::move(p);
                loss = l;
                break;
            }
            step *= 0.5;
        }
        if (!improved)
            break;
    }
    m.loss_history.push_back(loss);
    return m;
}

// ---------------------------------------------------------------------------

nlohmann::json EvalReport::to_json() const
{
    nlohmann::json j;
    j["labels"] = labels;
    j["confusion"] = confusion;
    auto cls = nlohmann::json::array();
    for (const auto& c : classes)
        cls.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support}});
    j["classes"] = cls;
    j["macro_f1"] = macro_f1;
    j["accuracy"] = accuracy;
    j["folds"] = folds;
    j["seed"] = seed;
    j["warnings"] = warnings;
    return j;
}

std::vector<int> stratified_folds(std::span<const LabeledDoc> docs, int folds, std::uint64_t seed,
                                  std::vector<std::string>* warnings)
{
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < docs.size(); ++i)
        by_label[docs[i].label].push_back(i);
    std::vector<int> fold(docs.size(), 0);
    std::size_t offset = 0;
    std::uint64_t stream = 0;
    for (auto& [label, members] : by_label) {
        if (members.size() < static_cast<std::size_t>(folds) && warnings)
            warnings->push_back("class '" + label + "' has " + std::to_string(members.size()) + " examples for " +
                                std::to_string(folds) + " folds; some folds lack it");
        Rng rng(derive_seed(seed, stream++));
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t k = 0; k < members.size(); ++k)
            fold[members[k]] = static_cast<int>((offset + k) % static_cast<std::size_t>(folds));
        offset += members.size();
    }
    return fold;
}

EvalReport evaluate(std::span<const LabeledDoc> docs, const FoldPredictor& predictor, int folds, std::uint64_t seed)
{
    if (folds < 2)
        throw UsageError("cross-validation needs at least 2 folds");
    if (docs.size() < static_cast<std::size_t>(folds))
        throw DataError("fewer labelled documents than folds");

    EvalReport rep;
    rep.folds = folds;
    rep.seed = seed;
    const auto fold = stratified_folds(docs, folds, seed, &rep.warnings);

    std::vector<std::string> predicted(docs.size());
    std::vector<std::string> errors(static_cast<std::size_t>(folds));
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < folds; ++f) {
        std::vector<LabeledDoc> train_set;
        std::vector<LabeledDoc> test_set;
        std::vector<std::size_t> test_pos;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (fold[i] == f) {
                test_set.push_back(docs[i]);
                test_pos.push_back(i);
            } else {
                train_set.push_back(docs[i]);
            }
        }
        if (test_set.empty())
            continue;
        try {
            auto out = predictor(train_set, test_set);
            for (std::size_t k = 0; k < test_pos.size() && k < out.size(); ++k)
                predicted[test_pos[k]] = std::move(out[k]);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(f)] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty())
            throw DataError("cross-validation fold failed: " + e);

    std::set<std::string> label_set;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        label_set.insert(docs[i].label);
        label_set.insert(predicted[i]);
    }
    rep.labels.assign(label_set.begin(), label_set.end());
    const auto nl = rep.labels.size();
    auto idx = [&](const std::string& l) {
        return static_cast<std::size_t>(std::lower_bound(rep.labels.begin(), rep.labels.end(), l) - rep.labels.begin());
    };
    rep.confusion.assign(nl, std::vector<std::uint64_t>(nl, 0));
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ++rep.confusion[idx(docs[i].label)][idx(predicted[i])];
        correct += docs[i].label == predicted[i] ? 1 : 0;
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(docs.size());

    double f1_sum = 0.0;
    std::size_t with_support = 0;
    for (std::size_t c = 0; c < nl; ++c) {
        ClassMetrics m;
        m.label = rep.labels[c];
        std::uint64_t tp = rep.confusion[c][c];
        std::uint64_t pred = 0;
        for (std::size_t r = 0; r < nl; ++r) {
            pred += rep.confusion[r][c];
            m.support += rep.confusion[c][r];
        }
        m.precision = pred ? static_cast<double>(tp) / static_cast<double>(pred) : 0.0;
        m.recall = m.support ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        if (m.support > 0) {
            f1_sum += m.f1;
            ++with_support;
        }
        rep.classes.push_back(std::move(m));
    }
    rep.macro_f1 = with_support ? f1_sum / static_cast<double>(with_support) : 0.0;
    return rep;
}

EvalReport evaluate_model(const Index& index, std::span<const LabeledDoc> docs, const TrainParams& params, int folds,
                          std::uint64_t seed)
{
    FoldPredictor predictor = [&](std::span<const LabeledDoc> train_set, std::span<const LabeledDoc> test_set) {
        const auto model = train(index, train_set, params, seed);
        const auto binding = model.space.bind(index);
        std::vector<std::string> out;
        out.reserve(test_set.size());
        for (const auto& d : test_set)
            out.push_back(model.labels[model.predict(featurize(index, d.charter, model.space, binding))]);
        return out;
    };
    return evaluate(docs, predictor, folds, seed);
}

std::vector<ScreenHit> screen(const Model& model, const Index& index, const std::string& target, double threshold,
                              const std::string& field)
{
    const auto t = model.label_index(target);
    if (t < 0)
        throw DataError("target class unknown to the model: " + target);
    const auto binding = model.space.bind(index);
    const auto pool = unlabeled_charters(index, field);

    std::vector<ScreenHit> hits;
    for (auto c : pool) {
        if (index.token_count(c) == 0)
            continue;
        const auto p = model.predict_proba(featurize(index, c, model.space, binding));
        const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        if (p[static_cast<std::size_t>(t)] >= threshold)
            hits.push_back({index.charter(c).id, p[static_cast<std::size_t>(t)], model.labels[best]});
    }
    std::sort(hits.begin(), hits.end(), [](const ScreenHit& a, const ScreenHit& b) {
        return a.p_target != b.p_target ? a.p_target > b.p_target : a.charter_id < b.charter_id;
    });
    return hits;
}

} // namespace cema
