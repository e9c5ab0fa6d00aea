#include "riskgraph/classify.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"
#include "riskgraph/labels.hpp"
#include "riskgraph/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace riskgraph::classify {

using nlohmann::json;

SmoResult smo_solve(const Eigen::MatrixXd& K, const std::vector<int>& y, double C, double tol) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n) throw ParameterError("smo_solve: kernel matrix must be square");
    if (static_cast<std::size_t>(n) != y.size())
        throw ParameterError("smo_solve: kernel/label size mismatch");
    if (n < 2) throw ParameterError("smo_solve needs at least 2 points");
    if (!(C > 0.0)) throw ParameterError("smo_solve: C must be positive");
    if (!(tol > 0.0)) throw ParameterError("smo_solve: tol must be positive");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == -1) neg = true;
        else throw ParameterError("smo_solve: labels must be +1/-1");
    }
    if (!pos || !neg) throw TrainingError("smo_solve: both classes must be present");

    constexpr double kTau = 1e-12;
    SmoResult res;
    res.alpha.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double>& a = res.alpha;
    // gradient of the dual objective; alpha = 0 start makes it -e
    std::vector<double> G(static_cast<std::size_t>(n), -1.0);

    const long max_iter = std::max<long>(10'000'000L, 100L * static_cast<long>(n));
    long it = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (; it < max_iter; ++it) {
        // maximal violating pair:
        //   i = argmax_{I_up} -y G,   j = argmin_{I_low} -y G
        int i = -1, j = -1;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const std::size_t ts = static_cast<std::size_t>(t);
            const double v = -y[ts] * G[ts];
            const bool in_up = (y[ts] == 1) ? (a[ts] < C) : (a[ts] > 0.0);
            const bool in_low = (y[ts] == 1) ? (a[ts] > 0.0) : (a[ts] < C);
            if (in_up && v > m) {
                m = v;
                i = static_cast<int>(t);
            }
            if (in_low && v < M) {
                M = v;
                j = static_cast<int>(t);
            }
        }
        gap = m - M;
        if (!(gap > tol)) break;

        const std::size_t si = static_cast<std::size_t>(i);
        const std::size_t sj = static_cast<std::size_t>(j);
        const double old_ai = a[si];
        const double old_aj = a[sj];
        if (y[si] != y[sj]) {
            // the curvature along the feasible direction is the squared
            // feature-space distance in both branches; only delta's sign
            // pattern differs with the labels
            double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[si] - G[sj]) / quad;
            const double diff = a[si] - a[sj];
            a[si] += delta;
            a[sj] += delta;
            if (diff > 0.0) {
                if (a[sj] < 0.0) {
                    a[sj] = 0.0;
                    a[si] = diff;
                }
            } else {
                if (a[si] < 0.0) {
                    a[si] = 0.0;
                    a[sj] = -diff;
                }
            }
            if (diff > 0.0) {
                if (a[si] > C) {
                    a[si] = C;
                    a[sj] = C - diff;
                }
            } else {
                if (a[sj] > C) {
                    a[sj] = C;
                    a[si] = C + diff;
                }
            }
        } else {
            double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[si] - G[sj]) / quad;
            const double sum = a[si] + a[sj];
            a[si] -= delta;
            a[sj] += delta;
            if (sum > C) {
                if (a[si] > C) {
                    a[si] = C;
                    a[sj] = sum - C;
                }
            } else {
                if (a[sj] < 0.0) {
                    a[sj] = 0.0;
                    a[si] = sum;
                }
            }
            if (sum > C) {
                if (a[sj] > C) {
                    a[sj] = C;
                    a[si] = sum - C;
                }
            } else {
                if (a[si] < 0.0) {
                    a[si] = 0.0;
                    a[sj] = sum;
                }
            }
        }
        const double dai = a[si] - old_ai;
        const double daj = a[sj] - old_aj;
        for (Eigen::Index t = 0; t < n; ++t) {
            const std::size_t ts = static_cast<std::size_t>(t);
            G[ts] += y[ts] * (y[si] * K(t, i) * dai + y[sj] * K(t, j) * daj);
        }
    }
    if (gap > tol)
        throw TrainingError("smo_solve did not reach tolerance " + io::format_double(tol) +
                            " within " + std::to_string(max_iter) + " iterations");
    res.iterations = it;
    res.kkt_gap = std::max(gap, 0.0);

    // bias: average -y_i G_i over free points, else the midpoint of the
    // bound-derived bracket
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    long n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        const double yG = y[ts] * G[ts];
        if (a[ts] >= C) {
            if (y[ts] == -1) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else if (a[ts] <= 0.0) {
            if (y[ts] == 1) ub = std::min(ub, yG);
            else lb = std::max(lb, yG);
        } else {
            ++n_free;
            sum_free += yG;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    res.bias = -rho;

    double obj = 0.0;
    for (Eigen::Index t = 0; t < n; ++t)
        obj += a[static_cast<std::size_t>(t)] * (G[static_cast<std::size_t>(t)] - 1.0);
    res.objective = obj / 2.0;
    return res;
}

namespace {

std::vector<int> distinct_sorted(const std::vector<int>& labels) {
    std::set<int> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

} // namespace

TrainedModel train_svm(const kernels::KernelMatrix& gram, const std::vector<int>& labels,
                       double C, double tol, bool check_psd) {
    const int n = gram.n();
    if (static_cast<std::size_t>(n) != labels.size())
        throw ParameterError("train_svm: gram/label size mismatch");
    if (!(C > 0.0)) throw ParameterError("train_svm: C must be positive");

    TrainedModel model;
    model.classes = distinct_sorted(labels);
    if (model.classes.size() < 2)
        throw TrainingError("train_svm: need at least 2 classes, got " +
                            std::to_string(model.classes.size()));
    if (check_psd) kernels::check_kernel_matrix(gram.values, /*strict=*/true);
    model.C = C;
    model.training_size = n;
    model.kernel_digest = gram.digest;

    for (std::size_t ca = 0; ca < model.classes.size(); ++ca) {
        for (std::size_t cb = ca + 1; cb < model.classes.size(); ++cb) {
            const int la = model.classes[ca];
            const int lb = model.classes[cb];
            std::vector<int> idx;
            std::vector<int> y;
            for (int i = 0; i < n; ++i) {
                if (labels[static_cast<std::size_t>(i)] == la) {
                    idx.push_back(i);
                    y.push_back(1);
                } else if (labels[static_cast<std::size_t>(i)] == lb) {
                    idx.push_back(i);
                    y.push_back(-1);
                }
            }
            const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
            Eigen::MatrixXd sub(m, m);
            for (Eigen::Index r = 0; r < m; ++r)
                for (Eigen::Index c = 0; c < m; ++c)
                    sub(r, c) = gram.values(idx[static_cast<std::size_t>(r)],
                                            idx[static_cast<std::size_t>(c)]);

            const SmoResult sol = smo_solve(sub, y, C, tol);

            BinaryModel bm;
            bm.positive_class = la;
            bm.negative_class = lb;
            bm.bias = sol.bias;
            bm.kkt_gap = sol.kkt_gap;
            double balance = 0.0;
            for (std::size_t s = 0; s < sol.alpha.size(); ++s) {
                if (sol.alpha[s] < -1e-12 || sol.alpha[s] > C + 1e-12)
                    throw TrainingError("train_svm: dual variable escaped its box");
                balance += sol.alpha[s] * y[s];
                if (sol.alpha[s] > 0.0) {
                    bm.support.push_back(idx[s]);
                    bm.alpha_y.push_back(sol.alpha[s] * y[s]);
                }
            }
            if (std::abs(balance) > 1e-6)
                throw TrainingError("train_svm: equality constraint violated by " +
                                    io::format_double(balance));
            if (bm.support.empty())
                throw TrainingError("train_svm: empty support set for pair " +
                                    std::to_string(la) + "/" + std::to_string(lb));
            model.pairs.push_back(std::move(bm));
        }
    }
    return model;
}

double decision_value(const BinaryModel& m, const std::vector<double>& kernel_row) {
    double d = m.bias;
    for (std::size_t s = 0; s < m.support.size(); ++s) {
        const std::size_t t = static_cast<std::size_t>(m.support[s]);
        if (t >= kernel_row.size())
            throw ParameterError("decision_value: kernel row shorter than the training set");
        d += m.alpha_y[s] * kernel_row[t];
    }
    return d;
}

int predict(const TrainedModel& model, const std::vector<double>& kernel_row) {
    if (kernel_row.size() != static_cast<std::size_t>(model.training_size))
        throw ParameterError("predict: kernel row has " + std::to_string(kernel_row.size()) +
                             " entries, training size is " +
                             std::to_string(model.training_size));
    std::vector<int> votes(model.classes.size(), 0);
    auto class_pos = [&](int label) {
        const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), label);
        if (it == model.classes.end() || *it != label)
            throw ValidationError("predict: model references unknown class " +
                                  std::to_string(label));
        return static_cast<std::size_t>(it - model.classes.begin());
    };
    for (const BinaryModel& bm : model.pairs) {
        const double d = decision_value(bm, kernel_row);
        ++votes[class_pos(d >= 0.0 ? bm.positive_class : bm.negative_class)];
    }
    // ascending class order, strict comparison: ties go to the smallest label
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = c;
    return model.classes[best];
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const auto& row : counts)
        for (long long v : row) t += v;
    return t;
}

double ConfusionMatrix::accuracy() const {
    const long long t = total();
    if (t == 0) return 0.0;
    long long diag = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) diag += counts[c][c];
    return static_cast<double>(diag) / static_cast<double>(t);
}

double ConfusionMatrix::recall(std::size_t target_index) const {
    long long row = 0;
    for (long long v : counts.at(target_index)) row += v;
    if (row == 0) return 0.0;
    return static_cast<double>(counts[target_index][target_index]) / static_cast<double>(row);
}

double ConfusionMatrix::precision(std::size_t output_index) const {
    long long col = 0;
    for (const auto& row : counts) col += row.at(output_index);
    if (col == 0) return 0.0;
    return static_cast<double>(counts[output_index][output_index]) / static_cast<double>(col);
}

std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int folds,
                                               std::uint64_t seed) {
    if (folds < 2) throw ParameterError("stratified_folds: folds must be >= 2");
    if (labels.empty()) throw EmptyInputError("stratified_folds: no labels");

    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    for (const auto& [cls, members] : by_class)
        if (members.size() < static_cast<std::size_t>(folds))
            throw ParameterError("stratified_folds: class " + std::to_string(cls) + " has " +
                                 std::to_string(members.size()) + " members, fewer than " +
                                 std::to_string(folds) + " folds");

    Rng rng(seed);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
    std::size_t deal = 0; // continues across classes so overall sizes stay level
    for (auto& [cls, members] : by_class) {
        (void)cls;
        shuffle(rng, members);
        for (int idx : members) out[deal++ % static_cast<std::size_t>(folds)].push_back(idx);
    }
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
}

CvResult cross_validate(
    const std::vector<int>& labels, int folds, std::uint64_t seed,
    const std::function<std::vector<int>(const std::vector<int>&, const std::vector<int>&)>&
        run_fold) {
    const std::vector<std::vector<int>> parts = stratified_folds(labels, folds, seed);
    const std::vector<int> classes = distinct_sorted(labels);
    auto class_pos = [&](int label) {
        const auto it = std::lower_bound(classes.begin(), classes.end(), label);
        if (it == classes.end() || *it != label)
            throw ValidationError("cross_validate: prediction " + std::to_string(label) +
                                  " is not a training class");
        return static_cast<std::size_t>(it - classes.begin());
    };

    CvResult cv;
    cv.confusion.classes = classes;
    cv.confusion.counts.assign(classes.size(), std::vector<long long>(classes.size(), 0));
    for (std::size_t f = 0; f < parts.size(); ++f) {
        const std::vector<int>& test = parts[f];
        std::vector<int> train;
        train.reserve(labels.size() - test.size());
        for (std::size_t g = 0; g < parts.size(); ++g)
            if (g != f) train.insert(train.end(), parts[g].begin(), parts[g].end());
        std::sort(train.begin(), train.end());

        const std::vector<int> preds = run_fold(train, test);
        if (preds.size() != test.size())
            throw Error("cross_validate: fold predictor returned " +
                        std::to_string(preds.size()) + " labels for " +
                        std::to_string(test.size()) + " samples");
        long long correct = 0;
        for (std::size_t t = 0; t < test.size(); ++t) {
            const int target = labels[static_cast<std::size_t>(test[t])];
            ++cv.confusion.counts[class_pos(target)][class_pos(preds[t])];
            if (preds[t] == target) ++correct;
        }
        cv.fold_accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(test.size()));
    }
    cv.mean_accuracy = std::accumulate(cv.fold_accuracies.begin(), cv.fold_accuracies.end(), 0.0) /
                       static_cast<double>(cv.fold_accuracies.size());
    return cv;
}

CvResult cross_validate_gram(const kernels::KernelMatrix& gram, const std::vector<int>& labels,
                             double C, int folds, std::uint64_t seed) {
    if (static_cast<std::size_t>(gram.n()) != labels.size())
        throw ParameterError("cross_validate_gram: gram/label size mismatch");
    // one validation of the full matrix; every fold slice inherits PSD-ness
    kernels::check_kernel_matrix(gram.values, /*strict=*/true);

    auto run_fold = [&](const std::vector<int>& train, const std::vector<int>& test) {
        const Eigen::Index m = static_cast<Eigen::Index>(train.size());
        kernels::KernelMatrix sub;
        sub.config = gram.config;
        sub.digest = gram.digest;
        sub.values.resize(m, m);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c)
                sub.values(r, c) = gram.values(train[static_cast<std::size_t>(r)],
                                               train[static_cast<std::size_t>(c)]);
        std::vector<int> train_labels;
        train_labels.reserve(train.size());
        for (int i : train) train_labels.push_back(labels[static_cast<std::size_t>(i)]);

        const TrainedModel model = train_svm(sub, train_labels, C, 1e-3, /*check_psd=*/false);
        std::vector<int> preds;
        preds.reserve(test.size());
        std::vector<double> row(train.size());
        for (int t : test) {
            for (std::size_t c = 0; c < train.size(); ++c)
                row[c] = gram.values(t, train[c]);
            preds.push_back(predict(model, row));
        }
        return preds;
    };
    return cross_validate(labels, folds, seed, run_fold);
}

CvResult cross_validate_features(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                 double C, int folds, std::uint64_t seed) {
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw ParameterError("cross_validate_features: feature/label size mismatch");
    const Eigen::MatrixXd normalized = labels::normalize_features(features).values;
    std::vector<std::string> refs(labels.size());
    for (std::size_t i = 0; i < refs.size(); ++i) refs[i] = std::to_string(i);
    const kernels::KernelMatrix gram = kernels::linear_gram(normalized, std::move(refs));
    return cross_validate_gram(gram, labels, C, folds, seed);
}

std::string write_model_json(const TrainedModel& model, const std::string& digest) {
    json pairs = json::array();
    for (const BinaryModel& bm : model.pairs) {
        pairs.push_back({{"positive_class", bm.positive_class},
                         {"negative_class", bm.negative_class},
                         {"support", bm.support},
                         {"alpha_y", bm.alpha_y},
                         {"bias", bm.bias},
                         {"kkt_gap", bm.kkt_gap}});
    }
    json j{{"digest", digest},
           {"classes", model.classes},
           {"C", model.C},
           {"training_size", model.training_size},
           {"kernel_digest", model.kernel_digest},
           {"pairs", std::move(pairs)}};
    return j.dump(2) + "\n";
}

TrainedModel read_model_json(const std::string& text) {
    TrainedModel model;
    try {
        const json j = json::parse(text);
        model.classes = j.at("classes").get<std::vector<int>>();
        model.C = j.at("C").get<double>();
        model.training_size = j.at("training_size").get<int>();
        model.kernel_digest = j.at("kernel_digest").get<std::string>();
        for (const json& p : j.at("pairs")) {
            BinaryModel bm;
            bm.positive_class = p.at("positive_class").get<int>();
            bm.negative_class = p.at("negative_class").get<int>();
            bm.support = p.at("support").get<std::vector<int>>();
            bm.alpha_y = p.at("alpha_y").get<std::vector<double>>();
            bm.bias = p.at("bias").get<double>();
            bm.kkt_gap = p.at("kkt_gap").get<double>();
            model.pairs.push_back(std::move(bm));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad model JSON: ") + e.what());
    }
    if (model.classes.size() < 2) throw ValidationError("model JSON: fewer than 2 classes");
    const std::size_t expect = model.classes.size() * (model.classes.size() - 1) / 2;
    if (model.pairs.size() != expect)
        throw ValidationError("model JSON: expected " + std::to_string(expect) +
                              " class pairs, found " + std::to_string(model.pairs.size()));
    for (const BinaryModel& bm : model.pairs) {
        if (bm.support.size() != bm.alpha_y.size())
            throw ValidationError("model JSON: support/alpha_y length mismatch");
        if (bm.support.empty()) throw ValidationError("model JSON: empty support set");
        for (int s : bm.support)
            if (s < 0 || s >= model.training_size)
                throw ValidationError("model JSON: support index out of range");
    }
    return model;
}

std::string write_report_json(const CvResult& cv, const std::string& digest) {
    const std::size_t k = cv.confusion.classes.size();
    std::vector<double> precision(k), recall(k);
    for (std::size_t c = 0; c < k; ++c) {
        precision[c] = cv.confusion.precision(c);
        recall[c] = cv.confusion.recall(c);
    }
    json j{{"digest", digest},
           {"classes", cv.confusion.classes},
           {"confusion", cv.confusion.counts},
           {"precision", precision},
           {"recall", recall},
           {"accuracy", cv.confusion.accuracy()},
           {"fold_accuracies", cv.fold_accuracies},
           {"mean_accuracy", cv.mean_accuracy}};
    return j.dump(2) + "\n";
}

std::string confusion_csv(const ConfusionMatrix& m) {
    std::string out = "target,output,count\n";
    for (std::size_t r = 0; r < m.classes.size(); ++r)
        for (std::size_t c = 0; c < m.classes.size(); ++c)
            out += std::to_string(m.classes[r]) + ',' + std::to_string(m.classes[c]) + ',' +
                   std::to_string(m.counts[r][c]) + '\n';
    return out;
}

} // namespace riskgraph::classify
