#include "origami/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <thread>

#include "json.hpp"
#include "origami/descriptors.hpp"
#include "origami/error.hpp"
#include "origami/simd.hpp"

namespace origami {

std::vector<int> Dataset::classes() const {
    std::vector<int> out = labels;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void Dataset::validate() const {
    if (features.size() != labels.size())
        throw InputError("dataset: " + std::to_string(features.size()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    if (features.empty()) throw InputError("dataset is empty");
    const std::size_t w = width();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != w)
            throw InputError("dataset row " + std::to_string(i) + " has width " +
                             std::to_string(features[i].size()) + ", expected " + std::to_string(w));
        for (double v : features[i])
            if (!std::isfinite(v))
                throw InputError("dataset row " + std::to_string(i) + " has a non-finite value");
    }
    if (classes().size() < 2) throw InputError("dataset needs at least two classes");
}

std::string_view kernel_name(Kernel k) { return k == Kernel::linear ? "linear" : "quadratic"; }

std::optional<Kernel> parse_kernel(std::string_view name) {
    if (name == "linear") return Kernel::linear;
    if (name == "quadratic") return Kernel::quadratic;
    return std::nullopt;
}

namespace {

void kernel_row(Kernel kernel, const double* rows, std::size_t n, std::size_t dim,
                const double* x, double* out) {
    const auto& k = simd::active();
    if (kernel == Kernel::quadratic) k.quadratic_kernel_row(rows, n, dim, x, out);
    else k.gemv(rows, n, dim, x, out);
}

struct SmoOutcome {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
};

// Dual C-SVC: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, with Q_ij = y_i y_j K_ij.
SmoOutcome solve_smo(const std::vector<double>& K, const std::vector<signed char>& y, double C,
                     double eps, std::size_t max_iter) {
    const std::size_t n = y.size();
    constexpr double kTau = 1e-12;
    auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[i * n + j]; };
    std::vector<double> alpha(n, 0.0), G(n, -1.0);

    SmoOutcome out;
    while (true) {
        // Maximal violating i, then j by second-order gain.
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == +1 ? alpha[t] < C : alpha[t] > 0.0) {
                const double v = -y[t] * G[t];
                if (v >= gmax) {
                    gmax = v;
                    i = t;
                }
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t j = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (!(y[t] == +1 ? alpha[t] > 0.0 : alpha[t] < C)) continue;
            const double v = y[t] * G[t];
            gmax2 = std::max(gmax2, v);
            if (i == n) continue;
            const double grad_diff = gmax + v;
            if (grad_diff > 0.0) {
                double quad = K[i * n + i] + K[t * n + t] - 2.0 * K[i * n + t];
                if (quad <= 0.0) quad = kTau;
                const double gain = -(grad_diff * grad_diff) / quad;
                if (gain <= best) {
                    best = gain;
                    j = t;
                }
            }
        }
        if (i == n || j == n || gmax + gmax2 < eps) break;
        if (out.iterations >= max_iter)
            throw ConfigError("SVM solver did not reach KKT tolerance within " +
                              std::to_string(max_iter) + " iterations");
        ++out.iterations;

        const double old_i = alpha[i], old_j = alpha[j];
        const double qij = Q(i, j);
        if (y[i] != y[j]) {
            double quad = K[i * n + i] + K[j * n + j] + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = K[i * n + i] + K[j * n + j] - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) G[t] += Q(t, i) * di + Q(t, j) * dj;
    }

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (alpha[t] >= C) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == +1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free;
            sum_free += yg;
        }
    }
    out.rho = free > 0 ? sum_free / static_cast<double>(free) : 0.5 * (ub + lb);
    out.alpha = std::move(alpha);
    return out;
}

}  // namespace

std::vector<double> SvmModel::standardize(const std::vector<double>& x) const {
    if (x.size() != dim)
        throw InputError("feature width " + std::to_string(x.size()) +
                         " does not match the model width " + std::to_string(dim));
    std::vector<double> z(dim);
    for (std::size_t j = 0; j < dim; ++j) z[j] = (x[j] - mean[j]) / scale[j];
    return z;
}

std::vector<double> SvmModel::decision_values(const std::vector<double>& x) const {
    const std::vector<double> z = standardize(x);
    std::vector<double> k(support_rows);
    if (support_rows > 0) kernel_row(kernel, support.data(), support_rows, dim, z.data(), k.data());
    std::vector<double> out;
    out.reserve(machines.size());
    for (const auto& m : machines)
        out.push_back(simd::active().dot(m.coef.data(), k.data(), support_rows) + m.bias);
    return out;
}

int SvmModel::predict(const std::vector<double>& x) const {
    const std::vector<double> d = decision_values(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < d.size(); ++c)
        if (d[c] > d[best]) best = c;
    return classes[best];
}

SvmModel svm_train(const Dataset& data, const SvmParams& params) {
    data.validate();
    if (!(params.c > 0.0) || !std::isfinite(params.c)) throw ConfigError("SVM C must be positive");
    if (!(params.tolerance > 0.0)) throw ConfigError("SVM tolerance must be positive");
    const std::size_t n = data.size(), dim = data.width();

    SvmModel model;
    model.kernel = params.kernel;
    model.classes = data.classes();
    model.dim = dim;
    model.mean.assign(dim, 0.0);
    model.scale.assign(dim, 0.0);
    for (const auto& row : data.features)
        for (std::size_t j = 0; j < dim; ++j) model.mean[j] += row[j];
    for (double& m : model.mean) m /= static_cast<double>(n);
    for (const auto& row : data.features)
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = row[j] - model.mean[j];
            model.scale[j] += d * d;
        }
    for (double& s : model.scale) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 0.0)) s = 1.0;
    }

    std::vector<double> Z(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = model.standardize(data.features[i]);
        std::copy(z.begin(), z.end(), Z.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i)
        kernel_row(params.kernel, Z.data(), n, dim, Z.data() + i * dim, K.data() + i * n);

    const std::size_t max_iter =
        params.max_iterations ? params.max_iterations : std::max<std::size_t>(100000, 200 * n);
    std::vector<SmoOutcome> outcomes;
    std::vector<char> used(n, 0);
    for (int cls : model.classes) {
        std::vector<signed char> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] == cls ? 1 : -1;
        outcomes.push_back(solve_smo(K, y, params.c, params.tolerance, max_iter));
        for (std::size_t i = 0; i < n; ++i)
            if (outcomes.back().alpha[i] > 0.0) used[i] = 1;
    }

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (used[i]) sv.push_back(i);
    model.support_rows = sv.size();
    for (std::size_t i : sv)
        model.support.insert(model.support.end(), Z.begin() + static_cast<std::ptrdiff_t>(i * dim),
                             Z.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        BinaryModel m;
        m.bias = -outcomes[c].rho;
        m.iterations = outcomes[c].iterations;
        for (std::size_t i : sv) {
            const double a = outcomes[c].alpha[i];
            const double sign = data.labels[i] == model.classes[c] ? 1.0 : -1.0;
            m.coef.push_back(a * sign);
            if (a > 0.0) ++m.support_count;
        }
        model.machines.push_back(std::move(m));
    }
    return model;
}

std::vector<int> svm_predict(const SvmModel& model, const std::vector<std::vector<double>>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(model.predict(r));
    return out;
}

Metrics metrics(const Confusion& confusion) {
    const std::size_t c = confusion.size();
    if (c == 0) throw InputError("confusion matrix is empty");
    long total = 0, trace = 0;
    for (std::size_t i = 0; i < c; ++i) {
        if (confusion[i].size() != c) throw InputError("confusion matrix is not square");
        for (std::size_t j = 0; j < c; ++j) {
            if (confusion[i][j] < 0) throw InputError("confusion matrix has a negative entry");
            total += confusion[i][j];
        }
        trace += confusion[i][i];
    }
    if (total == 0) throw InputError("confusion matrix has no samples");

    Metrics m;
    m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    for (std::size_t k = 0; k < c; ++k) {
        long row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += confusion[k][j];
            col += confusion[j][k];
        }
        ClassMetrics cm;
        cm.support = row;
        const double tp = static_cast<double>(confusion[k][k]);
        cm.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
        cm.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
        const double pr = cm.precision + cm.recall;
        cm.f1 = pr > 0.0 ? 2.0 * cm.precision * cm.recall / pr : 0.0;
        m.macro_f1 += cm.f1;
        m.per_class.push_back(cm);
    }
    m.macro_f1 /= static_cast<double>(c);
    return m;
}

Confusion confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                           const std::vector<int>& classes) {
    if (truth.size() != predicted.size())
        throw InputError("confusion matrix: truth and prediction counts differ");
    auto index = [&](int label) {
        const auto it = std::lower_bound(classes.begin(), classes.end(), label);
        if (it == classes.end() || *it != label)
            throw InputError("label " + std::to_string(label) + " is not a known class");
        return static_cast<std::size_t>(it - classes.begin());
    };
    Confusion cm(classes.size(), std::vector<long>(classes.size(), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm[index(truth[i])][index(predicted[i])];
    return cm;
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t k,
                                          std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold needs k >= 2");
    std::vector<int> classes = labels;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> fold(labels.size(), 0);
    for (int cls : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.size() < k)
            throw InputError("class " + std::to_string(cls) + " has " +
                             std::to_string(members.size()) + " samples, fewer than k = " +
                             std::to_string(k));
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng() % i]);
        for (std::size_t pos = 0; pos < members.size(); ++pos) fold[members[pos]] = pos % k;
    }
    return fold;
}

void reduce_block(const BlockReduction& r, std::vector<std::vector<double>>& train,
                  std::vector<std::vector<double>>& test) {
    if (train.empty()) throw InputError("block reduction: no training rows");
    const std::size_t width = train.front().size();
    if (r.begin >= r.end || r.end > width)
        throw ConfigError("block reduction: column range [" + std::to_string(r.begin) + ", " +
                          std::to_string(r.end) + ") does not fit " + std::to_string(width) +
                          " columns");
    const std::size_t w = r.end - r.begin;
    auto block = [&](const std::vector<std::vector<double>>& rows) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(w));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != width) throw InputError("block reduction: ragged rows");
            for (std::size_t j = 0; j < w; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][r.begin + j];
        }
        return m;
    };
    if (r.dims == 0) throw ConfigError("block reduction: dims must be positive");
    // Small folds cannot support more components than rows.
    const std::size_t dims = std::min({r.dims, train.size(), w});
    const PcaModel pca = fit_pca(block(train), dims);
    auto apply = [&](std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return;
        const Eigen::MatrixXd z = pca.project(block(rows));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::vector<double> out(rows[i].begin(), rows[i].begin() + static_cast<std::ptrdiff_t>(r.begin));
            for (Eigen::Index j = 0; j < z.cols(); ++j) out.push_back(z(static_cast<Eigen::Index>(i), j));
            out.insert(out.end(), rows[i].begin() + static_cast<std::ptrdiff_t>(r.end), rows[i].end());
            rows[i] = std::move(out);
        }
    };
    apply(train);
    apply(test);
}

EvalReport kfold_evaluate(const Dataset& data, std::size_t k, const SvmParams& params,
                          std::size_t jobs, const std::optional<BlockReduction>& reduction) {
    data.validate();
    const std::vector<std::size_t> fold = stratified_folds(data.labels, k, params.seed);
    EvalReport report;
    report.k = k;
    report.params = params;
    report.reduction = reduction;
    report.classes = data.classes();
    report.class_names = data.class_names;

    struct FoldOutput {
        std::vector<int> truth, predicted;
        std::exception_ptr error;
    };
    std::vector<FoldOutput> outputs(k);
    auto run = [&](std::size_t f) {
        try {
            Dataset train;
            std::vector<std::vector<double>> test;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (fold[i] == f) {
                    test.push_back(data.features[i]);
                    outputs[f].truth.push_back(data.labels[i]);
                } else {
                    train.features.push_back(data.features[i]);
                    train.labels.push_back(data.labels[i]);
                }
            }
            if (reduction) reduce_block(*reduction, train.features, test);
            outputs[f].predicted = svm_predict(svm_train(train, params), test);
        } catch (...) {
            outputs[f].error = std::current_exception();
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, k));
    if (workers == 1) {
        for (std::size_t f = 0; f < k; ++f) run(f);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t f = next++; f < k; f = next++) run(f);
            });
        for (auto& t : pool) t.join();
    }

    report.confusion.assign(report.classes.size(), std::vector<long>(report.classes.size(), 0));
    for (std::size_t f = 0; f < k; ++f) {
        if (outputs[f].error) std::rethrow_exception(outputs[f].error);
        const Confusion cm = confusion_matrix(outputs[f].truth, outputs[f].predicted, report.classes);
        for (std::size_t a = 0; a < cm.size(); ++a)
            for (std::size_t b = 0; b < cm.size(); ++b) report.confusion[a][b] += cm[a][b];
        const Metrics m = metrics(cm);
        report.folds.push_back({m.accuracy, m.macro_f1, outputs[f].truth.size()});
        report.mean_accuracy += m.accuracy;
        report.mean_macro_f1 += m.macro_f1;
    }
    report.mean_accuracy /= static_cast<double>(k);
    report.mean_macro_f1 /= static_cast<double>(k);
    report.pooled = metrics(report.confusion);
    return report;
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : r.folds)
            folds.push_back({{"accuracy", f.accuracy}, {"macro_f1", f.macro_f1}, {"test_size", f.test_size}});
        nlohmann::json per_class = nlohmann::json::array();
        for (std::size_t c = 0; c < r.pooled.per_class.size(); ++c) {
            const auto& m = r.pooled.per_class[c];
            per_class.push_back({{"class", r.classes[c]},
                                 {"precision", m.precision},
                                 {"recall", m.recall},
                                 {"f1", m.f1},
                                 {"support", m.support}});
        }
        arr.push_back({{"feature_set", r.feature_set},
                       {"k", r.k},
                       {"c", r.params.c},
                       {"kernel", kernel_name(r.params.kernel)},
                       {"seed", r.params.seed},
                       {"classes", r.classes},
                       {"mean_accuracy", r.mean_accuracy},
                       {"mean_macro_f1", r.mean_macro_f1},
                       {"pooled_accuracy", r.pooled.accuracy},
                       {"pooled_macro_f1", r.pooled.macro_f1},
                       {"folds", std::move(folds)},
                       {"per_class", std::move(per_class)},
                       {"confusion", r.confusion}});
        if (r.reduction)
            arr.back()["reduction"] = {{"begin", r.reduction->begin},
                                       {"end", r.reduction->end},
                                       {"dims", r.reduction->dims},
                                       {"method", "pca"}};
    }
    return nlohmann::json{{"reports", std::move(arr)}}.dump(1) + "\n";
}

std::string reports_to_table(const std::vector<EvalReport>& reports) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-18s", "metric");
    out += buf;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string name = reports[i].feature_set;
        if (name.size() > 24) name = "..." + name.substr(name.size() - 21);
        std::snprintf(buf, sizeof buf, " %24s", name.c_str());
        out += buf;
    }
    out += '\n';
    auto row = [&](const char* label, auto get) {
        std::snprintf(buf, sizeof buf, "%-18s", label);
        out += buf;
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, " %24.4f", get(r));
            out += buf;
        }
        out += '\n';
    };
    row("mean accuracy", [](const EvalReport& r) { return r.mean_accuracy; });
    row("mean macro-F1", [](const EvalReport& r) { return r.mean_macro_f1; });
    row("pooled accuracy", [](const EvalReport& r) { return r.pooled.accuracy; });
    row("pooled macro-F1", [](const EvalReport& r) { return r.pooled.macro_f1; });
    return out;
}

}  // namespace origami
