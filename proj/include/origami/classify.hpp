#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace origami {

struct Dataset {
    std::vector<std::vector<double>> features;  // one row per sample
    std::vector<int> labels;
    std::vector<std::string> class_names;       // optional, indexed by sorted class

    std::size_t size() const { return features.size(); }
    std::size_t width() const { return features.empty() ? 0 : features.front().size(); }
    // Sorted distinct labels.
    std::vector<int> classes() const;
    // Throws InputError unless rows and labels agree, rows share one width,
    // values are finite and at least two classes are present.
    void validate() const;
};

enum class Kernel { linear, quadratic };
std::string_view kernel_name(Kernel k);
std::optional<Kernel> parse_kernel(std::string_view name);

struct SvmParams {
    double c = 1.0;
    Kernel kernel = Kernel::quadratic;  // quadratic: K(u, v) = (u.v + 1)^2
    double tolerance = 1e-3;            // KKT violation bound
    std::size_t max_iterations = 0;     // 0 selects max(100000, 200 * n)
    std::uint64_t seed = 0;             // accepted for interface symmetry; the solver is deterministic
};

// One binary one-vs-rest machine over the model's stored support vectors.
struct BinaryModel {
    std::vector<double> coef;  // alpha_i * y_i per stored support vector (0 if unused)
    double bias = 0.0;
    std::size_t support_count = 0;
    std::size_t iterations = 0;
};

struct SvmModel {
    Kernel kernel = Kernel::quadratic;
    std::vector<int> classes;   // label of each binary model, ascending
    std::vector<double> mean;   // standardization, per column
    std::vector<double> scale;  // stdev per column, 1 where it is zero
    std::size_t dim = 0;
    std::vector<double> support;  // standardized support vectors, row-major (count x dim)
    std::size_t support_rows = 0;
    std::vector<BinaryModel> machines;

    std::vector<double> standardize(const std::vector<double>& x) const;
    // Per-class decision values sum_i coef_i K(sv_i, x) + b. Throws InputError
    // on a width mismatch.
    std::vector<double> decision_values(const std::vector<double>& x) const;
    int predict(const std::vector<double>& x) const;
};

// One-vs-rest soft-margin SVMs trained with an SMO solver (second-order
// working-set selection) on standardized features. Throws InputError on
// invalid data and ConfigError when the solver exceeds max_iterations.
SvmModel svm_train(const Dataset& data, const SvmParams& params = {});
std::vector<int> svm_predict(const SvmModel& model, const std::vector<std::vector<double>>& rows);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
};

using Confusion = std::vector<std::vector<long>>;  // [true][predicted]

// Throws InputError for non-square matrices, negative entries or an empty total.
Metrics metrics(const Confusion& confusion);

// Confusion matrix over class indices of `classes`.
Confusion confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                           const std::vector<int>& classes);

struct FoldResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::size_t test_size = 0;
};

// Replaces feature columns [begin, end) by their top principal components,
// at most `dims` of them and never more than the fold has training rows.
// Fitted on the training rows of each fold only.
struct BlockReduction {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t dims = 0;
};

struct EvalReport {
    std::string feature_set;
    std::size_t k = 0;
    SvmParams params;
    std::optional<BlockReduction> reduction;
    std::vector<int> classes;
    std::vector<std::string> class_names;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    double mean_macro_f1 = 0.0;
    Confusion confusion;  // summed over folds
    Metrics pooled;       // metrics() of the summed confusion
};

// Fold id of every sample: per class, a seeded Fisher-Yates shuffle and
// position mod k. Throws InputError when a class has fewer than k samples.
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t k,
                                          std::uint64_t seed);

// Trains and tests every fold (in parallel when jobs > 1; results do not depend
// on jobs). Throws ConfigError when the reduction's range or dims do not fit
// the data.
EvalReport kfold_evaluate(const Dataset& data, std::size_t k, const SvmParams& params,
                          std::size_t jobs = 1,
                          const std::optional<BlockReduction>& reduction = std::nullopt);

// Applies a block reduction fitted on `train` to both row sets in place.
void reduce_block(const BlockReduction& r, std::vector<std::vector<double>>& train,
                  std::vector<std::vector<double>>& test);

// {"reports": [...]} with one entry per feature set, keys sorted.
std::string reports_to_json(const std::vector<EvalReport>& reports);
// Fixed-width table with one column per feature set.
std::string reports_to_table(const std::vector<EvalReport>& reports);

}  // namespace origami
