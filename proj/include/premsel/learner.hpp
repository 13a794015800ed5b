#ifndef PREMSEL_LEARNER_HPP
#define PREMSEL_LEARNER_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "premsel/dataset.hpp"

namespace premsel {

struct ModelParams {
  std::uint32_t number_of_trees = 2000;
  std::uint32_t max_depth = 10;
  double eta = 0.2;
  double lambda = 1.0;            // L2 regularizer on leaf weights
  double min_child_weight = 1.0;  // minimum hessian sum per child
  std::uint64_t seed = 0;
  unsigned workers = 1;
  // When set, overrides the automatic base score and forces tree building
  // even for single-class inputs. Without it, base = log(pos/neg) clamped to
  // [-10, 10], and a single-class set yields a trees-free model.
  std::optional<double> base_score;
};

struct GradientPair {
  double g = 0;
  double h = 0;
};

// Second-order logistic loss: p = sigmoid(pred), g = p - label, h = p(1-p).
GradientPair logistic_grad_hess(double pred_logodds, int label);

double sigmoid(double x);

struct TreeNode {
  bool leaf = true;
  std::uint32_t column = 0;
  double threshold = 0;
  bool default_left = true;
  double weight = 0;  // leaf payload, already scaled by eta
  std::int32_t left = -1;
  std::int32_t right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0
};

class Model {
 public:
  double base_score = 0;
  std::uint32_t dim = 0;
  std::vector<Tree> trees;

  // Log-odds: base_score plus the leaf weights along each tree's path.
  double margin(const SparseVector& v) const;
  double predict(const SparseVector& v) const;  // sigmoid(margin), in [0,1]

  // Same as predict on the concatenation of t and p (p shifted by t.dim)
  // without materializing the pair vector.
  double predict_pair(const SparseVector& t, const SparseVector& p) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Model load(std::istream& in);
  static Model load(const std::filesystem::path& path);
};

struct SplitDecision {
  std::uint32_t column = 0;
  double threshold = 0;
  bool default_left = true;
  double gain = 0;
};

// Training matrix in column-major form: per column, (row, value) entries
// sorted by (value, row).
class ColumnMatrix {
 public:
  struct ColEntry {
    std::uint32_t row;
    double value;
  };

  static ColumnMatrix build(std::span<const SparseVector> rows);

  std::uint32_t num_rows() const { return n_rows_; }
  std::uint32_t num_cols() const { return n_cols_; }
  const std::vector<ColEntry>& column(std::uint32_t c) const { return columns_[c]; }

 private:
  std::uint32_t n_rows_ = 0;
  std::uint32_t n_cols_ = 0;
  std::vector<std::vector<ColEntry>> columns_;
};

// Exact greedy split search over all columns, all midpoint thresholds between
// consecutive distinct present values, and both default directions for rows
// lacking the column.
//
// The arithmetic is part of the contract (tests reproduce it exactly):
//   - node totals G,H sum gradients over node rows in ascending row order;
//   - per column, present entries are visited in (value, row) order and
//     prefix sums accumulated in that order; present totals are the full
//     prefix; missing stats are node totals minus present totals;
//   - candidate threshold between distinct values lo < hi is 0.5 * (lo + hi);
//   - default right: GL = prefix; default left: GL = prefix + G_missing;
//     GR = G_node - GL (same for H);
//   - candidates with HL < min_child_weight, HR < min_child_weight, or a
//     non-positive regularized denominator are skipped;
//   - gain = 0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda));
//   - enumeration order is columns ascending, thresholds ascending, default
//     left before right; strictly greater gain wins, so ties resolve to the
//     lowest column, lowest threshold, default left.
// Returns nullopt when no candidate has positive gain.
std::optional<SplitDecision> best_split(const ColumnMatrix& matrix,
                                        std::span<const std::uint32_t> node_rows,
                                        std::span<const GradientPair> grad, double lambda,
                                        double min_child_weight);

// Newton boosting: numberOfTrees rounds of (g,h) at current margins, a tree
// grown to max_depth via best_split, leaf weights -G/(H+lambda) scaled by
// eta. Deterministic for fixed params, independent of `workers`.
Model train_gbdt(const TrainingSet& ts, const ModelParams& params);

// Multilabel k-NN baseline: cosine similarity over IDF-weighted feature bags
// of proved theorems; each of the k nearest proved theorems votes its
// similarity for every useful premise of its proofs that is allowed for `c`.
// Premises without votes score 0 (absent from the returned map).
std::map<std::string, double> knn_rank(const std::string& conjecture, const Corpus& corpus,
                                       const ProofDb& db, std::uint32_t k);

}  // namespace premsel

#endif  // PREMSEL_LEARNER_HPP
