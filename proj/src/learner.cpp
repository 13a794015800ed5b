#include "premsel/learner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "premsel/util.hpp"

namespace premsel {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

GradientPair logistic_grad_hess(double pred_logodds, int label) {
  double p = sigmoid(pred_logodds);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error("bad numeric literal in model file: " + std::string(text));
  return v;
}

// Candidate ordering used both inside a column scan and when merging results
// across columns: higher gain first, then lower column, lower threshold,
// default left. Equivalent to strictly-greater replacement under ascending
// enumeration.
bool better(const SplitDecision& a, const SplitDecision& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  if (a.column != b.column) return a.column < b.column;
  if (a.threshold != b.threshold) return a.threshold < b.threshold;
  return a.default_left && !b.default_left;
}

struct NodeTotals {
  double g = 0;
  double h = 0;
  std::uint32_t count = 0;
};

// Per-slot split search over a contiguous column range. `row_slot` maps each
// row to its active node (-1 = inactive). Results land in `best`, merged via
// better().
void scan_columns(const ColumnMatrix& matrix, std::uint32_t col_begin, std::uint32_t col_end,
                  std::span<const std::int32_t> row_slot, std::size_t n_slots,
                  std::span<const GradientPair> grad, std::span<const NodeTotals> totals,
                  double lambda, double min_child_weight,
                  std::vector<std::optional<SplitDecision>>& best) {
  struct Entry {
    double value;
    double g;
    double h;
  };
  std::vector<std::vector<Entry>> slot_entries(n_slots);
  for (std::uint32_t c = col_begin; c < col_end; ++c) {
    for (auto& v : slot_entries) v.clear();
    for (const auto& e : matrix.column(c)) {
      std::int32_t slot = row_slot[e.row];
      if (slot >= 0) slot_entries[slot].push_back({e.value, grad[e.row].g, grad[e.row].h});
    }
    for (std::size_t s = 0; s < n_slots; ++s) {
      const auto& entries = slot_entries[s];
      if (entries.size() < 2) continue;
      double gp_total = 0, hp_total = 0;
      for (const auto& e : entries) {
        gp_total += e.g;
        hp_total += e.h;
      }
      double g_node = totals[s].g, h_node = totals[s].h;
      double g_miss = g_node - gp_total;
      double h_miss = h_node - hp_total;
      double parent_term = g_node * g_node / (h_node + lambda);

      double prefix_g = 0, prefix_h = 0;
      for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        prefix_g += entries[i].g;
        prefix_h += entries[i].h;
        if (entries[i].value == entries[i + 1].value) continue;
        double threshold = 0.5 * (entries[i].value + entries[i + 1].value);
        for (bool default_left : {true, false}) {
          double gl = default_left ? prefix_g + g_miss : prefix_g;
          double hl = default_left ? prefix_h + h_miss : prefix_h;
          double gr = g_node - gl;
          double hr = h_node - hl;
          if (hl < min_child_weight || hr < min_child_weight) continue;
          if (hl + lambda <= 0 || hr + lambda <= 0) continue;
          double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_term);
          SplitDecision cand{c, threshold, default_left, gain};
          if (!best[s] || better(cand, *best[s])) best[s] = cand;
        }
      }
    }
  }
}

std::vector<std::optional<SplitDecision>> best_splits_multi(
    const ColumnMatrix& matrix, std::span<const std::int32_t> row_slot, std::size_t n_slots,
    std::span<const GradientPair> grad, std::span<const NodeTotals> totals, double lambda,
    double min_child_weight, unsigned workers) {
  std::vector<std::optional<SplitDecision>> best(n_slots);
  std::uint32_t n_cols = matrix.num_cols();
  if (n_cols == 0) return best;
  unsigned chunks = workers > 1 ? std::min<std::uint32_t>(workers * 4, n_cols) : 1;
  if (chunks <= 1) {
    scan_columns(matrix, 0, n_cols, row_slot, n_slots, grad, totals, lambda, min_child_weight,
                 best);
    return best;
  }
  std::vector<std::vector<std::optional<SplitDecision>>> partial(
      chunks, std::vector<std::optional<SplitDecision>>(n_slots));
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    std::uint32_t begin = static_cast<std::uint32_t>(chunk * n_cols / chunks);
    std::uint32_t end = static_cast<std::uint32_t>((chunk + 1) * n_cols / chunks);
    scan_columns(matrix, begin, end, row_slot, n_slots, grad, totals, lambda, min_child_weight,
                 partial[chunk]);
  });
  // Merge in chunk order; better() resolves cross-chunk ties exactly as the
  // serial column order would.
  for (const auto& chunk_best : partial)
    for (std::size_t s = 0; s < n_slots; ++s)
      if (chunk_best[s] && (!best[s] || better(*chunk_best[s], *best[s]))) best[s] = chunk_best[s];
  return best;
}

std::optional<double> row_value(const SparseVector& row, std::uint32_t col) {
  return row.find(col);
}

}  // namespace

ColumnMatrix ColumnMatrix::build(std::span<const SparseVector> rows) {
  ColumnMatrix m;
  m.n_rows_ = static_cast<std::uint32_t>(rows.size());
  std::uint32_t dim = 0;
  for (const auto& r : rows) dim = std::max(dim, r.dim);
  m.n_cols_ = dim;
  m.columns_.resize(dim);
  for (std::uint32_t r = 0; r < rows.size(); ++r)
    for (const auto& e : rows[r].entries) {
      if (e.col >= dim) throw Error("sparse entry outside declared dimension");
      m.columns_[e.col].push_back({r, e.value});
    }
  // Entries arrive in ascending row order; a stable sort by value yields the
  // required (value, row) order.
  for (auto& col : m.columns_)
    std::stable_sort(col.begin(), col.end(),
                     [](const ColEntry& a, const ColEntry& b) { return a.value < b.value; });
  return m;
}

std::optional<SplitDecision> best_split(const ColumnMatrix& matrix,
                                        std::span<const std::uint32_t> node_rows,
                                        std::span<const GradientPair> grad, double lambda,
                                        double min_child_weight) {
  std::vector<std::int32_t> row_slot(matrix.num_rows(), -1);
  NodeTotals totals;
  for (std::uint32_t r : node_rows) {
    row_slot[r] = 0;
    totals.g += grad[r].g;
    totals.h += grad[r].h;
    ++totals.count;
  }
  auto best = best_splits_multi(matrix, row_slot, 1, grad, {&totals, 1}, lambda,
                                min_child_weight, 1);
  if (best[0] && best[0]->gain <= 0) return std::nullopt;
  return best[0];
}

namespace {

struct ActiveNode {
  std::int32_t tree_index;
  std::vector<std::uint32_t> rows;  // ascending
};

double leaf_weight(double g, double h, double lambda) {
  double denom = h + lambda;
  if (denom <= 0) return 0;
  return -g / denom;
}

// Grows one tree; adds eta-scaled leaf weights of each row's leaf into
// `margin_delta`.
Tree grow_tree(const ColumnMatrix& matrix, std::span<const SparseVector> rows,
               std::span<const GradientPair> grad, const ModelParams& params,
               std::vector<double>& margin_delta) {
  Tree tree;
  tree.nodes.emplace_back();
  std::vector<ActiveNode> active;
  {
    std::vector<std::uint32_t> all(matrix.num_rows());
    for (std::uint32_t r = 0; r < all.size(); ++r) all[r] = r;
    active.push_back({0, std::move(all)});
  }
  std::vector<std::int32_t> row_slot(matrix.num_rows(), -1);

  auto finalize_leaf = [&](const ActiveNode& node, const NodeTotals& t) {
    double w = params.eta * leaf_weight(t.g, t.h, params.lambda);
    tree.nodes[node.tree_index].leaf = true;
    tree.nodes[node.tree_index].weight = w;
    for (std::uint32_t r : node.rows) margin_delta[r] += w;
  };

  for (std::uint32_t depth = 0; !active.empty(); ++depth) {
    std::vector<NodeTotals> totals(active.size());
    for (std::size_t s = 0; s < active.size(); ++s)
      for (std::uint32_t r : active[s].rows) {
        totals[s].g += grad[r].g;
        totals[s].h += grad[r].h;
        ++totals[s].count;
      }
    if (depth >= params.max_depth) {
      for (std::size_t s = 0; s < active.size(); ++s) finalize_leaf(active[s], totals[s]);
      break;
    }
    std::fill(row_slot.begin(), row_slot.end(), -1);
    for (std::size_t s = 0; s < active.size(); ++s)
      for (std::uint32_t r : active[s].rows) row_slot[r] = static_cast<std::int32_t>(s);
    auto decisions = best_splits_multi(matrix, row_slot, active.size(), grad, totals,
                                       params.lambda, params.min_child_weight, params.workers);
    std::vector<ActiveNode> next;
    for (std::size_t s = 0; s < active.size(); ++s) {
      const auto& node = active[s];
      if (node.rows.size() < 2 || !decisions[s] || decisions[s]->gain <= 0) {
        finalize_leaf(node, totals[s]);
        continue;
      }
      const SplitDecision& d = *decisions[s];
      std::int32_t left_index = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[node.tree_index];
      parent.leaf = false;
      parent.column = d.column;
      parent.threshold = d.threshold;
      parent.default_left = d.default_left;
      parent.left = left_index;
      parent.right = left_index + 1;
      ActiveNode left{left_index, {}};
      ActiveNode right{left_index + 1, {}};
      for (std::uint32_t r : node.rows) {
        auto v = row_value(rows[r], d.column);
        bool go_left = v ? *v < d.threshold : d.default_left;
        (go_left ? left.rows : right.rows).push_back(r);
      }
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    active = std::move(next);
  }
  return tree;
}

}  // namespace

Model train_gbdt(const TrainingSet& ts, const ModelParams& params) {
  if (ts.examples.empty()) throw Error("empty training set");
  std::uint32_t dim = ts.examples.front().dim;
  for (const auto& e : ts.examples)
    if (e.dim != dim) throw Error("training set rows disagree on dimension");
  std::size_t pos = 0, neg = 0;
  for (int label : ts.labels) (label == 1 ? pos : neg) += 1;

  Model model;
  model.dim = dim;
  bool build_trees = true;
  if (params.base_score) {
    model.base_score = *params.base_score;
  } else if (pos == 0 || neg == 0) {
    model.base_score = pos == 0 ? -10.0 : 10.0;
    build_trees = false;
  } else {
    model.base_score = std::clamp(
        std::log(static_cast<double>(pos) / static_cast<double>(neg)), -10.0, 10.0);
  }
  if (!build_trees || params.number_of_trees == 0) return model;

  ColumnMatrix matrix = ColumnMatrix::build(ts.examples);
  std::vector<double> margins(ts.size(), model.base_score);
  std::vector<GradientPair> grad(ts.size());
  std::vector<double> margin_delta(ts.size());
  model.trees.reserve(params.number_of_trees);
  for (std::uint32_t round = 0; round < params.number_of_trees; ++round) {
    for (std::size_t i = 0; i < ts.size(); ++i)
      grad[i] = logistic_grad_hess(margins[i], ts.labels[i]);
    std::fill(margin_delta.begin(), margin_delta.end(), 0.0);
    model.trees.push_back(grow_tree(matrix, ts.examples, grad, params, margin_delta));
    for (std::size_t i = 0; i < ts.size(); ++i) margins[i] += margin_delta[i];
  }
  return model;
}

double Model::margin(const SparseVector& v) const {
  if (dim != 0 && v.dim != dim) throw Error("prediction dimension mismatch");
  double out = base_score;
  for (const auto& tree : trees) {
    std::int32_t i = 0;
    while (!tree.nodes[i].leaf) {
      const TreeNode& node = tree.nodes[i];
      auto value = v.find(node.column);
      bool go_left = value ? *value < node.threshold : node.default_left;
      i = go_left ? node.left : node.right;
    }
    out += tree.nodes[i].weight;
  }
  return out;
}

double Model::predict(const SparseVector& v) const { return sigmoid(margin(v)); }

double Model::predict_pair(const SparseVector& t, const SparseVector& p) const {
  if (dim != 0 && t.dim + p.dim != dim) throw Error("prediction dimension mismatch");
  std::uint32_t n = t.dim;
  double out = base_score;
  for (const auto& tree : trees) {
    std::int32_t i = 0;
    while (!tree.nodes[i].leaf) {
      const TreeNode& node = tree.nodes[i];
      auto value = node.column < n ? t.find(node.column) : p.find(node.column - n);
      bool go_left = value ? *value < node.threshold : node.default_left;
      i = go_left ? node.left : node.right;
    }
    out += tree.nodes[i].weight;
  }
  return sigmoid(out);
}

void Model::save(std::ostream& out) const {
  out << "premsel_model 1\n";
  out << "dim " << dim << '\n';
  out << "base " << format_double(base_score) << '\n';
  out << "trees " << trees.size() << '\n';
  for (const auto& tree : trees) {
    out << "tree " << tree.nodes.size() << '\n';
    // preorder
    auto emit = [&](auto&& self, std::int32_t i) -> void {
      const TreeNode& node = tree.nodes[i];
      if (node.leaf) {
        out << "leaf " << format_double(node.weight) << '\n';
        return;
      }
      out << "node " << node.column << ' ' << format_double(node.threshold) << ' '
          << (node.default_left ? 'L' : 'R') << '\n';
      self(self, node.left);
      self(self, node.right);
    };
    emit(emit, 0);
  }
}

void Model::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  save(out);
  write_file_atomic(path, out.str());
}

Model Model::load(std::istream& in) {
  auto next_line = [&]() {
    std::string line;
    if (!std::getline(in, line)) throw Error("truncated model file");
    return line;
  };
  std::string header = next_line();
  if (header != "premsel_model 1") throw Error("unrecognized model header: " + header);
  Model model;
  {
    std::istringstream s(next_line());
    std::string key;
    s >> key >> model.dim;
    if (key != "dim" || !s) throw Error("bad dim line in model file");
  }
  {
    std::string line = next_line();
    if (line.rfind("base ", 0) != 0) throw Error("bad base line in model file");
    model.base_score = parse_double(std::string_view(line).substr(5));
  }
  std::size_t n_trees = 0;
  {
    std::istringstream s(next_line());
    std::string key;
    s >> key >> n_trees;
    if (key != "trees" || !s) throw Error("bad trees line in model file");
  }
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::size_t n_nodes = 0;
    {
      std::istringstream s(next_line());
      std::string key;
      s >> key >> n_nodes;
      if (key != "tree" || !s) throw Error("bad tree line in model file");
    }
    Tree tree;
    tree.nodes.reserve(n_nodes);
    auto read_node = [&](auto&& self) -> std::int32_t {
      std::string line = next_line();
      std::int32_t index = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      if (line.rfind("leaf ", 0) == 0) {
        tree.nodes[index].leaf = true;
        tree.nodes[index].weight = parse_double(std::string_view(line).substr(5));
        return index;
      }
      if (line.rfind("node ", 0) != 0) throw Error("bad node line in model file: " + line);
      std::istringstream s(line.substr(5));
      std::uint32_t column;
      std::string threshold, branch;
      s >> column >> threshold >> branch;
      if (!s || (branch != "L" && branch != "R"))
        throw Error("bad node line in model file: " + line);
      tree.nodes[index].leaf = false;
      tree.nodes[index].column = column;
      tree.nodes[index].threshold = parse_double(threshold);
      tree.nodes[index].default_left = branch == "L";
      std::int32_t left = self(self);
      std::int32_t right = self(self);
      tree.nodes[index].left = left;
      tree.nodes[index].right = right;
      return index;
    };
    read_node(read_node);
    if (tree.nodes.size() != n_nodes)
      throw Error("tree node count mismatch in model file");
    model.trees.push_back(std::move(tree));
  }
  return model;
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path.string());
  return load(in);
}

std::map<std::string, double> knn_rank(const std::string& conjecture, const Corpus& corpus,
                                       const ProofDb& db, std::uint32_t k) {
  std::map<std::string, double> scores;
  std::vector<std::string> proved = db.theorems();
  std::erase_if(proved, [&](const std::string& t) { return !corpus.contains(t); });
  if (proved.empty()) return scores;
  std::sort(proved.begin(), proved.end(), [&](const std::string& a, const std::string& b) {
    return corpus.position(a) < corpus.position(b);
  });

  // Document frequency over proved theorems.
  std::map<std::string, std::size_t> df;
  for (const auto& t : proved)
    for (const auto& [feature, count] : corpus.features(t)) ++df[feature];
  double n_proved = static_cast<double>(proved.size());
  auto idf = [&](const std::string& feature) {
    auto it = df.find(feature);
    if (it == df.end() || it->second == 0) return 0.0;
    return std::log(n_proved / static_cast<double>(it->second));
  };

  auto weighted_norm = [&](const FeatureBag& bag) {
    double sum = 0;
    for (const auto& [feature, count] : bag) {
      double w = static_cast<double>(count) * idf(feature);
      sum += w * w;
    }
    return std::sqrt(sum);
  };

  const FeatureBag& cbag = corpus.features(conjecture);
  double cnorm = weighted_norm(cbag);
  std::size_t c_pos = corpus.position(conjecture);

  struct Neighbor {
    double sim;
    std::size_t position;
    const std::string* name;
  };
  std::vector<Neighbor> neighbors;
  neighbors.reserve(proved.size());
  for (const auto& t : proved) {
    const FeatureBag& tbag = corpus.features(t);
    double dot = 0;
    for (const auto& [feature, count] : cbag) {
      auto it = tbag.find(feature);
      if (it == tbag.end()) continue;
      double w = idf(feature);
      dot += static_cast<double>(count) * w * static_cast<double>(it->second) * w;
    }
    double tnorm = weighted_norm(tbag);
    double sim = (cnorm > 0 && tnorm > 0) ? dot / (cnorm * tnorm) : 0.0;
    neighbors.push_back({sim, corpus.position(t), &t});
  }
  std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.position < b.position;
  });
  std::size_t take = std::min<std::size_t>(k, neighbors.size());
  for (std::size_t i = 0; i < take; ++i) {
    if (neighbors[i].sim <= 0) continue;
    for (const auto& p : db.useful_premises(*neighbors[i].name))
      if (corpus.contains(p) && corpus.position(p) < c_pos) scores[p] += neighbors[i].sim;
  }
  return scores;
}

}  // namespace premsel
