#include "premsel/synthetic.hpp"

#include <algorithm>
#include <set>

#include "premsel/rng.hpp"
#include "premsel/util.hpp"

namespace premsel {

namespace {

struct Vocabulary {
  // All symbols of one topic; arities are fixed per slot so the corpus-wide
  // arity check always passes.
  std::string qa, qb, r;        // predicates /1, /1, /2
  std::string f, g;             // functions /1, /2
  std::string ca, cb, cc;       // constants

  explicit Vocabulary(std::size_t topic) {
    std::string t = std::to_string(topic);
    qa = "qa" + t;
    qb = "qb" + t;
    r = "rel" + t;
    f = "fn" + t;
    g = "gn" + t;
    ca = "ca" + t;
    cb = "cb" + t;
    cc = "cc" + t;
  }
};

std::string make_formula(const Vocabulary& v, std::size_t shape) {
  switch (shape % 9) {
    case 0: return "![X]: (" + v.qa + "(X) => " + v.qb + "(" + v.f + "(X)))";
    case 1: return v.qa + "(" + v.ca + ")";
    case 2: return v.qb + "(" + v.g + "(" + v.ca + ", " + v.cb + "))";
    case 3: return "![X, Y]: (" + v.r + "(X, Y) => " + v.r + "(Y, X))";
    case 4: return "![X]: (" + v.qb + "(X) => ?[Y]: " + v.r + "(X, Y))";
    case 5: return "![X]: (" + v.qa + "(" + v.g + "(X, " + v.ca + ")) <=> " + v.qb + "(X))";
    case 6: return v.f + "(" + v.ca + ") = " + v.cb;
    case 7: return "~" + v.qa + "(" + v.cc + ")";
    default: return "![X]: ((" + v.qa + "(X) & " + v.qb + "(X)) => " + v.r + "(X, " + v.f + "(X)))";
  }
}

std::string pad_name(const char* prefix, std::size_t i, std::size_t count) {
  std::size_t width = std::to_string(count == 0 ? 1 : count - 1).size();
  std::string digits = std::to_string(i);
  return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

SyntheticCorpus gen_synthetic(const SyntheticSpec& spec) {
  if (spec.topics == 0 || spec.premises == 0 || spec.theorems == 0)
    throw Error("synthetic corpus needs at least one topic, premise, and theorem");
  SyntheticCorpus out;
  Rng rng_topics = derive_rng(spec.seed, "synthetic/topics");
  Rng rng_shapes = derive_rng(spec.seed, "synthetic/shapes");
  Rng rng_sets = derive_rng(spec.seed, "synthetic/sets");

  std::vector<Vocabulary> vocab;
  vocab.reserve(spec.topics);
  for (std::size_t t = 0; t < spec.topics; ++t) vocab.emplace_back(t);

  // Premises first, theorems after, so most theorems see more than 512
  // allowed premises and the full-ranking slice is not a free win.
  std::vector<std::size_t> premise_topic(spec.premises);
  std::vector<std::vector<std::string>> topic_pool(spec.topics);
  for (std::size_t i = 0; i < spec.premises; ++i) {
    premise_topic[i] = rng_topics.below(spec.topics);
    std::string name = pad_name("p", i, spec.premises);
    topic_pool[premise_topic[i]].push_back(name);
    out.order.push_back(std::move(name));
  }
  std::vector<std::size_t> usable_topics;
  for (std::size_t t = 0; t < spec.topics; ++t)
    if (!topic_pool[t].empty()) usable_topics.push_back(t);

  std::vector<std::size_t> theorem_topic(spec.theorems);
  for (std::size_t i = 0; i < spec.theorems; ++i) {
    theorem_topic[i] = usable_topics[rng_topics.below(usable_topics.size())];
    std::string name = pad_name("t", i, spec.theorems);
    out.theorems.push_back(name);
    out.order.push_back(std::move(name));
  }

  auto statement_for = [&](const std::string& name, std::size_t topic) {
    std::string body = make_formula(vocab[topic], rng_shapes.below(9));
    if (rng_shapes.unit() < spec.noise_chance) {
      const Vocabulary& other = vocab[rng_shapes.below(spec.topics)];
      body = "(" + body + ") & " + other.qb + "(" + other.cb + ")";
    }
    return "fof(" + name + ", axiom, " + body + ").\n";
  };
  for (std::size_t i = 0; i < spec.premises; ++i)
    out.statements_text += statement_for(out.order[i], premise_topic[i]);
  for (std::size_t i = 0; i < spec.theorems; ++i)
    out.statements_text += statement_for(out.theorems[i], theorem_topic[i]);

  std::vector<std::vector<std::string>> topic_theorems(spec.topics);
  for (std::size_t i = 0; i < spec.theorems; ++i) {
    std::size_t topic = theorem_topic[i];
    const std::vector<std::string>& pool = topic_pool[topic];
    bool easy = rng_sets.unit() < spec.easy_fraction;

    auto draw_from = [&](const std::vector<std::string>& source, std::size_t count) {
      std::vector<std::string> sample = source;
      count = std::min(count, sample.size());
      rng_sets.sample_prefix(sample, count);
      sample.resize(count);
      return sample;
    };
    // Hard theorems also depend on earlier theorems of their topic; those sit
    // late in the order, where only a feature-aware ranking finds them.
    std::vector<std::string> primary;
    if (easy) {
      primary = draw_from(pool, 1 + rng_sets.below(2));
    } else {
      primary = draw_from(pool, 8 + rng_sets.below(5));
      for (const auto& prior : draw_from(topic_theorems[topic], 1 + rng_sets.below(3)))
        primary.push_back(prior);
    }
    out.theory.add(out.theorems[i], primary);

    if (rng_sets.unit() < spec.second_proof_chance) {
      // Alternative proof: half the primary premises rescued by a pile of
      // off-topic facts. Always at least two elements longer than the
      // primary, so minimal-proof training ignores it while all-proof
      // training ingests its noise.
      std::vector<std::string> alt = draw_from(primary, (primary.size() + 1) / 2);
      std::set<std::string> members(alt.begin(), alt.end());
      std::size_t target = primary.size() + 2 + rng_sets.below(3);
      for (std::size_t attempts = 0; members.size() < target && attempts < 200; ++attempts) {
        std::size_t other = usable_topics[rng_sets.below(usable_topics.size())];
        const auto& other_pool = topic_pool[other];
        const std::string& pick = other_pool[rng_sets.below(other_pool.size())];
        if (members.insert(pick).second) alt.push_back(pick);
      }
      if (members.size() >= primary.size() + 2) out.theory.add(out.theorems[i], alt);
    }
    topic_theorems[topic].push_back(out.theorems[i]);
  }
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "statements.p", corpus.statements_text);
  std::string order_text;
  for (const auto& name : corpus.order) {
    order_text += name;
    order_text += '\n';
  }
  write_file_atomic(dir / "order.txt", order_text);
  std::string theorems_text;
  for (const auto& name : corpus.theorems) {
    theorems_text += name;
    theorems_text += '\n';
  }
  write_file_atomic(dir / "theorems.txt", theorems_text);
  corpus.theory.save(dir / "oracle.txt");
}

Corpus load_synthetic(const SyntheticCorpus& corpus) {
  return Corpus::build(parse_statements(corpus.statements_text), corpus.order, corpus.theorems);
}

}  // namespace premsel
