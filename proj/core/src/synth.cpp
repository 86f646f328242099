#include "duorank/synth.hpp"

#include <algorithm>
#include <filesystem>

#include "duorank/common.hpp"
#include "duorank/rng.hpp"

namespace duorank {

namespace {

constexpr std::size_t kDocsPerTopic = 20;
constexpr std::size_t kConceptsPerTopic = 12;
constexpr std::size_t kVariantsPerConcept = 3;
constexpr std::size_t kFillerVocab = 40;
constexpr std::size_t kConceptsPerDoc = 8;
constexpr std::size_t kFillerPerDoc = 3;
constexpr std::size_t kConceptsPerQuery = 6;
constexpr std::size_t kExactPerQuery = 2;  // concepts keeping the doc's variant
constexpr std::size_t kFillerPerQuery = 2;
constexpr std::size_t kTrapsPerQuery = 2;
constexpr std::size_t kTrapTokens = 3;

/// Pronounceable unique pseudo-word for an index: four CV syllables from the
/// base-80 digits of an odd-multiplier bijection of the index (unique below
/// 2^24, with varied letters even for consecutive indices).
std::string word_for(std::size_t index) {
  static const char* consonants = "bdfghjklmnprstvz";
  static const char* vowels = "aeiou";
  std::size_t x = (index * 0x9E3779B1ULL) & 0xFFFFFF;
  std::string w;
  for (int s = 0; s < 4; ++s) {
    w.push_back(consonants[x % 16]);
    w.push_back(vowels[(x / 16) % 5]);
    x /= 80;
  }
  return w;
}

std::string concept_word(std::size_t topic, std::size_t concept_id,
                         std::size_t variant) {
  return word_for(kFillerVocab +
                  (topic * kConceptsPerTopic + concept_id) * kVariantsPerConcept +
                  variant);
}

std::string padded_id(char prefix, std::size_t i, std::size_t total) {
  std::size_t width = 1;
  for (std::size_t t = total; t >= 10; t /= 10) ++width;
  std::string num = std::to_string(i + 1);
  return prefix + std::string(width > num.size() ? width - num.size() : 0, '0') +
         num;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

struct DocDraft {
  std::size_t topic = 0;
  std::vector<std::pair<std::size_t, std::size_t>> concepts;  // (concept, variant)
  std::vector<std::string> tokens;
};

}  // namespace

SynthBenchmark generate_synthetic_benchmark(std::uint64_t seed,
                                            std::size_t n_docs,
                                            std::size_t n_queries) {
  if (n_queries < 1) throw ValidationError("synth: need at least one query");
  if (n_docs < 10 * n_queries) {
    throw ValidationError("synth: need n_docs >= 10 * n_queries (got " +
                          std::to_string(n_docs) + " docs for " +
                          std::to_string(n_queries) + " queries)");
  }
  if (n_docs < 2 * kDocsPerTopic) {
    throw ValidationError("synth: corpus too small, need at least " +
                          std::to_string(2 * kDocsPerTopic) + " documents");
  }

  const std::size_t n_topics = (n_docs + kDocsPerTopic - 1) / kDocsPerTopic;

  std::vector<DocDraft> drafts(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    DocDraft& d = drafts[i];
    d.topic = i % n_topics;
    Rng rng(mix_seed(mix_seed(seed, 0xD0C5), i));
    for (std::size_t c :
         rng.sample_without_replacement(kConceptsPerTopic, kConceptsPerDoc)) {
      d.concepts.emplace_back(c, rng.next_below(kVariantsPerConcept));
    }
    for (const auto& [concept_id, variant] : d.concepts) {
      d.tokens.push_back(concept_word(d.topic, concept_id, variant));
    }
    // One repeated concept word plus filler noise.
    const auto& dup = d.concepts[rng.next_below(d.concepts.size())];
    d.tokens.push_back(concept_word(d.topic, dup.first, dup.second));
    for (std::size_t f = 0; f < kFillerPerDoc; ++f) {
      d.tokens.push_back(word_for(rng.next_below(kFillerVocab)));
    }
    rng.shuffle(d.tokens);
  }

  std::vector<Query> queries;
  queries.reserve(n_queries);
  RelevanceJudgments qrels;
  const std::size_t stride = n_docs / n_queries;  // >= 10 by precondition

  std::vector<std::string> doc_ids(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    doc_ids[i] = padded_id('d', i, n_docs);
  }

  for (std::size_t qi = 0; qi < n_queries; ++qi) {
    const std::size_t target = qi * stride;
    const DocDraft& d = drafts[target];
    Rng rng(mix_seed(mix_seed(seed, 0x9E37), qi));

    // Paraphrase: same concepts, sibling surface variants; a small number of
    // concepts keep the document's exact word so term matching retains a
    // weak (trap-dominated) signal.
    std::vector<std::string> tokens;
    std::size_t emitted = 0;
    for (std::size_t pick :
         rng.sample_without_replacement(d.concepts.size(), kConceptsPerQuery)) {
      const auto& [concept_id, doc_variant] = d.concepts[pick];
      std::size_t variant = doc_variant;
      if (emitted++ >= kExactPerQuery) {
        variant = (doc_variant + 1 + rng.next_below(kVariantsPerConcept - 1)) %
                  kVariantsPerConcept;
      }
      tokens.push_back(concept_word(d.topic, concept_id, variant));
    }
    // Traps: copy exact query concept tokens into documents of other topics,
    // giving term matching high-confidence wrong answers.
    for (std::size_t t = 0; t < kTrapsPerQuery; ++t) {
      std::size_t victim = rng.next_below(n_docs);
      while (drafts[victim].topic == d.topic) {
        victim = rng.next_below(n_docs);
      }
      for (std::size_t pick :
           rng.sample_without_replacement(kConceptsPerQuery, kTrapTokens)) {
        drafts[victim].tokens.push_back(tokens[pick]);
      }
    }

    for (std::size_t f = 0; f < kFillerPerQuery; ++f) {
      tokens.push_back(word_for(rng.next_below(kFillerVocab)));
    }
    rng.shuffle(tokens);

    Query q;
    q.id = padded_id('q', qi, n_queries);
    q.text = join(tokens);
    qrels.entries[q.id][doc_ids[target]] = 1;
    queries.push_back(std::move(q));
  }

  std::vector<Document> docs;
  docs.reserve(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    docs.push_back(Document{doc_ids[i], join(drafts[i].tokens), std::nullopt});
  }

  SynthBenchmark bench;
  bench.corpus = DocumentCollection(std::move(docs));
  bench.queries = QueryCollection(std::move(queries));
  bench.qrels = std::move(qrels);
  return bench;
}

SynthBenchmark write_synthetic_benchmark(std::uint64_t seed, std::size_t n_docs,
                                         std::size_t n_queries,
                                         const std::string& out_dir) {
  SynthBenchmark bench = generate_synthetic_benchmark(seed, n_docs, n_queries);
  std::filesystem::create_directories(out_dir);
  write_corpus(bench.corpus, out_dir + "/corpus.jsonl");
  write_queries(bench.queries, out_dir + "/queries.jsonl");
  write_qrels(bench.qrels, out_dir + "/qrels.tsv");
  return bench;
}

}  // namespace duorank
