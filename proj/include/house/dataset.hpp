#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace house {

struct Triple {
  std::int32_t h = 0;
  std::int32_t r = 0;
  std::int32_t t = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& x) const {
    std::uint64_t v = std::uint64_t(std::uint32_t(x.h));
    v = v * 0x9E3779B97F4A7C15ull + std::uint32_t(x.r);
    v = v * 0x9E3779B97F4A7C15ull + std::uint32_t(x.t);
    v ^= v >> 29;
    v *= 0xBF58476D1CE4E5B9ull;
    v ^= v >> 32;
    return std::size_t(v);
  }
};

// String <-> dense id maps for entities and relations. Ids are assigned in
// first-appearance order unless seeded from dictionary files.
struct Vocab {
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
  std::unordered_map<std::string, std::int32_t> entity_ids;
  std::unordered_map<std::string, std::int32_t> relation_ids;

  std::int32_t intern_entity(const std::string& name);
  std::int32_t intern_relation(const std::string& name);
  // -1 when the name is unknown.
  std::int32_t entity_id(const std::string& name) const;
  std::int32_t relation_id(const std::string& name) const;
  int num_entities() const { return int(entity_names.size()); }
  int num_relations() const { return int(relation_names.size()); }
};

struct TripleStore {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
};

struct Dataset {
  Vocab vocab;
  TripleStore store;
};

// Reads train/valid/test triple files (tab-separated head/relation/tail, one
// triple per line) from the directory, building the vocabulary in
// first-appearance order starting with the train file. Optional
// entities.dict / relations.dict files (id<TAB>name) pre-assign ids.
// Duplicate triples within a split are dropped with a warning on stderr;
// malformed lines and empty or missing files raise std::runtime_error.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes train.txt/valid.txt/test.txt plus both dictionary files such that
// load_dataset(dir) reproduces the same id triples.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

// True-triple lookup over all three splits, keyed both ways for filtered
// ranking.
class FilterIndex {
 public:
  static FilterIndex build(const TripleStore& store);

  // Sorted unique ids; nullptr when the key never occurs.
  const std::vector<std::int32_t>* tails(std::int32_t h, std::int32_t r) const;
  const std::vector<std::int32_t>* heads(std::int32_t r, std::int32_t t) const;
  bool contains(std::int32_t h, std::int32_t r, std::int32_t t) const;

 private:
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> tails_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> heads_;
};

// Relation mapping properties, thresholded at 1.5 heads/tails on average.
enum class RmpClass { kOneToOne, kOneToN, kNToOne, kNToN, kUndefined };

const char* rmp_class_name(RmpClass c);

struct RmpStats {
  double hpt = 0.0;  // distinct (h,t) pairs per distinct tail
  double tph = 0.0;  // distinct (h,t) pairs per distinct head
  RmpClass cls = RmpClass::kUndefined;
};

// Classifies every relation id in [0, num_relations) from the training split
// alone. Relations absent from train stay UNDEFINED.
std::vector<RmpStats> classify_rmp(const TripleStore& store, int num_relations);

// ---- synthetic pattern KG -------------------------------------------------

// How many instances of each relation-pattern family to generate, and which
// share of the logically implied triples is withheld from training.
struct PatternMix {
  int symmetric_pairs = 12;
  int antisymmetric_edges = 10;
  int inverse_pairs = 12;
  int composition_chains = 12;
  int n_to_one_groups = 3;
  int n_to_one_heads = 3;          // heads per group, >= 2
  double heldout_fraction = 0.2;   // implied triples moved to valid/test
  // When set, symmetric pairs link heads of the same N-to-1 group. Heads
  // that share a tail then need distinguishable representations, which
  // stresses rotation-only models.
  bool symmetric_pairs_among_n_to_one_heads = false;
};

// Which generated relation id plays which role.
struct PatternRoles {
  std::int32_t symmetric = -1;
  std::int32_t antisymmetric = -1;
  std::int32_t inverse_premise = -1;
  std::int32_t inverse_implied = -1;
  std::int32_t composition_first = -1;
  std::int32_t composition_second = -1;
  std::int32_t composition_result = -1;
  std::int32_t n_to_one = -1;
};

struct SyntheticKg {
  Vocab vocab;
  TripleStore store;
  PatternRoles roles;
};

// Deterministically generates a KG exhibiting the five pattern families.
// Every entity appears in the train split; valid/test contain only triples
// implied by a pattern together with train facts.
SyntheticKg generate_pattern_kg(int num_entities, const PatternMix& mix,
                                std::uint64_t seed);

}  // namespace house
