#include "house/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_set>

#include "house/rng.hpp"

namespace house {

namespace {

std::uint64_t pack(std::int32_t a, std::int32_t b) {
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

std::filesystem::path find_split_file(const std::filesystem::path& dir, const char* base) {
  const std::filesystem::path with_ext = dir / (std::string(base) + ".txt");
  if (std::filesystem::exists(with_ext)) return with_ext;
  const std::filesystem::path bare = dir / base;
  if (std::filesystem::exists(bare)) return bare;
  throw std::runtime_error("missing triple file: " + with_ext.string());
}

// Splits a line into exactly three tab-separated fields.
bool split_triple_line(const std::string& line, std::string out[3]) {
  std::size_t start = 0;
  int field = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      if (field >= 3) return false;
      out[field++] = line.substr(start, i - start);
      start = i + 1;
    }
  }
  return field == 3 && !out[0].empty() && !out[1].empty() && !out[2].empty();
}

void load_split(const std::filesystem::path& path, Vocab& vocab, std::vector<Triple>& out,
                const char* split_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unordered_set<Triple, TripleHash> seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t duplicates = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string fields[3];
    if (!split_triple_line(line, fields)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected head<TAB>relation<TAB>tail");
    }
    Triple triple;
    triple.h = vocab.intern_entity(fields[0]);
    triple.r = vocab.intern_relation(fields[1]);
    triple.t = vocab.intern_entity(fields[2]);
    if (!seen.insert(triple).second) {
      ++duplicates;
      continue;
    }
    out.push_back(triple);
  }
  if (out.empty()) {
    throw std::runtime_error(path.string() + ": no triples found");
  }
  if (duplicates > 0) {
    std::cerr << "warning: " << duplicates << " duplicate triple(s) dropped from "
              << split_name << " split (" << path.string() << ")\n";
  }
}

void load_dict(const std::filesystem::path& path, std::vector<std::string>& names,
               std::unordered_map<std::string, std::int32_t>& ids) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected id<TAB>name");
    }
    const long id = std::stol(line.substr(0, tab));
    const std::string name = line.substr(tab + 1);
    if (id < 0 || name.empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad dictionary entry");
    }
    if (std::size_t(id) >= names.size()) names.resize(id + 1);
    names[id] = name;
    ids.emplace(name, std::int32_t(id));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      throw std::runtime_error(path.string() + ": id " + std::to_string(i) +
                               " missing (ids must be contiguous)");
    }
  }
}

}  // namespace

std::int32_t Vocab::intern_entity(const std::string& name) {
  const auto it = entity_ids.find(name);
  if (it != entity_ids.end()) return it->second;
  const std::int32_t id = std::int32_t(entity_names.size());
  entity_names.push_back(name);
  entity_ids.emplace(name, id);
  return id;
}

std::int32_t Vocab::intern_relation(const std::string& name) {
  const auto it = relation_ids.find(name);
  if (it != relation_ids.end()) return it->second;
  const std::int32_t id = std::int32_t(relation_names.size());
  relation_names.push_back(name);
  relation_ids.emplace(name, id);
  return id;
}

std::int32_t Vocab::entity_id(const std::string& name) const {
  const auto it = entity_ids.find(name);
  return it == entity_ids.end() ? -1 : it->second;
}

std::int32_t Vocab::relation_id(const std::string& name) const {
  const auto it = relation_ids.find(name);
  return it == relation_ids.end() ? -1 : it->second;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("dataset directory not found: " + dir.string());
  }
  Dataset data;
  const auto ent_dict = dir / "entities.dict";
  const auto rel_dict = dir / "relations.dict";
  if (std::filesystem::exists(ent_dict)) {
    load_dict(ent_dict, data.vocab.entity_names, data.vocab.entity_ids);
  }
  if (std::filesystem::exists(rel_dict)) {
    load_dict(rel_dict, data.vocab.relation_names, data.vocab.relation_ids);
  }
  load_split(find_split_file(dir, "train"), data.vocab, data.store.train, "train");
  load_split(find_split_file(dir, "valid"), data.vocab, data.store.valid, "valid");
  load_split(find_split_file(dir, "test"), data.vocab, data.store.test, "test");
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto write_split = [&](const char* name, const std::vector<Triple>& triples) {
    std::ofstream out(dir / (std::string(name) + ".txt"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    for (const Triple& x : triples) {
      out << data.vocab.entity_names[x.h] << '\t' << data.vocab.relation_names[x.r] << '\t'
          << data.vocab.entity_names[x.t] << '\n';
    }
  };
  write_split("train", data.store.train);
  write_split("valid", data.store.valid);
  write_split("test", data.store.test);
  const auto write_dict = [&](const char* name, const std::vector<std::string>& names) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    for (std::size_t i = 0; i < names.size(); ++i) out << i << '\t' << names[i] << '\n';
  };
  write_dict("entities.dict", data.vocab.entity_names);
  write_dict("relations.dict", data.vocab.relation_names);
}

FilterIndex FilterIndex::build(const TripleStore& store) {
  FilterIndex index;
  const auto add = [&](const Triple& x) {
    index.tails_[pack(x.h, x.r)].push_back(x.t);
    index.heads_[pack(x.r, x.t)].push_back(x.h);
  };
  for (const Triple& x : store.train) add(x);
  for (const Triple& x : store.valid) add(x);
  for (const Triple& x : store.test) add(x);
  const auto dedup = [](std::unordered_map<std::uint64_t, std::vector<std::int32_t>>& m) {
    for (auto& [key, ids] : m) {
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
  };
  dedup(index.tails_);
  dedup(index.heads_);
  return index;
}

const std::vector<std::int32_t>* FilterIndex::tails(std::int32_t h, std::int32_t r) const {
  const auto it = tails_.find(pack(h, r));
  return it == tails_.end() ? nullptr : &it->second;
}

const std::vector<std::int32_t>* FilterIndex::heads(std::int32_t r, std::int32_t t) const {
  const auto it = heads_.find(pack(r, t));
  return it == heads_.end() ? nullptr : &it->second;
}

bool FilterIndex::contains(std::int32_t h, std::int32_t r, std::int32_t t) const {
  const std::vector<std::int32_t>* ts = tails(h, r);
  return ts != nullptr && std::binary_search(ts->begin(), ts->end(), t);
}

const char* rmp_class_name(RmpClass c) {
  switch (c) {
    case RmpClass::kOneToOne: return "1-to-1";
    case RmpClass::kOneToN: return "1-to-N";
    case RmpClass::kNToOne: return "N-to-1";
    case RmpClass::kNToN: return "N-to-N";
    case RmpClass::kUndefined: return "undefined";
  }
  return "undefined";
}

std::vector<RmpStats> classify_rmp(const TripleStore& store, int num_relations) {
  std::vector<std::set<std::pair<std::int32_t, std::int32_t>>> pairs(num_relations);
  for (const Triple& x : store.train) {
    if (x.r >= 0 && x.r < num_relations) pairs[x.r].insert({x.h, x.t});
  }
  std::vector<RmpStats> out(num_relations);
  for (int r = 0; r < num_relations; ++r) {
    if (pairs[r].empty()) continue;  // stays UNDEFINED
    std::unordered_set<std::int32_t> heads, tails;
    for (const auto& [h, t] : pairs[r]) {
      heads.insert(h);
      tails.insert(t);
    }
    RmpStats& s = out[r];
    s.hpt = double(pairs[r].size()) / double(tails.size());
    s.tph = double(pairs[r].size()) / double(heads.size());
    if (s.hpt < 1.5 && s.tph < 1.5) {
      s.cls = RmpClass::kOneToOne;
    } else if (s.hpt < 1.5) {
      s.cls = RmpClass::kOneToN;
    } else if (s.tph < 1.5) {
      s.cls = RmpClass::kNToOne;
    } else {
      s.cls = RmpClass::kNToN;
    }
  }
  return out;
}

SyntheticKg generate_pattern_kg(int num_entities, const PatternMix& mix,
                                std::uint64_t seed) {
  if (num_entities < 10) {
    throw std::invalid_argument("generate_pattern_kg: need at least 10 entities");
  }
  if (mix.n_to_one_heads < 2) {
    throw std::invalid_argument("generate_pattern_kg: N-to-1 groups need >= 2 heads");
  }
  SyntheticKg kg;
  for (int e = 0; e < num_entities; ++e) {
    char name[16];
    std::snprintf(name, sizeof name, "e%04d", e);
    kg.vocab.intern_entity(name);
  }
  kg.roles.symmetric = kg.vocab.intern_relation("sym");
  kg.roles.antisymmetric = kg.vocab.intern_relation("anti");
  kg.roles.inverse_premise = kg.vocab.intern_relation("inv_p");
  kg.roles.inverse_implied = kg.vocab.intern_relation("inv_q");
  kg.roles.composition_first = kg.vocab.intern_relation("comp_a");
  kg.roles.composition_second = kg.vocab.intern_relation("comp_b");
  kg.roles.composition_result = kg.vocab.intern_relation("comp_ab");
  kg.roles.n_to_one = kg.vocab.intern_relation("nto1");

  Rng rng(seed);
  // Entities are consumed from an endless shuffled cycle so that every one of
  // them shows up in train at least once (the slot count exceeds
  // num_entities for any sane mix).
  std::vector<std::int32_t> order(num_entities);
  for (int i = 0; i < num_entities; ++i) order[i] = i;
  for (int i = num_entities - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(std::uint64_t(i) + 1)]);
  }
  std::size_t cursor = 0;
  const auto next_entity = [&]() {
    const std::int32_t e = order[cursor % order.size()];
    ++cursor;
    return e;
  };
  const auto next_distinct = [&](std::int32_t not_this) {
    std::int32_t e = next_entity();
    while (e == not_this) e = next_entity();
    return e;
  };

  std::unordered_set<Triple, TripleHash> emitted;
  std::vector<Triple>& train = kg.store.train;
  std::vector<Triple> implied;  // candidates for the held-out splits
  const auto add_train = [&](std::int32_t h, std::int32_t r, std::int32_t t) {
    const Triple x{h, r, t};
    if (emitted.insert(x).second) train.push_back(x);
  };
  // Returns false when the triple was already emitted somewhere.
  const auto add_implied = [&](std::int32_t h, std::int32_t r, std::int32_t t,
                               bool hold_out) {
    const Triple x{h, r, t};
    if (!emitted.insert(x).second) return;
    if (hold_out) {
      implied.push_back(x);
    } else {
      train.push_back(x);
    }
  };
  const auto hold = [&]() { return rng.uniform() < mix.heldout_fraction; };

  // N-to-1 groups first: their heads double as symmetric-pair endpoints when
  // the conflict flag is on.
  std::vector<std::vector<std::int32_t>> group_heads;
  for (int g = 0; g < mix.n_to_one_groups; ++g) {
    const std::int32_t tail = next_entity();
    std::vector<std::int32_t> heads;
    while (int(heads.size()) < mix.n_to_one_heads) {
      const std::int32_t h = next_distinct(tail);
      if (std::find(heads.begin(), heads.end(), h) == heads.end()) heads.push_back(h);
    }
    for (const std::int32_t h : heads) add_train(h, kg.roles.n_to_one, tail);
    group_heads.push_back(std::move(heads));
  }

  // Symmetric: both directions are true; a held-out share keeps only one
  // direction in train and the reverse becomes an implied eval triple.
  int emitted_pairs = 0;
  if (mix.symmetric_pairs_among_n_to_one_heads) {
    // One pass over the groups; fewer pairs than asked for is fine.
    for (const auto& heads : group_heads) {
      for (std::size_t i = 0; i + 1 < heads.size() && emitted_pairs < mix.symmetric_pairs;
           i += 2) {
        add_train(heads[i], kg.roles.symmetric, heads[i + 1]);
        add_implied(heads[i + 1], kg.roles.symmetric, heads[i], hold());
        ++emitted_pairs;
      }
    }
  }
  while (emitted_pairs < mix.symmetric_pairs) {
    const std::int32_t a = next_entity();
    const std::int32_t b = next_distinct(a);
    add_train(a, kg.roles.symmetric, b);
    add_implied(b, kg.roles.symmetric, a, hold());
    ++emitted_pairs;
  }

  // Antisymmetric: one direction only, nothing implied.
  for (int i = 0; i < mix.antisymmetric_edges; ++i) {
    const std::int32_t a = next_entity();
    const std::int32_t b = next_distinct(a);
    add_train(a, kg.roles.antisymmetric, b);
  }

  // Inverse pair: premise always trains; the implied reverse may be held out.
  for (int i = 0; i < mix.inverse_pairs; ++i) {
    const std::int32_t a = next_entity();
    const std::int32_t b = next_distinct(a);
    add_train(a, kg.roles.inverse_premise, b);
    add_implied(b, kg.roles.inverse_implied, a, hold());
  }

  // Composition chains: premises train; the composed edge may be held out.
  for (int i = 0; i < mix.composition_chains; ++i) {
    const std::int32_t x = next_entity();
    const std::int32_t y = next_distinct(x);
    std::int32_t z = next_entity();
    while (z == y) z = next_entity();
    add_train(x, kg.roles.composition_first, y);
    add_train(y, kg.roles.composition_second, z);
    add_implied(x, kg.roles.composition_result, z, hold());
  }

  // Sweep the cycle once more so stragglers (entities whose slots all landed
  // on duplicate-suppressed triples) still reach train.
  std::unordered_set<std::int32_t> in_train;
  for (const Triple& x : train) {
    in_train.insert(x.h);
    in_train.insert(x.t);
  }
  for (std::int32_t e = 0; e < num_entities; ++e) {
    if (in_train.count(e)) continue;
    std::int32_t partner = next_distinct(e);
    // Do not break antisymmetry by closing an existing edge's reverse.
    while (emitted.count(Triple{partner, kg.roles.antisymmetric, e}) > 0) {
      partner = next_distinct(e);
    }
    add_train(e, kg.roles.antisymmetric, partner);
    in_train.insert(e);
    in_train.insert(partner);
  }

  // Alternate implied triples between valid and test.
  for (std::size_t i = 0; i < implied.size(); ++i) {
    (i % 2 == 0 ? kg.store.valid : kg.store.test).push_back(implied[i]);
  }
  return kg;
}

}  // namespace house
