#include "house/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace house {

namespace {

constexpr char kMagic[8] = {'H', 'O', 'U', 'S', 'E', 'K', 'G', '1'};

void append_u64_le(std::vector<char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

std::uint64_t read_u64_le(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(p[i])) << (8 * i);
  return v;
}

void append_doubles_le(std::vector<char>& out, const std::vector<double>& values) {
  for (double d : values) append_u64_le(out, std::bit_cast<std::uint64_t>(d));
}

void read_doubles_le(const char*& p, const char* end, std::vector<double>& out,
                     std::size_t count) {
  if (std::size_t(end - p) < count * 8) {
    throw CheckpointTruncatedError("checkpoint payload shorter than the header implies");
  }
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::bit_cast<double>(read_u64_le(p));
    p += 8;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t vocab_digest(const Vocab& vocab) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a offset basis
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    h ^= 0x1F;  // separator so name boundaries matter
    h *= 0x100000001B3ull;
  };
  for (const auto& name : vocab.entity_names) mix(name);
  h ^= 0x3B;  // section separator
  h *= 0x100000001B3ull;
  for (const auto& name : vocab.relation_names) mix(name);
  return h;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     std::uint64_t digest) {
  const ModelConfig& cfg = model.cfg;
  std::ostringstream meta;
  meta << "format_version=1\n"
       << "variant=" << variant_name(cfg.variant) << '\n'
       << "d=" << cfg.d << '\n'
       << "k=" << cfg.k << '\n'
       << "m=" << cfg.m << '\n'
       << "n=" << cfg.n() << '\n'
       << "entities=" << cfg.num_entities << '\n'
       << "relations=" << cfg.num_relations << '\n'
       << "seed=" << cfg.seed << '\n'
       << "vocab_digest=" << hex64(digest) << '\n';
  const std::string meta_str = meta.str();

  std::vector<char> bytes;
  const std::size_t payload_doubles =
      model.entities.size() + model.rotations.size() + model.axes_head.size() +
      model.taus_head.size() + model.axes_tail.size() + model.taus_tail.size() +
      model.translations.size();
  bytes.reserve(16 + meta_str.size() + payload_doubles * 8);
  bytes.insert(bytes.end(), kMagic, kMagic + 8);
  append_u64_le(bytes, meta_str.size());
  bytes.insert(bytes.end(), meta_str.begin(), meta_str.end());

  append_doubles_le(bytes, model.entities);
  for (int r = 0; r < cfg.num_relations; ++r) {
    const auto add = [&](std::span<const double> block) {
      for (double d : block) append_u64_le(bytes, std::bit_cast<std::uint64_t>(d));
    };
    add(model.rotation(r));
    if (cfg.m > 0) {
      add(model.axes(r, Side::kHead));
      add(model.taus(r, Side::kHead));
      add(model.axes(r, Side::kTail));
      add(model.taus(r, Side::kTail));
    }
    if (cfg.has_translation()) add(model.translation(r));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw CheckpointError("short write on checkpoint: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 std::optional<Variant> expect_variant) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw CheckpointVersionError("not a recognized checkpoint file: " + path.string());
  }
  const std::uint64_t meta_len = read_u64_le(bytes.data() + 8);
  if (bytes.size() < 16 + meta_len) {
    throw CheckpointTruncatedError("checkpoint metadata block truncated");
  }
  const std::string meta_str(bytes.data() + 16, bytes.data() + 16 + meta_len);
  std::map<std::string, std::string> fields;
  std::istringstream meta(meta_str);
  std::string line;
  while (std::getline(meta, line)) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto need = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw CheckpointError(std::string("checkpoint metadata missing key: ") + key);
    }
    return it->second;
  };

  if (need("format_version") != "1") {
    throw CheckpointVersionError("unsupported checkpoint format version " +
                                 need("format_version"));
  }
  CheckpointHeader header;
  header.format_version = 1;
  header.variant = variant_from_name(need("variant"));
  header.d = std::stoi(need("d"));
  header.k = std::stoi(need("k"));
  header.m = std::stoi(need("m"));
  header.n = std::stoi(need("n"));
  header.num_entities = std::stoi(need("entities"));
  header.num_relations = std::stoi(need("relations"));
  header.seed = std::stoull(need("seed"));
  header.digest = std::stoull(need("vocab_digest"), nullptr, 16);
  if (header.n != header.k / 2) {
    throw CheckpointError("inconsistent checkpoint header: n != floor(k/2)");
  }
  if (expect_variant.has_value() && *expect_variant != header.variant) {
    throw CheckpointVariantError(std::string("checkpoint variant is ") +
                                 variant_name(header.variant) + ", expected " +
                                 variant_name(*expect_variant));
  }

  ModelConfig cfg;
  cfg.variant = header.variant;
  cfg.d = header.d;
  cfg.k = header.k;
  cfg.m = header.m;
  cfg.num_entities = header.num_entities;
  cfg.num_relations = header.num_relations;
  cfg.seed = header.seed;
  cfg.validate();

  LoadedCheckpoint loaded;
  loaded.header = header;
  Model& model = loaded.model;
  model.cfg = cfg;

  const char* p = bytes.data() + 16 + meta_len;
  const char* end = bytes.data() + bytes.size();
  read_doubles_le(p, end, model.entities,
                  std::size_t(cfg.num_entities) * cfg.entity_stride());
  model.rotations.reserve(std::size_t(cfg.num_relations) * cfg.rotation_stride());
  std::vector<double> block;
  const auto append_block = [&](std::vector<double>& dst, std::size_t count) {
    read_doubles_le(p, end, block, count);
    dst.insert(dst.end(), block.begin(), block.end());
  };
  for (int r = 0; r < cfg.num_relations; ++r) {
    append_block(model.rotations, cfg.rotation_stride());
    if (cfg.m > 0) {
      append_block(model.axes_head, cfg.axis_stride());
      append_block(model.taus_head, cfg.tau_stride());
      append_block(model.axes_tail, cfg.axis_stride());
      append_block(model.taus_tail, cfg.tau_stride());
    }
    if (cfg.has_translation()) append_block(model.translations, cfg.entity_stride());
  }
  if (p != end) {
    throw CheckpointTruncatedError(
        "checkpoint payload longer than the header implies (corrupt header?)");
  }
  return loaded;
}

}  // namespace house
