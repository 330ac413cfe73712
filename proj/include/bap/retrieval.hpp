#pragma once

// In-context example retrieval: embed training instructions once, then pick
// the k most similar to a test instruction by cosine similarity.

#include <bap/corpus.hpp>
#include <bap/util.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bap {

using Embedding = std::vector<double>;

// Contract: embed() is deterministic for a given (name(), text) and returns
// dimension() components.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
};

inline void normalize(Embedding& v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0)
    for (double& x : v) x /= n;
}

inline double dot(const Embedding& a, const Embedding& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

// Embeds and L2-normalizes, so dot products are cosine similarities.
inline Embedding embed(const EmbeddingProvider& provider, std::string_view text) {
  Embedding v = provider.embed(text);
  if (v.size() != provider.dimension())
    throw ProviderError(ProviderErrorKind::malformed_response,
                        provider.name() + " returned " + std::to_string(v.size()) + " components, expected " +
                            std::to_string(provider.dimension()));
  normalize(v);
  return v;
}

// Offline provider: hashed character trigram counts of the lowercased text
// padded with one space on each side.
class LexicalEmbedding final : public EmbeddingProvider {
 public:
  explicit LexicalEmbedding(std::size_t dimension = 4096) : dim_(dimension) {}

  std::string name() const override { return "lexical-char3-" + std::to_string(dim_); }
  std::size_t dimension() const override { return dim_; }

  Embedding embed(std::string_view text) const override {
    Embedding v(dim_, 0.0);
    std::string padded = " " + to_lower_ascii(text) + " ";
    if (padded.size() < 3) {
      v[fnv1a64(padded) % dim_] += 1.0;
    } else {
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
        v[fnv1a64(std::string_view(padded).substr(i, 3)) % dim_] += 1.0;
    }
    normalize(v);
    return v;
  }

 private:
  std::size_t dim_;
};

// Wraps a provider with an on-disk cache keyed by (provider name, text hash).
class CachedEmbedding final : public EmbeddingProvider {
 public:
  CachedEmbedding(std::shared_ptr<const EmbeddingProvider> inner, std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {}

  std::string name() const override { return inner_->name(); }
  std::size_t dimension() const override { return inner_->dimension(); }

  Embedding embed(std::string_view text) const override {
    std::string key = sha256_hex(inner_->name() + '\0' + std::string(text));
    auto path = dir_ / key.substr(0, 2) / (key + ".f64");
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
      std::string bytes = read_file(path);
      if (bytes.size() == dimension() * sizeof(double)) {
        Embedding v(dimension());
        std::memcpy(v.data(), bytes.data(), bytes.size());
        hits_.fetch_add(1);
        return v;
      }
    }
    Embedding v = inner_->embed(text);
    if (v.size() == dimension())
      write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)));
    return v;
  }

  std::size_t hits() const { return hits_.load(); }

 private:
  std::shared_ptr<const EmbeddingProvider> inner_;
  std::filesystem::path dir_;
  mutable std::atomic<std::size_t> hits_{0};
};

struct IndexEntry {
  TurnPair pair;
  Embedding vector;
};

struct ExampleIndex {
  std::string provider_name;
  std::size_t dimension = 0;
  std::vector<IndexEntry> entries;

  std::size_t size() const { return entries.size(); }
};

// Embeds every pair's instruction. Up to `parallelism` provider calls run at once.
inline ExampleIndex build_index(const EmbeddingProvider& provider, const std::vector<TurnPair>& pairs,
                                std::size_t parallelism = 1) {
  ExampleIndex index{provider.name(), provider.dimension(), {}};
  index.entries.resize(pairs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        index.entries[i] = {pairs[i], embed(provider, pairs[i].instruction)};
      } catch (...) {
        std::lock_guard lk(failure_mu);
        if (!failure) failure = std::current_exception();
        next = pairs.size();
      }
    }
  };
  parallelism = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, pairs.size()));
  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < parallelism; ++t) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return index;
}

struct Retrieved {
  const TurnPair* pair = nullptr;
  double similarity = 0.0;
};

// The k entries most similar to `query`, similarity descending, ties by
// (game_id, turn_index) ascending.
inline std::vector<Retrieved> top_k(const ExampleIndex& index, const Embedding& query, std::size_t k) {
  std::vector<Retrieved> all;
  all.reserve(index.entries.size());
  for (const auto& e : index.entries) all.push_back({&e.pair, dot(e.vector, query)});
  k = std::min(k, all.size());
  auto better = [](const Retrieved& a, const Retrieved& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.pair->game_id != b.pair->game_id) return a.pair->game_id < b.pair->game_id;
    return a.pair->turn_index < b.pair->turn_index;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

inline std::vector<Retrieved> top_k(const ExampleIndex& index, const EmbeddingProvider& provider,
                                    std::string_view instruction, std::size_t k) {
  if (k == 0 || index.entries.empty()) return {};
  if (provider.name() != index.provider_name)
    throw ConfigError("index built with '" + index.provider_name + "', queried with '" + provider.name() + "'");
  return top_k(index, embed(provider, instruction), k);
}

// --- persistence -----------------------------------------------------------
//
// Little-endian layout:
//   "BAPIDX01"                      8 bytes magic
//   u32 name_len, name bytes        provider name
//   u32 dimension
//   u64 count
//   count x entry:
//     u32 len, game_id bytes
//     u64 turn_index
//     u32 len, instruction bytes
//     u32 n_actions, n x (u8 kind, u8 color, i32 x, i32 y, i32 z)
//     dimension x f64 vector components
//   32 bytes SHA-256 of everything above

namespace detail {

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out_.append(reinterpret_cast<const char*>(b), sizeof(T));
  }
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view s) : s_(s) {}
  template <class T>
  T get() {
    need(sizeof(T));
    unsigned char b[sizeof(T)];
    std::memcpy(b, s_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::string get_string() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string r(s_.substr(pos_, n));
    pos_ += n;
    return r;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw Error("index file truncated");
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline constexpr std::string_view kIndexMagic = "BAPIDX01";

}  // namespace detail

inline std::string serialize_index(const ExampleIndex& index) {
  detail::ByteWriter w;
  w.bytes().append(detail::kIndexMagic);
  w.put_string(index.provider_name);
  w.put(static_cast<std::uint32_t>(index.dimension));
  w.put(static_cast<std::uint64_t>(index.entries.size()));
  for (const auto& e : index.entries) {
    w.put_string(e.pair.game_id);
    w.put(static_cast<std::uint64_t>(e.pair.turn_index));
    w.put_string(e.pair.instruction);
    w.put(static_cast<std::uint32_t>(e.pair.gold_actions.size()));
    for (const auto& a : e.pair.gold_actions) {
      w.put(static_cast<std::uint8_t>(a.kind));
      w.put(static_cast<std::uint8_t>(a.color));
      w.put(static_cast<std::int32_t>(a.x));
      w.put(static_cast<std::int32_t>(a.y));
      w.put(static_cast<std::int32_t>(a.z));
    }
    for (double v : e.vector) w.put(v);
  }
  auto digest = sha256(w.bytes());
  w.bytes().append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return std::move(w.bytes());
}

// world_before is not persisted; loaded pairs carry an empty world.
inline ExampleIndex deserialize_index(std::string_view bytes) {
  if (bytes.size() < detail::kIndexMagic.size() + 32 || bytes.substr(0, detail::kIndexMagic.size()) != detail::kIndexMagic)
    throw Error("not an index file");
  std::string_view body = bytes.substr(0, bytes.size() - 32);
  auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), 32) != 0) throw Error("index checksum mismatch");

  detail::ByteReader r(body.substr(detail::kIndexMagic.size()));
  ExampleIndex index;
  index.provider_name = r.get_string();
  index.dimension = r.get<std::uint32_t>();
  auto count = r.get<std::uint64_t>();
  index.entries.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    IndexEntry e;
    e.pair.game_id = r.get_string();
    e.pair.turn_index = static_cast<std::size_t>(r.get<std::uint64_t>());
    e.pair.instruction = r.get_string();
    auto n = r.get<std::uint32_t>();
    for (std::uint32_t j = 0; j < n; ++j) {
      Action a;
      auto kind = r.get<std::uint8_t>();
      auto color = r.get<std::uint8_t>();
      if (kind > 1 || color >= kColorCount) throw Error("index file: bad action encoding");
      a.kind = static_cast<ActionKind>(kind);
      a.color = static_cast<Color>(color);
      a.x = r.get<std::int32_t>();
      a.y = r.get<std::int32_t>();
      a.z = r.get<std::int32_t>();
      e.pair.gold_actions.push_back(a);
    }
    e.vector.resize(index.dimension);
    for (auto& v : e.vector) v = r.get<double>();
    index.entries.push_back(std::move(e));
  }
  if (r.pos() + detail::kIndexMagic.size() != body.size()) throw Error("index file: trailing bytes");
  return index;
}

inline void save_index(const ExampleIndex& index, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_index(index));
}

inline ExampleIndex load_index(const std::filesystem::path& path) { return deserialize_index(read_file(path)); }

}  // namespace bap
