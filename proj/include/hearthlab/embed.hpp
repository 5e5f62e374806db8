#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hearth {

// Lowercase alphabetic runs; digits, underscores and punctuation separate.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

using Embedding = std::vector<double>;

// Signed feature hashing into `dim` buckets. Bit 63 of the FNV-1a hash
// chooses the sign (set -> -1), hash mod dim the bucket.
class HashedFeatures {
 public:
  explicit HashedFeatures(int dim);

  void add(std::string_view feature);
  // Unigrams and adjacent bigrams ("a|b"), each prefixed with `ns`.
  void add_tokens(const std::vector<std::string>& tokens,
                  std::string_view ns = {}, bool bigrams = true);
  // L2-normalized copy; the zero vector stays zero.
  Embedding normalized() const;

 private:
  std::vector<double> values_;
};

Embedding embed_hashed(const std::vector<std::string>& tokens, int dim,
                       bool bigrams = true);

// Zero when either vector is zero. Throws on dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

struct SimilarityMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major, labels.size() squared

  std::size_t size() const { return labels.size(); }
  double at(std::size_t row, std::size_t col) const {
    return values[row * labels.size() + col];
  }
  std::size_t index_of(std::string_view label) const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(const std::string& activity,
                          const std::string& description) = 0;
};

class HashedProvider : public EmbeddingProvider {
 public:
  explicit HashedProvider(int dim = 256) : dim_(dim) {}
  Embedding embed(const std::string& activity,
                  const std::string& description) override;

 private:
  int dim_;
};

// Table of precomputed vectors, one `<name> <v1> ... <vD>` record per line.
class FileProvider : public EmbeddingProvider {
 public:
  static FileProvider from_file(const std::string& path);
  static FileProvider from_text(std::string_view text);

  Embedding embed(const std::string& activity,
                  const std::string& description) override;
  const std::map<std::string, Embedding>& table() const { return table_; }

 private:
  std::map<std::string, Embedding> table_;
};

// POST /embed {"text": ...} -> {"vector": [...]}.
class HttpProvider : public EmbeddingProvider {
 public:
  explicit HttpProvider(std::string base_url);
  Embedding embed(const std::string& activity,
                  const std::string& description) override;

 private:
  std::string base_url_;
};

// "hashed", "file:<path>", "http:<url>".
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec,
                                                 int dim = 256);

using Descriptions = std::vector<std::pair<std::string, std::string>>;

SimilarityMatrix similarity_matrix(const Descriptions& descriptions,
                                   EmbeddingProvider& provider);

}  // namespace hearth
