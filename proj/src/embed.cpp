#include "hearthlab/embed.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "hearthlab/errors.hpp"

namespace hearth {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

HashedFeatures::HashedFeatures(int dim) {
  if (dim < 2) throw std::invalid_argument("hashed dimension must be >= 2");
  values_.assign(static_cast<std::size_t>(dim), 0.0);
}

void HashedFeatures::add(std::string_view feature) {
  const std::uint64_t h = fnv1a64(feature);
  const double sign = (h >> 63) ? -1.0 : 1.0;
  values_[h % values_.size()] += sign;
}

void HashedFeatures::add_tokens(const std::vector<std::string>& tokens,
                                std::string_view ns, bool bigrams) {
  std::string buf;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    buf.assign(ns);
    buf += tokens[i];
    add(buf);
    if (bigrams && i + 1 < tokens.size()) {
      buf += '|';
      buf += tokens[i + 1];
      add(buf);
    }
  }
}

Embedding HashedFeatures::normalized() const {
  double sq = 0.0;
  for (double v : values_) sq += v * v;
  Embedding out = values_;
  if (sq == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : out) v *= inv;
  return out;
}

Embedding embed_hashed(const std::vector<std::string>& tokens, int dim,
                       bool bigrams) {
  HashedFeatures features(dim);
  features.add_tokens(tokens, {}, bigrams);
  return features.normalized();
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::size_t SimilarityMatrix::index_of(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw std::out_of_range("no activity '" + std::string(label) +
                            "' in similarity matrix");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

Embedding HashedProvider::embed(const std::string&,
                                const std::string& description) {
  return embed_hashed(tokenize(description), dim_);
}

FileProvider FileProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot open embedding table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

FileProvider FileProvider::from_text(std::string_view text) {
  FileProvider provider;
  std::size_t dim = 0;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ') ++j;
      if (j > i) fields.push_back(line.substr(i, j - i));
      i = j;
    }
    if (fields.size() < 2) {
      throw ProviderError("embedding table line " + std::to_string(line_no) +
                          ": expected a name and at least one value");
    }
    Embedding v;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(fields[k].data(),
                                       fields[k].data() + fields[k].size(), x);
      if (ec != std::errc() || ptr != fields[k].data() + fields[k].size()) {
        throw ProviderError("embedding table line " +
                            std::to_string(line_no) + ": bad number '" +
                            std::string(fields[k]) + "'");
      }
      v.push_back(x);
    }
    if (dim == 0) dim = v.size();
    if (v.size() != dim) {
      throw ProviderError("embedding table line " + std::to_string(line_no) +
                          ": dimension " + std::to_string(v.size()) +
                          " differs from " + std::to_string(dim));
    }
    provider.table_[std::string(fields[0])] = std::move(v);
    if (end == text.size()) break;
  }
  return provider;
}

Embedding FileProvider::embed(const std::string& activity,
                              const std::string&) {
  auto it = table_.find(activity);
  if (it == table_.end()) {
    throw ProviderError("embedding table has no entry for activity '" +
                        activity + "'");
  }
  return it->second;
}

HttpProvider::HttpProvider(std::string base_url)
    : base_url_(std::move(base_url)) {}

Embedding HttpProvider::embed(const std::string& activity,
                              const std::string& description) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  const nlohmann::json body = {{"text", description}};
  auto res = client.Post("/embed", body.dump(), "application/json");
  if (!res) {
    throw ProviderError("embedding request for '" + activity + "' to " +
                        base_url_ + " failed: " +
                        httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderError("embedding request for '" + activity +
                        "' returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("vector").get<Embedding>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError("malformed embedding response for '" + activity +
                        "': " + e.what());
  }
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec,
                                                 int dim) {
  if (spec.empty() || spec == "hashed") {
    return std::make_unique<HashedProvider>(dim);
  }
  if (spec.rfind("file:", 0) == 0) {
    return std::make_unique<FileProvider>(
        FileProvider::from_file(spec.substr(5)));
  }
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0) {
    std::string url = spec.substr(spec.find(':') + 1);
    if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) {
      return std::make_unique<HttpProvider>(url);
    }
    if (url.rfind("//", 0) == 0) {
      return std::make_unique<HttpProvider>(spec);
    }
    return std::make_unique<HttpProvider>("http://" + url);
  }
  throw ProviderError("unknown embedding provider '" + spec +
                      "' (expected hashed, file:<path> or http:<url>)");
}

SimilarityMatrix similarity_matrix(const Descriptions& descriptions,
                                   EmbeddingProvider& provider) {
  if (descriptions.size() < 2) {
    throw std::invalid_argument("similarity matrix needs at least 2 activities");
  }
  SimilarityMatrix m;
  std::vector<Embedding> vectors;
  for (const auto& [name, text] : descriptions) {
    m.labels.push_back(name);
    vectors.push_back(provider.embed(name, text));
  }
  const std::size_t n = m.labels.size();
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool nonzero = std::any_of(vectors[i].begin(), vectors[i].end(),
                                     [](double v) { return v != 0.0; });
    m.values[i * n + i] = nonzero ? 1.0 : 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = cosine(vectors[i], vectors[j]);
      m.values[i * n + j] = c;
      m.values[j * n + i] = c;
    }
  }
  return m;
}

}  // namespace hearth
