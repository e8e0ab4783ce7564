#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "casebook/error.hpp"
#include "casebook/text.hpp"

namespace casebook {

enum class Metric { Jaccard, Cosine, SoftCosine };

constexpr std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::Jaccard: return "jaccard";
    case Metric::Cosine: return "cosine";
    case Metric::SoftCosine: return "softcosine";
  }
  return "jaccard";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "jaccard") return Metric::Jaccard;
  if (s == "cosine") return Metric::Cosine;
  if (s == "softcosine") return Metric::SoftCosine;
  throw Error(Errc::InvalidConfig, "unknown similarity metric '" + std::string(s) + "'");
}

constexpr bool needs_embeddings(Metric m) noexcept { return m != Metric::Jaccard; }

/// A finite similarity value tagged with the metric that produced it.
class SimilarityScore {
 public:
  SimilarityScore(double value, Metric metric) : value_(value), metric_(metric) {
    if (!std::isfinite(value)) throw Error(Errc::InvalidArgument, "non-finite similarity");
    double lo = metric == Metric::Jaccard ? 0.0 : -1.0;
    if (value < lo || value > 1.0) throw Error(Errc::InvalidArgument, "similarity out of range");
  }

  double value() const noexcept { return value_; }
  Metric metric() const noexcept { return metric_; }

  friend bool operator==(const SimilarityScore&, const SimilarityScore&) = default;

 private:
  double value_;
  Metric metric_;
};

namespace detail {

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace detail

inline SimilarityScore cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(Errc::DimensionMismatch,
                "cosine of vectors of size " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine of a zero vector");
  return {detail::clamp_unit(dot / (std::sqrt(na) * std::sqrt(nb))), Metric::Cosine};
}

inline SimilarityScore cosine(const DocumentVector& a, const DocumentVector& b) { return cosine(a.values, b.values); }

/// |A ∩ B| / |A ∪ B| over the distinct token sets.
inline SimilarityScore jaccard(const TokenizedText& a, const TokenizedText& b) {
  if (a.token_set.empty() || b.token_set.empty()) throw Error(Errc::EmptySet, "jaccard of an empty token set");
  std::size_t common = 0;
  auto ia = a.token_set.begin();
  auto ib = b.token_set.begin();
  while (ia != a.token_set.end() && ib != b.token_set.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  auto total = a.token_set.size() + b.token_set.size() - common;
  return {static_cast<double>(common) / static_cast<double>(total), Metric::Jaccard};
}

/// Symmetric N×N feature similarity matrix with a unit diagonal and entries
/// in [0, 1]. Row-major.
class FeatureSimilarityMatrix {
 public:
  FeatureSimilarityMatrix(std::vector<std::string> features, std::vector<double> entries)
      : features_(std::move(features)), entries_(std::move(entries)) {
    auto n = features_.size();
    if (entries_.size() != n * n) throw Error(Errc::InvalidArgument, "matrix entries do not match feature count");
    for (std::size_t i = 0; i < n; ++i) {
      if (at(i, i) != 1.0) throw Error(Errc::InvalidArgument, "diagonal entry is not 1");
      for (std::size_t j = 0; j < n; ++j) {
        double v = at(i, j);
        if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::InvalidArgument, "entry outside [0, 1]");
        if (v != at(j, i)) throw Error(Errc::InvalidArgument, "matrix is not symmetric");
      }
    }
  }

  static FeatureSimilarityMatrix identity(std::vector<std::string> features) {
    auto n = features.size();
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
    return {std::move(features), std::move(e)};
  }

  std::size_t dim() const noexcept { return features_.size(); }
  const std::vector<std::string>& features() const noexcept { return features_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * features_.size() + j]; }

 private:
  std::vector<std::string> features_;
  std::vector<double> entries_;
};

/// Feature index is the sorted union of both token sets. Off-diagonal
/// entries are embedding cosines clamped at 0; pairs involving an OOV token
/// (or a zero embedding) get 0.
inline FeatureSimilarityMatrix build_feature_matrix(const TokenizedText& a, const TokenizedText& b,
                                                    const EmbeddingTable& table) {
  std::vector<std::string> features;
  std::set_union(a.token_set.begin(), a.token_set.end(), b.token_set.begin(), b.token_set.end(),
                 std::back_inserter(features));
  auto n = features.size();
  std::vector<std::span<const double>> rows(n);
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto r = table.find(features[i])) {
      rows[i] = *r;
      norms[i] = *table.norm(features[i]);
    }
  }
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    e[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        double dot = 0.0;
        for (std::size_t d = 0; d < rows[i].size(); ++d) dot += rows[i][d] * rows[j][d];
        s = std::clamp(dot / (norms[i] * norms[j]), 0.0, 1.0);
      }
      e[i * n + j] = s;
      e[j * n + i] = s;
    }
  }
  return {std::move(features), std::move(e)};
}

/// Raw term frequencies of `text` over the matrix's feature index.
inline std::vector<double> feature_counts(const TokenizedText& text, const FeatureSimilarityMatrix& s) {
  const auto& f = s.features();
  std::vector<double> counts(f.size(), 0.0);
  for (const auto& tok : text.tokens) {
    auto it = std::lower_bound(f.begin(), f.end(), tok);
    if (it != f.end() && *it == tok) counts[static_cast<std::size_t>(it - f.begin())] += 1.0;
  }
  return counts;
}

/// aᵀSb / (sqrt(aᵀSa) · sqrt(bᵀSb)).
inline SimilarityScore soft_cosine(std::span<const double> a, std::span<const double> b,
                                   const FeatureSimilarityMatrix& s) {
  auto n = s.dim();
  if (a.size() != n || b.size() != n) throw Error(Errc::DimensionMismatch, "count vector does not match matrix");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sij = s.at(i, j);
      if (sij == 0.0) continue;
      ab += sij * a[i] * b[j];
      aa += sij * a[i] * a[j];
      bb += sij * b[i] * b[j];
    }
  }
  if (!(aa > 0.0) || !(bb > 0.0)) throw Error(Errc::ZeroNorm, "soft cosine with a zero norm");
  return {detail::clamp_unit(ab / (std::sqrt(aa) * std::sqrt(bb))), Metric::SoftCosine};
}

inline SimilarityScore soft_cosine(const TokenizedText& a, const TokenizedText& b, const EmbeddingTable& table) {
  auto s = build_feature_matrix(a, b, table);
  return soft_cosine(feature_counts(a, s), feature_counts(b, s), s);
}

}  // namespace casebook
