#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aisoc/corpus.hpp"

namespace aisoc {

// Sparse vector with strictly increasing indices and finite, nonzero values.
struct SparseVector {
    std::size_t dimension = 0;
    std::vector<std::size_t> indices;
    std::vector<double> values;

    double norm() const;
    double dot(const std::vector<double>& dense) const;
    bool operator==(const SparseVector&) const = default;
};

using DenseVector = std::vector<double>;

/// Lowercases, splits on whitespace and punctuation, and keeps '.', '/', '-'
/// and ':' inside tokens so IPs, paths and flags stay atomic. Tokens shorter
/// than two characters are dropped and integers longer than four digits map
/// to "<num>".
std::vector<std::string> tokenize(std::string_view message);

struct VocabularyConfig {
    std::size_t min_df = 2;
    std::optional<std::size_t> max_features = 20000;
};

class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> terms, std::vector<double> idf, std::size_t document_count,
               VocabularyConfig config);

    std::size_t size() const { return terms_.size(); }
    std::optional<std::size_t> index_of(std::string_view term) const;
    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<double>& idf() const { return idf_; }
    std::size_t document_count() const { return document_count_; }
    const VocabularyConfig& config() const { return config_; }

    bool operator==(const Vocabulary& o) const {
        return terms_ == o.terms_ && idf_ == o.idf_ && document_count_ == o.document_count_ &&
               config_.min_df == o.config_.min_df && config_.max_features == o.config_.max_features;
    }

private:
    std::vector<std::string> terms_;  // index order (lexicographic)
    std::vector<double> idf_;
    std::size_t document_count_ = 0;
    VocabularyConfig config_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

// Smoothed IDF: ln((1 + N) / (1 + df)) + 1.
double smoothed_idf(std::size_t document_count, std::size_t document_frequency);

Vocabulary fit_vocabulary(const std::vector<std::string>& documents, const VocabularyConfig& config = {});
Vocabulary fit_vocabulary(const std::vector<LogRecord>& corpus, const VocabularyConfig& config = {});

// Raw term count x idf, L2-normalized; all-OOV messages yield the zero vector.
SparseVector transform_text(std::string_view message, const Vocabulary& vocab);

struct StandardizerParams {
    std::vector<double> mean;
    std::vector<double> stddev;  // population standard deviation
    std::vector<bool> zero_variance;

    std::size_t dimension() const { return mean.size(); }
    bool operator==(const StandardizerParams&) const = default;
};

StandardizerParams fit_standardizer(const std::vector<MalwareSample>& samples);
StandardizerParams fit_standardizer(const std::vector<DenseVector>& rows);
DenseVector transform_dense(const DenseVector& x, const StandardizerParams& params);
DenseVector transform_dense(const MalwareSample& sample, const StandardizerParams& params);

}  // namespace aisoc
