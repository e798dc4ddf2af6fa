#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "aisoc/features.hpp"

namespace aisoc {

double SparseVector::norm() const {
    double s = 0.0;
    for (const double v : values) s += v * v;
    return std::sqrt(s);
}

double SparseVector::dot(const std::vector<double>& dense) const {
    double s = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * dense[indices[k]];
    return s;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

bool is_unicode_space(char32_t c) {
    return c == 0x85 || c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
           c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_unicode_punct(char32_t c) {
    return (c >= 0xA1 && c <= 0xBF && c != 0xAA && c != 0xB5 && c != 0xBA) || c == 0xD7 || c == 0xF7 ||
           (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
           (c >= 0xFF01 && c <= 0xFF0F);
}

bool is_inner(char32_t c) { return c == U'.' || c == U'/' || c == U'-' || c == U':'; }

bool is_separator(char32_t c) {
    if (c < 0x80) {
        if (std::isalnum(static_cast<int>(c))) return false;
        return !is_inner(c);  // ASCII whitespace, controls and other punctuation
    }
    return is_unicode_space(c) || is_unicode_punct(c);
}

bool has_alnum(std::u32string_view t) {
    return std::any_of(t.begin(), t.end(),
                       [](char32_t c) { return c >= 0x80 || std::isalnum(static_cast<int>(c)); });
}

void emit(std::u32string& cur, std::vector<std::string>& out) {
    // '.' and ':' only survive inside a token; trailing '/' and '-' are kept.
    std::size_t b = 0, e = cur.size();
    while (b < e && (cur[b] == U'.' || cur[b] == U':')) ++b;
    while (e > b && (cur[e - 1] == U'.' || cur[e - 1] == U':')) --e;
    std::u32string_view tok(cur.data() + b, e - b);
    if (tok.size() >= 2 && has_alnum(tok)) {
        const bool numeric = std::all_of(tok.begin(), tok.end(), [](char32_t c) { return c >= U'0' && c <= U'9'; });
        out.push_back(numeric && tok.size() > 4 ? std::string("<num>") : encode_utf8(tok));
    }
    cur.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view message) {
    std::vector<std::string> out;
    std::u32string cur;
    for (char32_t c : decode_utf8(message)) {
        if (is_separator(c)) {
            emit(cur, out);
            continue;
        }
        if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
        cur.push_back(c);
    }
    emit(cur, out);
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<double> idf, std::size_t document_count,
                       VocabularyConfig config)
    : terms_(std::move(terms)), idf_(std::move(idf)), document_count_(document_count), config_(config) {
    if (terms_.size() != idf_.size()) throw FitError("vocabulary terms and idf differ in length");
    lookup_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!lookup_.emplace(terms_[i], i).second) throw FitError("duplicate vocabulary term '" + terms_[i] + "'");
    }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view term) const {
    const auto it = lookup_.find(std::string(term));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

double smoothed_idf(std::size_t n, std::size_t df) {
    return std::log((1.0 + static_cast<double>(n)) / (1.0 + static_cast<double>(df))) + 1.0;
}

Vocabulary fit_vocabulary(const std::vector<std::string>& documents, const VocabularyConfig& config) {
    if (documents.empty()) throw FitError("cannot fit a vocabulary on an empty corpus");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : documents) {
        auto tokens = tokenize(doc);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) ++df[std::move(t)];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [term, count] : df) {
        if (count >= config.min_df) kept.emplace_back(term, count);
    }
    if (config.max_features && kept.size() > *config.max_features) {
        // Highest document frequency first, lexicographic tie-break.
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        kept.resize(*config.max_features);
        std::sort(kept.begin(), kept.end());
    }
    if (kept.empty()) throw FitError("vocabulary is empty after min_df/max_features filtering");

    std::vector<std::string> terms;
    std::vector<double> idf;
    for (auto& [term, count] : kept) {
        terms.push_back(term);
        idf.push_back(smoothed_idf(documents.size(), count));
    }
    return Vocabulary(std::move(terms), std::move(idf), documents.size(), config);
}

Vocabulary fit_vocabulary(const std::vector<LogRecord>& corpus, const VocabularyConfig& config) {
    std::vector<std::string> docs;
    docs.reserve(corpus.size());
    for (const auto& r : corpus) docs.push_back(r.message);
    return fit_vocabulary(docs, config);
}

SparseVector transform_text(std::string_view message, const Vocabulary& vocab) {
    std::map<std::size_t, double> counts;
    for (const auto& t : tokenize(message)) {
        if (const auto idx = vocab.index_of(t)) counts[*idx] += 1.0;
    }
    SparseVector v;
    v.dimension = vocab.size();
    double sq = 0.0;
    for (const auto& [idx, count] : counts) {
        const double w = count * vocab.idf()[idx];
        v.indices.push_back(idx);
        v.values.push_back(w);
        sq += w * w;
    }
    if (sq > 0.0) {
        const double n = std::sqrt(sq);
        for (auto& x : v.values) x /= n;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Standardizer

StandardizerParams fit_standardizer(const std::vector<DenseVector>& rows) {
    if (rows.empty()) throw FitError("cannot fit a standardizer on an empty set");
    const std::size_t d = rows.front().size();
    StandardizerParams p;
    p.mean.assign(d, 0.0);
    p.stddev.assign(d, 0.0);
    p.zero_variance.assign(d, false);
    for (const auto& r : rows) {
        if (r.size() != d) throw DimensionError("inconsistent feature dimension in standardizer input");
        for (std::size_t j = 0; j < d; ++j) p.mean[j] += r[j];
    }
    const auto n = static_cast<double>(rows.size());
    for (auto& m : p.mean) m /= n;
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = r[j] - p.mean[j];
            p.stddev[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const bool constant = std::all_of(rows.begin(), rows.end(),
                                          [&](const DenseVector& r) { return r[j] == rows.front()[j]; });
        p.stddev[j] = constant ? 0.0 : std::sqrt(p.stddev[j] / n);
        p.zero_variance[j] = constant;
    }
    return p;
}

StandardizerParams fit_standardizer(const std::vector<MalwareSample>& samples) {
    std::vector<DenseVector> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(s.features);
    return fit_standardizer(rows);
}

DenseVector transform_dense(const DenseVector& x, const StandardizerParams& params) {
    if (x.size() != params.dimension()) {
        throw DimensionError("expected " + std::to_string(params.dimension()) + " features, got " +
                             std::to_string(x.size()));
    }
    DenseVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = params.zero_variance[j] ? 0.0 : (x[j] - params.mean[j]) / params.stddev[j];
    }
    return out;
}

DenseVector transform_dense(const MalwareSample& sample, const StandardizerParams& params) {
    return transform_dense(sample.features, params);
}

}  // namespace aisoc
