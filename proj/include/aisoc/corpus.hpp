#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aisoc/error.hpp"
#include "aisoc/rng.hpp"

namespace aisoc {

enum class Channel { Auth, Process, System };
enum class Label { Benign, Malicious };
enum class Origin { Generated, Loaded, Augmented };

std::string_view to_string(Channel c);
std::string_view to_string(Label l);
std::string_view to_string(Origin o);
std::optional<Channel> parse_channel(std::string_view s);
std::optional<Label> parse_label(std::string_view s);
std::optional<Origin> parse_origin(std::string_view s);

inline int to_binary(Label l) { return l == Label::Malicious ? 1 : 0; }

struct LogRecord {
    std::int64_t timestamp = 0;  // epoch milliseconds
    std::string host;
    Channel channel = Channel::System;
    std::string message;
    std::optional<Label> label;
    Origin origin = Origin::Loaded;

    bool operator==(const LogRecord&) const = default;
};

struct MalwareSample {
    std::string sample_id;
    std::vector<double> features;
    std::optional<Label> label;

    bool operator==(const MalwareSample&) const = default;
};

// ---------------------------------------------------------------------------
// Synthetic telemetry

struct ScenarioConfig {
    std::int64_t benign_hosts = 2;
    std::int64_t attack_sessions = 3;
    std::int64_t duration_s = 600;
    std::uint64_t seed = 7;
    // Mean gap between benign events on one host.
    double benign_interval_s = 4.0;
    std::int64_t start_ms = 1'700'000'000'000;
};

// Number of records in one attack session.
inline constexpr std::size_t kAttackSessionSteps = 8;

/// Benign traffic from a fixed template grammar interleaved with reverse-shell
/// sessions. Each session is a contiguous run of kAttackSessionSteps MALICIOUS
/// records (inbound connection, shell spawn, recon, C&C beacon) and is
/// followed by at least one BENIGN record, so the number of maximal MALICIOUS
/// runs in the output equals attack_sessions.
std::vector<LogRecord> generate_corpus(const ScenarioConfig& scenario);

struct MalwareScenarioConfig {
    std::size_t samples = 600;
    double malicious_fraction = 0.5;
    std::uint64_t seed = 7;
    // Fraction of samples drawn from the opposite class's distribution; 0 keeps
    // the classes well separated.
    double overlap = 0.0;
};

// Static-feature table of the same shape as common PE-header datasets.
std::vector<MalwareSample> generate_malware(const MalwareScenarioConfig& config);
const std::vector<std::string>& malware_feature_names();

// ---------------------------------------------------------------------------
// De-duplication

// Lowercased alphanumeric token set used for near-duplicate detection.
std::vector<std::string> dedup_tokens(std::string_view message);
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

inline constexpr double kDefaultDedupThreshold = 0.9;

/// Keeps the earliest record of every near-duplicate group. Records are
/// near-duplicates when their token-set Jaccard similarity is >= threshold and
/// their labels match. Output is in time order.
std::vector<LogRecord> dedup_near_identical(std::vector<LogRecord> records,
                                            double threshold = kDefaultDedupThreshold);

// ---------------------------------------------------------------------------
// Splits

enum class SplitKind { TimeOrdered, StratifiedRandom, KFold };

struct SplitSpec {
    SplitKind kind = SplitKind::TimeOrdered;
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
};

// Index partitions into the input sequence. For KFold, `folds` holds the fold
// index sets and train/validation/test are empty.
struct IndexSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    std::vector<std::vector<std::size_t>> folds;
};

template <typename T>
struct DatasetSplit {
    std::vector<T> train;
    std::vector<T> validation;
    std::vector<T> test;
    std::vector<std::vector<T>> folds;
};

// `strata` holds one class key per item (-1 for unlabeled); `timestamps` is
// required for TimeOrdered and ignored otherwise.
IndexSplit split_indices(const std::vector<int>& strata,
                         const std::vector<std::int64_t>* timestamps,
                         const SplitSpec& spec);

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& strata,
                                                       std::size_t folds, std::uint64_t seed);

int stratum_of(const std::optional<Label>& label);

DatasetSplit<LogRecord> split(const std::vector<LogRecord>& records, const SplitSpec& spec);
DatasetSplit<MalwareSample> split(const std::vector<MalwareSample>& samples,
                                  const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Augmentation

enum class AugmentOp { KeywordObfuscation, CharNoise, SynonymReplacement };

std::string_view to_string(AugmentOp op);
std::optional<AugmentOp> parse_augment_op(std::string_view s);

struct AugmentTables {
    std::string obfuscation_version;
    std::string synonym_version;
    // keyword -> replacement spellings
    std::vector<std::pair<std::string, std::vector<std::string>>> obfuscations;
    // word -> synonyms
    std::vector<std::pair<std::string, std::vector<std::string>>> synonyms;

    // Tables shipped under data/augment, compiled into the library.
    static const AugmentTables& builtin();
    static AugmentTables from_json(std::string_view obfuscation_json,
                                   std::string_view synonym_json);
    static AugmentTables from_files(const std::filesystem::path& obfuscation_file,
                                    const std::filesystem::path& synonym_file);
};

inline constexpr double kMaxCharNoiseRate = 0.15;

struct AugmentConfig {
    std::set<AugmentOp> ops;
    double rate = 0.5;            // per-record selection probability
    double char_noise_rate = kMaxCharNoiseRate;  // edit budget as a fraction of length
    double synonym_rate = 0.5;    // per-eligible-word replacement probability
    bool replace = false;         // emit variants in place of originals
    std::uint64_t seed = 0;
    const AugmentTables* tables = nullptr;  // builtin() when null
};

std::vector<LogRecord> augment(const std::vector<LogRecord>& records, const AugmentConfig& config);

// Individual mutation operators, exposed for probing and tests.
std::string obfuscate_keywords(std::string_view message, const AugmentTables& tables, Rng& rng);
std::string char_noise(std::string_view message, double edit_rate, Rng& rng);
std::string replace_synonyms(std::string_view message, const AugmentTables& tables, double rate,
                             Rng& rng);

// UTF-8 helpers shared by the augmenter and edit-distance checks.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// ---------------------------------------------------------------------------
// Loading and writing

struct LoadIssue {
    std::size_t line = 0;
    std::string reason;
};

struct LogLoadResult {
    std::vector<LogRecord> records;
    std::size_t skipped = 0;
    std::vector<LoadIssue> issues;
};

LogLoadResult parse_log_ndjson(std::istream& in);
LogLoadResult load_log_ndjson(const std::filesystem::path& path);
std::string log_record_to_json_line(const LogRecord& record);
void write_log_ndjson(std::ostream& out, const std::vector<LogRecord>& records);
void write_log_ndjson(const std::filesystem::path& path, const std::vector<LogRecord>& records);

struct MalwareLoadResult {
    std::vector<MalwareSample> samples;
    std::vector<std::string> feature_names;
    std::size_t rejected = 0;
    std::vector<LoadIssue> issues;
};

MalwareLoadResult parse_malware_csv(std::istream& in, const std::string& label_column,
                                    const std::optional<std::string>& id_column = std::nullopt);
MalwareLoadResult load_malware_csv(const std::filesystem::path& path,
                                   const std::string& label_column,
                                   const std::optional<std::string>& id_column = std::nullopt);
void write_malware_csv(std::ostream& out, const std::vector<MalwareSample>& samples,
                       const std::vector<std::string>& feature_names);
void write_malware_csv(const std::filesystem::path& path, const std::vector<MalwareSample>& samples,
                       const std::vector<std::string>& feature_names);

// RFC-4180 record splitter; returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no);

}  // namespace aisoc
