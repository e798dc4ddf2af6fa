#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aisoc/calibrate.hpp"
#include "aisoc/features.hpp"
#include "aisoc/fusion.hpp"
#include "aisoc/learn.hpp"

namespace aisoc {

// Container: "AISOCART" | u32 LE container version | u64 LE payload length |
// 32-byte SHA-256 of payload | CBOR payload.
inline constexpr std::string_view kArtifactMagic = "AISOCART";
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::string_view kArtifactFormatVersion = "1.0";

enum class ArtifactStatus { Serving, Partial };
std::string_view to_string(ArtifactStatus s);

struct ModelArtifact {
    std::string format_version{kArtifactFormatVersion};
    std::int64_t created_at = 0;  // ms since epoch, supplied by the caller (never the wall clock)
    std::string version;          // empty: derived from the payload checksum
    std::optional<Vocabulary> vocabulary;
    std::optional<StandardizerParams> standardizer;
    std::optional<LogisticModel> logistic;
    std::optional<ForestModel> forest;
    std::optional<Calibrator> log_calibrator;
    std::optional<Calibrator> malware_calibrator;
    std::optional<FusionConfig> fusion;
    std::map<std::string, std::string> fingerprints;  // data hashes, seeds

    std::vector<std::string> missing_components() const;
    ArtifactStatus status() const { return missing_components().empty() ? ArtifactStatus::Serving : ArtifactStatus::Partial; }
    bool operator==(const ModelArtifact&) const = default;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);

nlohmann::json artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const nlohmann::json& j);

std::vector<std::uint8_t> encode_artifact(const ModelArtifact& artifact);
ModelArtifact decode_artifact(const std::vector<std::uint8_t>& bytes);

/// Writes the container and returns the payload checksum (hex). A SERVING
/// save refuses incomplete artifacts, naming the first missing component.
std::string save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path,
                          ArtifactStatus required = ArtifactStatus::Serving);
ModelArtifact load_artifact(const std::filesystem::path& path);

// `version` when set, else "sha256:" + the first 16 hex digits of the payload checksum.
std::string artifact_version(const ModelArtifact& artifact);

// ---------------------------------------------------------------------------
// Scoring

enum class Modality { Fused, LogsOnly, MalwareOnly };
std::string_view to_string(Modality m);

struct ScoreRequest {
    std::optional<std::string> entity_id;
    std::optional<std::string> log_message;
    std::optional<DenseVector> malware_features;
};

struct ScoreResponse {
    std::optional<std::string> entity_id;
    std::optional<double> s_m;
    std::optional<double> s_l;
    TriageLabel label = TriageLabel::Normal;
    Modality modality = Modality::Fused;
    std::string artifact_version;
};

// Unknown fields are ignored; wrong types, non-finite features and requests
// carrying neither modality throw RequestError.
ScoreRequest parse_score_request(const nlohmann::json& j);
nlohmann::json score_response_to_json(const ScoreResponse& r);

/// Immutable scoring view of a SERVING artifact; safe to share across threads.
class Scorer {
public:
    explicit Scorer(ModelArtifact artifact);

    double raw_log_score(std::string_view message) const;
    double log_score(std::string_view message) const;
    double raw_malware_score(const DenseVector& features) const;
    double malware_score(const DenseVector& features) const;

    // A missing modality is scored 0.0 for fusion and omitted from the response.
    ScoreResponse score(const ScoreRequest& request) const;

    const ModelArtifact& artifact() const { return artifact_; }
    const FusionConfig& fusion() const { return *artifact_.fusion; }
    const std::string& version() const { return version_; }
    std::size_t malware_dimension() const { return artifact_.forest->dimension; }

private:
    ModelArtifact artifact_;
    std::string version_;
};

nlohmann::json model_info(const Scorer& scorer);

// One output line per input line (blank lines included), errors in place.
std::string score_line(const Scorer& scorer, std::string_view line);
void score_batch(const Scorer& scorer, std::istream& in, std::ostream& out);

}  // namespace aisoc
