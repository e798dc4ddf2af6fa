#include <cmath>
#include <numbers>

#include "aisoc/corpus.hpp"
#include "aisoc/rng.hpp"

namespace aisoc {

double Rng::normal(double mean, double stddev) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::Auth: return "AUTH";
        case Channel::Process: return "PROCESS";
        case Channel::System: return "SYSTEM";
    }
    return "SYSTEM";
}

std::string_view to_string(Label l) { return l == Label::Malicious ? "MALICIOUS" : "BENIGN"; }

std::string_view to_string(Origin o) {
    switch (o) {
        case Origin::Generated: return "GENERATED";
        case Origin::Loaded: return "LOADED";
        case Origin::Augmented: return "AUGMENTED";
    }
    return "LOADED";
}

std::optional<Channel> parse_channel(std::string_view s) {
    if (s == "AUTH") return Channel::Auth;
    if (s == "PROCESS") return Channel::Process;
    if (s == "SYSTEM") return Channel::System;
    return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
    if (s == "BENIGN" || s == "0") return Label::Benign;
    if (s == "MALICIOUS" || s == "1") return Label::Malicious;
    return std::nullopt;
}

std::optional<Origin> parse_origin(std::string_view s) {
    if (s == "GENERATED") return Origin::Generated;
    if (s == "LOADED") return Origin::Loaded;
    if (s == "AUGMENTED") return Origin::Augmented;
    return std::nullopt;
}

std::string_view to_string(AugmentOp op) {
    switch (op) {
        case AugmentOp::KeywordObfuscation: return "KEYWORD_OBFUSCATION";
        case AugmentOp::CharNoise: return "CHAR_NOISE";
        case AugmentOp::SynonymReplacement: return "SYNONYM_REPLACEMENT";
    }
    return "CHAR_NOISE";
}

std::optional<AugmentOp> parse_augment_op(std::string_view s) {
    if (s == "KEYWORD_OBFUSCATION") return AugmentOp::KeywordObfuscation;
    if (s == "CHAR_NOISE") return AugmentOp::CharNoise;
    if (s == "SYNONYM_REPLACEMENT") return AugmentOp::SynonymReplacement;
    return std::nullopt;
}

int stratum_of(const std::optional<Label>& label) { return label ? to_binary(*label) : -1; }

}  // namespace aisoc
