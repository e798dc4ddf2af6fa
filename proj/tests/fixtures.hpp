#pragma once

#include "aisoc/pipeline.hpp"

namespace fixture {

// Small but complete pipeline run shared by service and eval tests.
inline aisoc::PipelineConfig small_config(std::uint64_t seed = 7) {
    aisoc::PipelineConfig c;
    c.scenario.benign_hosts = 2;
    c.scenario.attack_sessions = 16;
    c.scenario.duration_s = 1200;
    c.malware.samples = 400;
    c.forest.n_trees = 12;
    c.apply_seed(seed);
    return c;
}

inline const aisoc::PipelineResult& small_run() {
    static const aisoc::PipelineResult r = aisoc::run_pipeline(small_config());
    return r;
}

}  // namespace fixture
