#pragma once

// Streaming event-causal memory engine: dual-sentinel segmentation,
// state-event-state abstraction, dual-store event knowledge graph, and
// bidirectional causal-topological retrieval.

#include "ekg/abstraction/extract.hpp"
#include "ekg/abstraction/prompt.hpp"
#include "ekg/backends/backend.hpp"
#include "ekg/backends/stub.hpp"
#include "ekg/core/config.hpp"
#include "ekg/core/errors.hpp"
#include "ekg/core/json_io.hpp"
#include "ekg/core/types.hpp"
#include "ekg/core/vec.hpp"
#include "ekg/engine.hpp"
#include "ekg/memory/store.hpp"
#include "ekg/retrieval/retrieval.hpp"
#include "ekg/sentinel/segmenter.hpp"
#include "ekg/sentinel/series.hpp"
#include "ekg/sentinel/window.hpp"
