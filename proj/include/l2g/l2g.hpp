#pragma once

// Umbrella header: ranked-list ingestion into a doc-doc affinity graph,
// pool-restricted propagation, graph-adaptive sliding-window reranking,
// nDCG evaluation, and the micro-benchmark harness.

#include "l2g/bench.hpp"
#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"
#include "l2g/eval.hpp"
#include "l2g/external_reranker.hpp"
#include "l2g/gar.hpp"
#include "l2g/graph.hpp"
#include "l2g/graph_io.hpp"
#include "l2g/propagation.hpp"
#include "l2g/rerankers.hpp"
#include "l2g/run_io.hpp"
