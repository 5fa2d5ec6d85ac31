#pragma once

// JSON and binary serialization of instances, streams, graphs, traces and reports.

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "isorank/bench.hpp"
#include "isorank/compgraph.hpp"
#include "isorank/isr.hpp"
#include "isorank/reconstruct.hpp"
#include "isorank/sampling.hpp"
#include "isorank/slr.hpp"

namespace isorank::io {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "isorank/1";

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json instance_to_json(const sampling::SignalInstance& inst);
sampling::SignalInstance instance_from_json(const Json& j);

void write_instance_binary(std::ostream& os, const sampling::SignalInstance& inst);
sampling::SignalInstance read_instance_binary(std::istream& is);

Json stream_to_json(const sampling::ObservationStream& s);
sampling::ObservationStream stream_from_json(const Json& j);

// One line per vertex: {"vertex", "out", "level"} over G(W, gamma), then one
// line per ordered pair with nonzero weight.
void write_graph_jsonl(std::ostream& os, const graph::WeightedGraph& W, double gamma);

Json trace_to_json(const slr::PassTrace& t);

Json grid_to_json(const isr::GridConfig& g);
Json isr_config_to_json(const isr::ISRConfig& c);

// Config echo, seed, gamma_hat trajectory and losses when known.
Json run_manifest(const isr::ISRConfig& config, std::uint64_t seed, const isr::ISRResult& result,
                  const Json& losses = Json::object());

Json fit_to_json(const reconstruct::IsotonicFit& fit);

Json sweep_to_json(const bench::SweepReport& report, bool deterministic = false);
Json concentration_to_json(const bench::ConcentrationSummary& s);

Json permutation_to_json(const Permutation& p);

}  // namespace isorank::io
