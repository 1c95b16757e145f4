#pragma once

#include <string>

#include "sg/bipartite_graph.hpp"
#include "sg/interaction_graph.hpp"

namespace sg {

// Versioned binary graph container (magic "SGR1"); layout in docs/formats.md.
// Loads re-run full construction-time validation.

enum class SnapshotKind : uint8_t { bipartite = 0, interaction = 1 };

void write_snapshot(const std::string& path, const BipartiteGraph& g);
void write_snapshot(const std::string& path, const InteractionGraph& g);

SnapshotKind peek_snapshot_kind(const std::string& path);
BipartiteGraph read_bipartite_snapshot(const std::string& path);
InteractionGraph read_interaction_snapshot(const std::string& path);

} // namespace sg
