#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sg/bipartite_graph.hpp"
#include "sg/stance.hpp"

namespace sg {

// Plain-text record formats; see docs/formats.md. All readers attach the
// file name and 1-based line number to parse errors.

// Posts file: `user_id<TAB>hashtag[,hashtag...]`.
std::vector<PostRecord> read_posts_tsv(const std::string& path);
void write_posts_tsv(const std::string& path, std::span<const PostRecord> posts);

// Interactions file: `author_id<TAB>target_id<TAB>sentiment`.
struct InteractionRecord {
    std::string author;
    std::string target;
    double sentiment;
};
std::vector<InteractionRecord> read_interactions_tsv(const std::string& path);
void write_interactions_tsv(const std::string& path, std::span<const InteractionRecord> rows);

// Seed file: one hashtag per line (leading '#' allowed, lines trimmed,
// blank lines skipped).
std::vector<std::string> read_seed_lines(const std::string& path);
void write_seed_lines(const std::string& path, std::span<const std::string> seeds);

// Label file: `entity<TAB>stance_name<TAB>provenance<TAB>iteration`.
struct NamedLabel {
    std::string entity;
    StanceId stance;
    Provenance provenance;
    uint32_t iteration;
};
std::vector<NamedLabel> read_labels_tsv(const std::string& path, const StancePair& stances);
void write_labels_tsv(const std::string& path, std::span<const NamedLabel> labels,
                      const StancePair& stances);

// Truth file: `entity<TAB>stance_name`, where the stance may also be
// `undetermined` (excluded from scoring).
struct TruthLabel {
    std::string entity;
    std::optional<StanceId> stance;  // nullopt = undetermined
};
std::vector<TruthLabel> read_truth_tsv(const std::string& path, const StancePair& stances);
void write_truth_tsv(const std::string& path, std::span<const TruthLabel> rows,
                     const StancePair& stances);

// Conversions between id-keyed assignments and name-keyed label rows.
std::vector<NamedLabel> to_named_labels(const StanceAssignment& a, const Interner& names);
StanceAssignment to_assignment(std::span<const NamedLabel> labels, const Interner& names,
                               std::vector<std::string>* unknown = nullptr);

} // namespace sg
