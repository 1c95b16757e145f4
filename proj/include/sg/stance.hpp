#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sg/errors.hpp"

namespace sg {

// The two stance classes of a run. Display names are dataset-specific
// ("believe"/"disbelieve", "pro"/"anti").
enum class StanceId : uint8_t { s1 = 0, s2 = 1 };

inline StanceId other(StanceId s) { return s == StanceId::s1 ? StanceId::s2 : StanceId::s1; }

struct StancePair {
    std::string name_s1 = "s1";
    std::string name_s2 = "s2";

    StancePair() = default;
    StancePair(std::string a, std::string b) : name_s1(std::move(a)), name_s2(std::move(b)) {
        if (name_s1.empty() || name_s2.empty() || name_s1 == name_s2)
            throw ConfigError("stance display names must be non-empty and distinct");
    }

    const std::string& name(StanceId s) const { return s == StanceId::s1 ? name_s1 : name_s2; }

    std::optional<StanceId> parse(const std::string& s) const {
        if (s == name_s1) return StanceId::s1;
        if (s == name_s2) return StanceId::s2;
        return std::nullopt;
    }
};

enum class Provenance : uint8_t { seed = 0, propagated = 1, predicted = 2, annotated = 3 };

const char* provenance_name(Provenance p);
std::optional<Provenance> parse_provenance(const std::string& s);

// Partial map entity-id -> (stance, provenance, iteration). Entries are kept
// sorted by entity id: lookups are binary searches and iteration order is
// deterministic.
class StanceAssignment {
public:
    struct Entry {
        uint32_t entity;
        StanceId stance;
        Provenance provenance;
        uint32_t iteration;
    };

    StanceAssignment() = default;

    // Insert or overwrite. Seed entries are never overwritten by propagation.
    void assign(uint32_t entity, StanceId stance, Provenance prov, uint32_t iteration);

    bool contains(uint32_t entity) const { return find(entity) != nullptr; }
    const Entry* find(uint32_t entity) const;
    std::optional<StanceId> stance_of(uint32_t entity) const;

    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    size_t count(StanceId s) const;

    // Membership + labels only; provenance/iteration metadata ignored.
    bool same_labels(const StanceAssignment& o) const;

private:
    std::vector<Entry> entries_;  // sorted by entity
};

} // namespace sg
