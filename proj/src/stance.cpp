#include "sg/stance.hpp"

#include <algorithm>

namespace sg {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::seed: return "seed";
        case Provenance::propagated: return "propagated";
        case Provenance::predicted: return "predicted";
        case Provenance::annotated: return "annotated";
    }
    return "?";
}

std::optional<Provenance> parse_provenance(const std::string& s) {
    if (s == "seed") return Provenance::seed;
    if (s == "propagated") return Provenance::propagated;
    if (s == "predicted") return Provenance::predicted;
    if (s == "annotated") return Provenance::annotated;
    return std::nullopt;
}

namespace {
struct EntityLess {
    bool operator()(const StanceAssignment::Entry& e, uint32_t id) const { return e.entity < id; }
};
} // namespace

const StanceAssignment::Entry* StanceAssignment::find(uint32_t entity) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), entity, EntityLess{});
    if (it != entries_.end() && it->entity == entity) return &*it;
    return nullptr;
}

std::optional<StanceId> StanceAssignment::stance_of(uint32_t entity) const {
    const Entry* e = find(entity);
    if (!e) return std::nullopt;
    return e->stance;
}

void StanceAssignment::assign(uint32_t entity, StanceId stance, Provenance prov, uint32_t iteration) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), entity, EntityLess{});
    if (it != entries_.end() && it->entity == entity) {
        if (it->provenance == Provenance::seed && prov == Provenance::propagated)
            return;  // seeds hold their label
        it->stance = stance;
        it->provenance = prov;
        it->iteration = iteration;
        return;
    }
    entries_.insert(it, Entry{entity, stance, prov, iteration});
}

size_t StanceAssignment::count(StanceId s) const {
    size_t n = 0;
    for (const Entry& e : entries_)
        if (e.stance == s) ++n;
    return n;
}

bool StanceAssignment::same_labels(const StanceAssignment& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].entity != o.entries_[i].entity || entries_[i].stance != o.entries_[i].stance)
            return false;
    return true;
}

} // namespace sg
