#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sg {

// Bijection between retained strings and dense ids in [0, size).
class Interner {
public:
    uint32_t intern(std::string_view s) {
        auto it = index_.find(std::string(s));
        if (it != index_.end()) return it->second;
        uint32_t id = uint32_t(names_.size());
        names_.emplace_back(s);
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<uint32_t> lookup(std::string_view s) const {
        auto it = index_.find(std::string(s));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(uint32_t id) const { return names_[id]; }
    size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, uint32_t> index_;
};

} // namespace sg
