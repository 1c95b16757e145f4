#include "sg/text_io.hpp"

#include <fstream>

#include "sg/errors.hpp"
#include "sg/util.hpp"

namespace sg {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path + "' for reading");
    return is;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
    return os;
}

[[noreturn]] void bad_line(const std::string& path, size_t line_no, const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

void finish(std::ofstream& os, const std::string& path) {
    os.flush();
    if (!os) throw RuntimeError("write failed for '" + path + "'");
}

} // namespace

std::vector<PostRecord> read_posts_tsv(const std::string& path) {
    std::ifstream is = open_in(path);
    std::vector<PostRecord> out;
    std::string line;
    size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto cols = split(sv, '\t');
        if (cols.size() != 2) bad_line(path, n, "expected `user<TAB>hashtags`");
        PostRecord rec;
        rec.user = std::string(trim(cols[0]));
        if (rec.user.empty()) bad_line(path, n, "empty user id");
        for (std::string_view tag : split(cols[1], ',')) {
            tag = trim(tag);
            if (tag.empty()) bad_line(path, n, "empty hashtag in list");
            rec.hashtags.emplace_back(tag);
        }
        if (rec.hashtags.empty()) bad_line(path, n, "no hashtags");
        out.push_back(std::move(rec));
    }
    return out;
}

void write_posts_tsv(const std::string& path, std::span<const PostRecord> posts) {
    std::ofstream os = open_out(path);
    for (const PostRecord& p : posts) {
        os << p.user << '\t';
        for (size_t i = 0; i < p.hashtags.size(); ++i) {
            if (i) os << ',';
            os << p.hashtags[i];
        }
        os << '\n';
    }
    finish(os, path);
}

std::vector<InteractionRecord> read_interactions_tsv(const std::string& path) {
    std::ifstream is = open_in(path);
    std::vector<InteractionRecord> out;
    std::string line;
    size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto cols = split(sv, '\t');
        if (cols.size() != 3) bad_line(path, n, "expected `author<TAB>target<TAB>sentiment`");
        InteractionRecord rec;
        rec.author = std::string(trim(cols[0]));
        rec.target = std::string(trim(cols[1]));
        if (rec.author.empty() || rec.target.empty()) bad_line(path, n, "empty user id");
        if (!parse_double(cols[2], rec.sentiment)) bad_line(path, n, "bad sentiment value");
        out.push_back(std::move(rec));
    }
    return out;
}

void write_interactions_tsv(const std::string& path, std::span<const InteractionRecord> rows) {
    std::ofstream os = open_out(path);
    for (const InteractionRecord& r : rows)
        os << r.author << '\t' << r.target << '\t' << format_double(r.sentiment) << '\n';
    finish(os, path);
}

std::vector<std::string> read_seed_lines(const std::string& path) {
    std::ifstream is = open_in(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(is, line)) {
        std::string_view sv = trim(line);
        if (!sv.empty()) out.emplace_back(sv);
    }
    if (out.empty()) throw DataError("seed file '" + path + "' holds no hashtags");
    return out;
}

void write_seed_lines(const std::string& path, std::span<const std::string> seeds) {
    std::ofstream os = open_out(path);
    for (const std::string& s : seeds) os << s << '\n';
    finish(os, path);
}

std::vector<NamedLabel> read_labels_tsv(const std::string& path, const StancePair& stances) {
    std::ifstream is = open_in(path);
    std::vector<NamedLabel> out;
    std::string line;
    size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto cols = split(sv, '\t');
        if (cols.size() != 4)
            bad_line(path, n, "expected `entity<TAB>stance<TAB>provenance<TAB>iteration`");
        NamedLabel l;
        l.entity = std::string(trim(cols[0]));
        if (l.entity.empty()) bad_line(path, n, "empty entity id");
        auto st = stances.parse(std::string(trim(cols[1])));
        if (!st)
            bad_line(path, n, "unknown stance '" + std::string(trim(cols[1])) + "' (expected '" +
                                  stances.name_s1 + "' or '" + stances.name_s2 + "')");
        l.stance = *st;
        auto prov = parse_provenance(std::string(trim(cols[2])));
        if (!prov) bad_line(path, n, "unknown provenance '" + std::string(trim(cols[2])) + "'");
        l.provenance = *prov;
        uint64_t iter = 0;
        if (!parse_u64(cols[3], iter) || iter > UINT32_MAX) bad_line(path, n, "bad iteration");
        l.iteration = uint32_t(iter);
        out.push_back(std::move(l));
    }
    return out;
}

void write_labels_tsv(const std::string& path, std::span<const NamedLabel> labels,
                      const StancePair& stances) {
    std::ofstream os = open_out(path);
    for (const NamedLabel& l : labels)
        os << l.entity << '\t' << stances.name(l.stance) << '\t' << provenance_name(l.provenance)
           << '\t' << l.iteration << '\n';
    finish(os, path);
}

std::vector<TruthLabel> read_truth_tsv(const std::string& path, const StancePair& stances) {
    std::ifstream is = open_in(path);
    std::vector<TruthLabel> out;
    std::string line;
    size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto cols = split(sv, '\t');
        if (cols.size() != 2) bad_line(path, n, "expected `entity<TAB>stance`");
        TruthLabel t;
        t.entity = std::string(trim(cols[0]));
        if (t.entity.empty()) bad_line(path, n, "empty entity id");
        std::string name(trim(cols[1]));
        if (name == "undetermined") {
            t.stance = std::nullopt;
        } else {
            auto st = stances.parse(name);
            if (!st)
                bad_line(path, n, "unknown stance '" + name + "' (expected '" + stances.name_s1 +
                                      "', '" + stances.name_s2 + "', or 'undetermined')");
            t.stance = st;
        }
        out.push_back(std::move(t));
    }
    return out;
}

void write_truth_tsv(const std::string& path, std::span<const TruthLabel> rows,
                     const StancePair& stances) {
    std::ofstream os = open_out(path);
    for (const TruthLabel& t : rows)
        os << t.entity << '\t' << (t.stance ? stances.name(*t.stance) : std::string("undetermined"))
           << '\n';
    finish(os, path);
}

std::vector<NamedLabel> to_named_labels(const StanceAssignment& a, const Interner& names) {
    std::vector<NamedLabel> out;
    out.reserve(a.size());
    for (const auto& e : a.entries())
        out.push_back({names.name(e.entity), e.stance, e.provenance, e.iteration});
    return out;
}

StanceAssignment to_assignment(std::span<const NamedLabel> labels, const Interner& names,
                               std::vector<std::string>* unknown) {
    StanceAssignment a;
    for (const NamedLabel& l : labels) {
        if (auto id = names.lookup(l.entity)) {
            a.assign(*id, l.stance, l.provenance, l.iteration);
        } else if (unknown) {
            unknown->push_back(l.entity);
        } else {
            throw DataError("label entity '" + l.entity + "' not present in graph");
        }
    }
    return a;
}

} // namespace sg
