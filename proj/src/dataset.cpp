#include "tkgrules/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

namespace tkgr {

namespace {

constexpr std::string_view kInverseSuffix = "^-1";

struct RawLine {
    std::size_t line_no = 0;
    std::string cols[4];
};

struct RawSplit {
    std::string name;
    std::vector<RawLine> lines;
};

std::vector<std::string> split_columns(const std::string& line) {
    std::vector<std::string> cols;
    if (line.find('\t') != std::string::npos) {
        std::size_t start = 0;
        while (true) {
            auto pos = line.find('\t', start);
            cols.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
    } else {
        std::istringstream in(line);
        std::string tok;
        while (in >> tok) cols.push_back(tok);
    }
    return cols;
}

RawSplit read_split(std::istream& in, std::string name) {
    RawSplit split{std::move(name), {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cols = split_columns(line);
        if (cols.size() < 4 || cols.size() > 5) {
            throw DataError(split.name + ":" + std::to_string(line_no) + ": expected 4 or 5 columns, found " +
                            std::to_string(cols.size()));
        }
        RawLine raw;
        raw.line_no = line_no;
        for (int i = 0; i < 4; ++i) {
            if (cols[i].empty()) {
                throw DataError(split.name + ":" + std::to_string(line_no) + ": empty column " +
                                std::to_string(i + 1));
            }
            raw.cols[i] = std::move(cols[i]);
        }
        split.lines.push_back(std::move(raw));
    }
    return split;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

bool is_non_negative_int(std::string_view s) {
    auto v = parse_int(s);
    return v && *v >= 0;
}

std::string where(const RawSplit& split, const RawLine& line) {
    return split.name + ":" + std::to_string(line.line_no);
}

}  // namespace

EntityId Vocabulary::add_entity(std::string_view name) {
    std::string key(name);
    if (auto it = entity_ids_.find(key); it != entity_ids_.end()) return it->second;
    auto id = static_cast<EntityId>(entities_.size());
    entities_.push_back(key);
    entity_ids_.emplace(std::move(key), id);
    return id;
}

RelationId Vocabulary::add_relation(std::string_view name) {
    std::string key(name);
    if (auto it = relation_ids_.find(key); it != relation_ids_.end()) return it->second;
    auto id = static_cast<RelationId>(relations_.size());
    relations_.push_back(key);
    relation_ids_.emplace(std::move(key), id);
    return id;
}

std::optional<EntityId> Vocabulary::find_entity(std::string_view name) const {
    if (auto it = entity_ids_.find(std::string(name)); it != entity_ids_.end()) return it->second;
    return std::nullopt;
}

std::optional<RelationId> Vocabulary::find_relation(std::string_view name) const {
    if (auto it = relation_ids_.find(std::string(name)); it != relation_ids_.end()) return it->second;
    if (name.size() > kInverseSuffix.size() && name.ends_with(kInverseSuffix)) {
        auto base = name.substr(0, name.size() - kInverseSuffix.size());
        if (auto it = relation_ids_.find(std::string(base)); it != relation_ids_.end()) {
            return static_cast<RelationId>(it->second + relations_.size());
        }
    }
    return std::nullopt;
}

const std::string& Vocabulary::entity_name(EntityId id) const {
    if (id >= entities_.size()) throw std::out_of_range("entity id " + std::to_string(id));
    return entities_[id];
}

std::string Vocabulary::relation_name(RelationId id) const {
    if (id < relations_.size()) return relations_[id];
    if (id < 2 * relations_.size()) return relations_[id - relations_.size()] + std::string(kInverseSuffix);
    throw std::out_of_range("relation id " + std::to_string(id));
}

RelationId Vocabulary::inverse(RelationId p) const {
    const auto r = static_cast<RelationId>(relations_.size());
    if (p >= 2 * r) throw std::out_of_range("relation id " + std::to_string(p));
    return p < r ? p + r : p - r;
}

std::uint64_t Vocabulary::fingerprint() const { return fingerprint(entities_.size(), relations_.size()); }

std::uint64_t Vocabulary::fingerprint(std::size_t entities, std::size_t relations) const {
    entities = std::min(entities, entities_.size());
    relations = std::min(relations, relations_.size());
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= 0xff;  // separator
        h *= 1099511628211ULL;
    };
    for (std::size_t i = 0; i < entities; ++i) mix(entities_[i]);
    mix("|");
    for (std::size_t i = 0; i < relations; ++i) mix(relations_[i]);
    return h;
}

void Vocabulary::write_mappings(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    auto dump = [](const std::filesystem::path& path, const std::vector<std::string>& names) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << '\t' << i << '\n';
    };
    dump(dir / "entity2id.txt", entities_);
    dump(dir / "relation2id.txt", relations_);
}

std::optional<Timestamp> TimeMapping::to_tick(std::string_view raw) const {
    if (integer_stamps) {
        auto v = parse_int(raw);
        if (!v || *v < origin || (*v - origin) % step != 0) return std::nullopt;
        return (*v - origin) / step;
    }
    auto it = std::find(labels.begin(), labels.end(), raw);
    if (it == labels.end()) return std::nullopt;
    return static_cast<Timestamp>(it - labels.begin());
}

std::string TimeMapping::to_raw(Timestamp tick) const {
    if (integer_stamps) return std::to_string(origin + tick * step);
    if (tick < 0 || static_cast<std::size_t>(tick) >= labels.size()) return "?" + std::to_string(tick);
    return labels[static_cast<std::size_t>(tick)];
}

Dataset parse_dataset(std::istream& train, std::istream& valid, std::istream& test,
                      const ParseOptions& options) {
    RawSplit splits[3] = {read_split(train, "train"), read_split(valid, "valid"), read_split(test, "test")};

    bool ids = options.mode == IdMode::Ids;
    if (options.mode == IdMode::Auto) {
        ids = true;
        for (const auto& split : splits) {
            for (const auto& line : split.lines) {
                if (!is_non_negative_int(line.cols[0]) || !is_non_negative_int(line.cols[1]) ||
                    !is_non_negative_int(line.cols[2])) {
                    ids = false;
                    break;
                }
            }
            if (!ids) break;
        }
    }

    Dataset ds;
    ds.name_mode = !ids;

    if (ids) {
        std::int64_t max_entity = -1;
        std::int64_t max_relation = -1;
        for (const auto& split : splits) {
            for (const auto& line : split.lines) {
                for (int c : {0, 2}) {
                    auto v = parse_int(line.cols[c]);
                    if (!v || *v < 0) throw DataError(where(split, line) + ": entity id is not a non-negative integer");
                    max_entity = std::max(max_entity, *v);
                }
                auto r = parse_int(line.cols[1]);
                if (!r || *r < 0) throw DataError(where(split, line) + ": relation id is not a non-negative integer");
                max_relation = std::max(max_relation, *r);
            }
        }
        if (max_entity >= (std::int64_t{1} << 24) || max_relation >= (std::int64_t{1} << 15)) {
            throw DataError("id space too large for the temporal index");
        }
        for (std::int64_t e = 0; e <= max_entity; ++e) ds.vocab.add_entity(std::to_string(e));
        for (std::int64_t r = 0; r <= max_relation; ++r) ds.vocab.add_relation(std::to_string(r));
    }

    // Timestamps: integer stamps are normalized by gcd of gaps; anything else is
    // ranked by first appearance across train, valid, test.
    bool integer_time = true;
    for (const auto& split : splits) {
        for (const auto& line : split.lines) {
            if (!parse_int(line.cols[3])) {
                integer_time = false;
                break;
            }
        }
        if (!integer_time) break;
    }

    std::unordered_map<std::string, Timestamp> label_ticks;
    if (integer_time) {
        std::vector<Timestamp> distinct;
        for (const auto& split : splits) {
            for (const auto& line : split.lines) {
                auto v = *parse_int(line.cols[3]);
                if (v < 0) throw DataError(where(split, line) + ": negative timestamp");
                distinct.push_back(v);
            }
        }
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        ds.time.integer_stamps = true;
        ds.time.origin = 0;
        ds.time.step = 1;
        if (options.normalize_time && !distinct.empty()) {
            Timestamp g = 0;
            for (std::size_t i = 1; i < distinct.size(); ++i) g = std::gcd(g, distinct[i] - distinct[i - 1]);
            ds.time.origin = distinct.front();
            ds.time.step = g == 0 ? 1 : g;
        }
    } else {
        ds.time.integer_stamps = false;
        for (const auto& split : splits) {
            for (const auto& line : split.lines) {
                if (label_ticks.emplace(line.cols[3], static_cast<Timestamp>(ds.time.labels.size())).second) {
                    ds.time.labels.push_back(line.cols[3]);
                }
            }
        }
    }

    std::vector<Quadruple>* outputs[3] = {&ds.train, &ds.valid, &ds.test};
    for (int s = 0; s < 3; ++s) {
        auto& out = *outputs[s];
        out.reserve(splits[s].lines.size());
        for (const auto& line : splits[s].lines) {
            Quadruple q;
            if (ids) {
                q.subject = static_cast<EntityId>(*parse_int(line.cols[0]));
                q.relation = static_cast<RelationId>(*parse_int(line.cols[1]));
                q.object = static_cast<EntityId>(*parse_int(line.cols[2]));
            } else {
                q.subject = ds.vocab.add_entity(line.cols[0]);
                q.relation = ds.vocab.add_relation(line.cols[1]);
                q.object = ds.vocab.add_entity(line.cols[2]);
            }
            if (integer_time) {
                q.timestamp = (*parse_int(line.cols[3]) - ds.time.origin) / ds.time.step;
            } else {
                q.timestamp = label_ticks.at(line.cols[3]);
            }
            out.push_back(q);
        }
    }
    if (ds.vocab.num_entities() >= (std::size_t{1} << 24) || ds.vocab.num_relations() >= (std::size_t{1} << 15)) {
        throw DataError("vocabulary too large for the temporal index");
    }

    auto bounds = [](const std::vector<Quadruple>& qs) {
        auto [lo, hi] = std::minmax_element(qs.begin(), qs.end(), [](const auto& a, const auto& b) {
            return a.timestamp < b.timestamp;
        });
        return std::pair{lo->timestamp, hi->timestamp};
    };
    std::optional<std::pair<Timestamp, std::string>> previous_max;
    for (int s = 0; s < 3; ++s) {
        if (outputs[s]->empty()) continue;
        auto [lo, hi] = bounds(*outputs[s]);
        if (previous_max && lo <= previous_max->first) {
            throw DataError("split overlap: " + splits[s].name + " starts at tick " + std::to_string(lo) +
                            " but " + previous_max->second + " ends at tick " + std::to_string(previous_max->first));
        }
        previous_max = std::pair{hi, splits[s].name};
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& train, const std::optional<std::filesystem::path>& valid,
                     const std::optional<std::filesystem::path>& test, const ParseOptions& options) {
    auto open = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw DataError("cannot read " + p.string());
        return in;
    };
    std::ifstream train_in = open(train);
    std::istringstream empty_valid, empty_test;
    std::ifstream valid_in, test_in;
    if (valid) valid_in = open(*valid);
    if (test) test_in = open(*test);
    return parse_dataset(train_in, valid ? static_cast<std::istream&>(valid_in) : empty_valid,
                         test ? static_cast<std::istream&>(test_in) : empty_test, options);
}

Quadruple inverse_of(const Quadruple& q, std::size_t num_relations) {
    const auto r = static_cast<RelationId>(num_relations);
    return {q.object, q.relation < r ? q.relation + r : q.relation - r, q.subject, q.timestamp};
}

std::vector<Quadruple> augment_with_inverses(std::span<const Quadruple> quads, std::size_t num_relations) {
    std::vector<Quadruple> out;
    out.reserve(2 * quads.size());
    for (const auto& q : quads) {
        if (q.relation >= num_relations) {
            throw DataError("relation id " + std::to_string(q.relation) + " >= " + std::to_string(num_relations) +
                            "; graph already augmented?");
        }
        out.push_back(q);
    }
    for (const auto& q : quads) out.push_back(inverse_of(q, num_relations));
    return out;
}

}  // namespace tkgr
