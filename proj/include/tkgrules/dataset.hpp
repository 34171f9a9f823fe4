#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgrules/types.hpp"

namespace tkgr {

// Entity and relation name <-> id bijections. Relations are stored for the
// original (non-inverse) set only; relation p + R is the inverse of p.
class Vocabulary {
public:
    EntityId add_entity(std::string_view name);
    RelationId add_relation(std::string_view name);

    std::optional<EntityId> find_entity(std::string_view name) const;
    // Accepts original names and "<name>^-1" for inverse relations.
    std::optional<RelationId> find_relation(std::string_view name) const;

    const std::string& entity_name(EntityId id) const;
    std::string relation_name(RelationId id) const;

    std::size_t num_entities() const { return entities_.size(); }
    // R, the number of original relations.
    std::size_t num_relations() const { return relations_.size(); }
    std::size_t num_augmented_relations() const { return 2 * relations_.size(); }

    RelationId inverse(RelationId p) const;
    bool is_inverse(RelationId p) const { return p >= relations_.size(); }

    // Stable FNV-1a hash over all names in id order. Used to detect that a
    // rule file was learned on a different vocabulary.
    std::uint64_t fingerprint() const;
    // Same hash over the first `entities` entities and `relations` relations,
    // so a vocabulary can be checked to extend another one.
    std::uint64_t fingerprint(std::size_t entities, std::size_t relations) const;

    // Writes entity2id.txt and relation2id.txt ("name<TAB>id" per line).
    void write_mappings(const std::filesystem::path& dir) const;

private:
    std::vector<std::string> entities_;
    std::vector<std::string> relations_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
};

enum class IdMode { Auto, Ids, Names };

struct ParseOptions {
    IdMode mode = IdMode::Auto;
    // Map integer stamps to consecutive ticks (t - t_min) / step, where step
    // is the gcd of the gaps between distinct stamps.
    bool normalize_time = true;
};

// Raw timestamp <-> tick conversion chosen at parse time.
struct TimeMapping {
    bool integer_stamps = true;
    Timestamp origin = 0;
    Timestamp step = 1;
    std::vector<std::string> labels;  // non-integer stamps, indexed by tick

    std::optional<Timestamp> to_tick(std::string_view raw) const;
    std::string to_raw(Timestamp tick) const;
};

struct Dataset {
    Vocabulary vocab;
    TimeMapping time;
    bool name_mode = false;
    std::vector<Quadruple> train;
    std::vector<Quadruple> valid;
    std::vector<Quadruple> test;
};

// Parses tab-separated "subject relation object timestamp [ignored]" lines.
// Throws DataError naming split and line number on malformed input, and when
// the splits are not temporally ordered train < valid < test.
Dataset parse_dataset(std::istream& train, std::istream& valid, std::istream& test,
                      const ParseOptions& options = {});

Dataset load_dataset(const std::filesystem::path& train,
                     const std::optional<std::filesystem::path>& valid,
                     const std::optional<std::filesystem::path>& test,
                     const ParseOptions& options = {});

Quadruple inverse_of(const Quadruple& q, std::size_t num_relations);

// Returns quads followed by their mirrors (o, p + R, s, t). Throws DataError
// if any relation id is already >= R (the input looks augmented).
std::vector<Quadruple> augment_with_inverses(std::span<const Quadruple> quads,
                                             std::size_t num_relations);

}  // namespace tkgr
