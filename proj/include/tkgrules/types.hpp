#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tkgr {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using Timestamp = std::int64_t;

inline constexpr EntityId kNoEntity = static_cast<EntityId>(-1);
inline constexpr RelationId kNoRelation = static_cast<RelationId>(-1);

// One temporal fact: subject is in `relation` to `object` at `timestamp`.
struct Quadruple {
    EntityId subject = 0;
    RelationId relation = 0;
    EntityId object = 0;
    Timestamp timestamp = 0;

    friend bool operator==(const Quadruple&, const Quadruple&) = default;
    friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tkgr
