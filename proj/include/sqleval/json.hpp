#pragma once

#include <json.hpp>

namespace sqleval {

// Insertion-ordered variant keeps every emitted artifact byte-deterministic.
using Json = nlohmann::ordered_json;

}  // namespace sqleval
