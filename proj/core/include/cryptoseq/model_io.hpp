#pragma once

#include <string>

#include "cryptoseq/cells.hpp"

namespace cryptoseq {

/// Model container: a text header (`cryptoseq-model v1`, then `key value`
/// lines describing the network spec, then `end-header`) followed by the parameters
/// as raw 64-bit little-endian reals in the canonical parameter order.
void save_network(const RecurrentNetwork& net, const std::string& path);

RecurrentNetwork load_network(const std::string& path);

} // namespace cryptoseq
