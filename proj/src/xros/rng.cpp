#include "xros/rng.hpp"

namespace xros {

RngStream& RngSet::stream(const std::string& name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) {
        it = streams_.emplace(name, RngStream(derive_seed(root_, name))).first;
    }
    return it->second;
}

}  // namespace xros
