#pragma once

#include <string_view>

namespace decorate::assets {

// Contents of a bundled asset by file name (e.g. "rating.txt"); empty when
// no such asset exists.
std::string_view embedded(std::string_view name);

}  // namespace decorate::assets
