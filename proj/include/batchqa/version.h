#pragma once

#include <string_view>

namespace batchqa {

std::string_view tool_version();

}  // namespace batchqa
