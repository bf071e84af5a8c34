#include "batchqa/version.h"

namespace batchqa {

std::string_view tool_version() { return BATCHQA_VERSION_STRING; }

}  // namespace batchqa
