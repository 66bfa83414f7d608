#include "sfis/common.hpp"

#ifndef SFIS_VERSION
#define SFIS_VERSION "untracked"
#endif

namespace sfis {

const char* version() { return SFIS_VERSION; }

}  // namespace sfis
