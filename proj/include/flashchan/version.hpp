#pragma once

#define FLASHCHAN_VERSION "0.1.0"

namespace flashchan {

inline const char* version() { return FLASHCHAN_VERSION; }

}  // namespace flashchan
