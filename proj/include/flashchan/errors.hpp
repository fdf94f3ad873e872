#pragma once

#include <stdexcept>
#include <string>

namespace flashchan {

struct EmptySampleError : std::runtime_error {
    explicit EmptySampleError(const std::string& what) : std::runtime_error(what) {}
};

struct UnderdispersedDataError : std::runtime_error {
    explicit UnderdispersedDataError(const std::string& what) : std::runtime_error(what) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace flashchan
