#pragma once

#include <stdexcept>
#include <string>

namespace repoctx {

/// Source text that is not valid UTF-8.
class EncodingError : public std::runtime_error {
 public:
  EncodingError(std::string path, std::size_t offset)
      : std::runtime_error(path + ": invalid UTF-8 at byte " + std::to_string(offset)),
        path_(std::move(path)),
        offset_(offset) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string path_;
  std::size_t offset_;
};

/// A persisted graph, dataset or predictions file that cannot be decoded.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace repoctx
