#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace didlkit::fixtures::detail {

struct EmbeddedFile {
  std::string_view path;  // relative to the fixtures directory
  const unsigned char* data;
  std::size_t size;
};

const std::vector<EmbeddedFile>& embedded_files();

}  // namespace didlkit::fixtures::detail
