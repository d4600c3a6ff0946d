#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apex/types.hpp"

namespace apex {

struct FileRecord {
  FileId id = 0;
  std::string path;
  TypeClass type_class = TypeClass::Partial;
  FileStatus status = FileStatus::Used;
  // block_list[0] is the metadata block; the rest hold data in file order.
  std::vector<BlockAddress> block_list;
  std::uint64_t size_bytes = 0;
  std::uint64_t uf_counter = 0;
  std::uint64_t content_epoch = 0;
  Tick created_tick = 0;
  Tick last_access_tick = 0;
  Tick deleted_tick = 0;
  // Payload version of each listed block at deletion time.
  std::vector<std::uint64_t> final_versions;

  std::size_t data_block_count() const { return block_list.empty() ? 0 : block_list.size() - 1; }
};

}  // namespace apex
