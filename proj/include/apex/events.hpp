#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "apex/types.hpp"

namespace apex {

// Low-level history emitted by the file system. Test oracles replay it to
// rebuild factors and recovery outcomes independently of the engine.
struct AllocateEvent {
  Tick tick = 0;
  FileId file = 0;
  TypeClass type_class = TypeClass::Partial;
  std::vector<BlockAddress> blocks;  // block_list order
};
struct DeallocateEvent {
  Tick tick = 0;
  FileId file = 0;
  std::vector<BlockAddress> blocks;
};
struct AccessEvent {
  Tick tick = 0;
  FileId file = 0;
};
struct BlockWriteEvent {
  Tick tick = 0;
  BlockAddress block = 0;
  FileId file = 0;
  std::uint64_t version = 0;
};
struct SpatialPassEvent {
  Tick tick = 0;
};

using DiskEvent =
    std::variant<AllocateEvent, DeallocateEvent, AccessEvent, BlockWriteEvent, SpatialPassEvent>;

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_event(const DiskEvent& event) = 0;
};

// Keeps everything in memory.
class EventLog final : public EventSink {
 public:
  void on_event(const DiskEvent& event) override { events_.push_back(event); }
  const std::vector<DiskEvent>& events() const { return events_; }
  void clear() { events_.clear(); }

 private:
  std::vector<DiskEvent> events_;
};

}  // namespace apex
