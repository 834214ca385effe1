#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "healnet/service_model.hpp"

namespace healnet {

/// Immutable copy of the network and service placements, with the service
/// topologies derived at capture time. Cheap to copy and share across threads.
class Snapshot {
 public:
  std::uint64_t version() const noexcept { return data_->version; }
  const net::Topology& topology() const noexcept { return data_->network.topology; }
  const service::Inventory& inventory() const noexcept { return data_->network.inventory; }
  const service::Network& network() const noexcept { return data_->network; }
  const std::map<std::string, std::optional<service::ServiceTopology>>& service_topologies()
      const noexcept {
    return data_->service_topologies;
  }

  /// Equal content, ignoring the version tag.
  bool same_content(const Snapshot& other) const;

 private:
  friend class Snapshotter;

  struct Data {
    std::uint64_t version = 0;
    service::Network network;
    std::map<std::string, std::optional<service::ServiceTopology>> service_topologies;
  };

  explicit Snapshot(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

/// Issues snapshots with strictly increasing versions, starting at 1.
class Snapshotter {
 public:
  Snapshot take(const net::Topology& t, const service::Inventory& inv);
  Snapshot take(const service::Network& net) { return take(net.topology, net.inventory); }
  std::uint64_t last_version() const noexcept { return last_; }

 private:
  std::uint64_t last_ = 0;
};

}  // namespace healnet
