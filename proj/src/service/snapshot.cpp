#include "healnet/snapshot.hpp"

namespace healnet {

bool Snapshot::same_content(const Snapshot& other) const {
  return data_->network == other.data_->network &&
         data_->service_topologies == other.data_->service_topologies;
}

Snapshot Snapshotter::take(const net::Topology& t, const service::Inventory& inv) {
  auto data = std::make_shared<Snapshot::Data>();
  data->version = ++last_;
  data->network.topology = t;
  data->network.inventory = inv;
  net::ControlView control(t);
  for (const service::Service& s : inv.services()) {
    data->service_topologies.emplace(s.id, service::derive_service_topology(t, control, inv, s));
  }
  return Snapshot(std::move(data));
}

}  // namespace healnet
