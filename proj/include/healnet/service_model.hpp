#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "healnet/metrics.hpp"
#include "healnet/net_model.hpp"

/// VNFs, SDN applications and end-to-end services on top of the network
/// model, plus the NFV orchestration actions (migrate, scale-up, scale-out).
namespace healnet::service {

enum class WorkloadKind { vnf, app };
enum class WorkloadStatus { running, crashed, misconfigured };
enum class ServiceStatus { available, degraded, failed };

std::string_view to_string(WorkloadKind kind);
std::string_view to_string(WorkloadStatus status);
std::string_view to_string(ServiceStatus status);

/// A VNF or an SDN application running in a VM on a host. Replicas created by
/// scale-out point back to the original through `replica_of`.
struct Workload {
  std::string id;
  WorkloadKind kind = WorkloadKind::vnf;
  NodeId host;
  double cpu = 1.0;
  double mem = 1.0;
  double capacity = 100.0;  // requests/s
  double load = 0.0;        // requests/s currently offered
  WorkloadStatus status = WorkloadStatus::running;
  std::string replica_of;
  int config_version = 1;
  /// Apps only: northbound path from the VM host to the controller, fixed
  /// when allocated and re-allocated by rerouting or migration.
  std::optional<net::Path> allocated_path;

  bool is_running() const noexcept { return status == WorkloadStatus::running; }
  const std::string& group() const noexcept { return replica_of.empty() ? id : replica_of; }
  bool operator==(const Workload&) const = default;
};

struct Service {
  std::string id;
  std::vector<std::string> forwarding_graph;  // VNF ids, chain order
  std::vector<std::string> apps;
  NodeId client;
  NodeId server;
  std::vector<NodeId> users;
  bool crashed = false;
  int config_version = 1;
  int declared_config_version = 1;

  bool misconfigured() const noexcept { return config_version != declared_config_version; }
  bool operator==(const Service&) const = default;
};

/// The part of the network a service actually uses.
struct ServiceTopology {
  std::string service;
  std::set<NodeId> nodes;
  std::set<LinkId> links;
  net::Path chain_path;  // client -> host(vnf1) -> ... -> host(vnfN) -> server
  std::map<NodeId, net::Path> user_paths;  // server -> user delivery paths
  std::vector<NodeId> unreachable_users;

  bool operator==(const ServiceTopology&) const = default;
};

class Inventory {
 public:
  std::vector<Workload>& workloads() noexcept { return workloads_; }
  const std::vector<Workload>& workloads() const noexcept { return workloads_; }
  std::vector<Service>& services() noexcept { return services_; }
  const std::vector<Service>& services() const noexcept { return services_; }

  const Workload* find_workload(std::string_view id) const;
  Workload* find_workload(std::string_view id);
  const Workload& workload(std::string_view id) const;
  Workload& workload(std::string_view id);
  const Service* find_service(std::string_view id) const;
  Service* find_service(std::string_view id);
  const Service& service(std::string_view id) const;
  Service& service(std::string_view id);

  /// The original workload of `id`'s group followed by its replicas.
  std::vector<const Workload*> group_of(std::string_view id) const;
  /// Services whose forwarding graph or app list names `id`'s group.
  std::vector<const Service*> services_using(std::string_view id) const;

  bool operator==(const Inventory&) const = default;

 private:
  std::vector<Workload> workloads_;
  std::vector<Service> services_;
};

struct Network {
  net::Topology topology;
  Inventory inventory;
  bool operator==(const Network&) const = default;
};

/// Match key of the rule delivering `service` traffic to `client`.
std::string delivery_match(std::string_view service, const NodeId& client);
/// Match key of a service's chain traffic; never pre-installed.
std::string chain_match(std::string_view service);

struct FirstHop {
  NodeId switch_id;
  NodeId out_port;
};

/// The switch closest to a client (directly attached, or behind an access
/// point) and the port leading towards the client.
std::optional<FirstHop> first_hop(const net::Topology& t, const NodeId& client);

std::optional<ServiceTopology> derive_service_topology(const net::Topology& t,
                                                       const net::ControlView& control,
                                                       const Inventory& inv, const Service& s);
std::optional<ServiceTopology> derive_service_topology(const Network& net, const Service& s);

struct ServiceHealth {
  ServiceStatus status = ServiceStatus::available;
  std::optional<ServiceTopology> topology;
  bool delay_high = false;
  bool jitter_high = false;
  bool throughput_low = false;
  double worst_delay = 0.0;
  double worst_jitter = 0.0;
  double worst_throughput = 0.0;
  std::vector<NodeId> unreachable_users;
};

/// Per-user reachability: a delivery path exists, the user is not crashed,
/// and its first-hop switch holds the delivery rule.
std::map<NodeId, bool> user_reachability(const Network& net, const Service& s,
                                         const std::optional<ServiceTopology>& st);

ServiceHealth assess_service(const Network& net, const Service& s, const MetricThresholds& th);
ServiceStatus evaluate_service(const Network& net, const Service& s, const MetricThresholds& th);

double spare_cpu(const Network& net, const NodeId& host);
double spare_mem(const Network& net, const NodeId& host);

/// First host in declaration order (vm_host, up) able to take cpu/mem.
std::optional<NodeId> first_fit_host(const Network& net, double cpu, double mem,
                                     const std::optional<NodeId>& exclude = std::nullopt);

struct MigrationResult {
  bool topology_changed = false;
  std::vector<std::string> affected_services;
};

/// Moves a workload to `target`. Throws CapacityError when the target is down
/// or lacks spare cpu/mem. Apps get their northbound path re-allocated.
MigrationResult migrate_workload(Network& net, std::string_view id, const NodeId& target);

/// Instantiates a replica of `id`'s group on the first-fit host and spreads
/// the group's total load evenly. Returns the replica id.
std::string scale_out(Network& net, std::string_view id);

/// Doubles cpu, mem and capacity of a workload, capped by what its host has
/// left. Returns the new capacity; throws CapacityError if the host is full.
double scale_up(Network& net, std::string_view id);

/// Sets the total offered load of `id`'s group, split evenly over members.
void set_group_load(Inventory& inv, std::string_view id, double total);

/// Restarts a crashed or misconfigured workload. Returns false when its host
/// is not up.
bool restart_workload(Network& net, std::string_view id);

/// Crashes every workload placed on `host`.
void crash_workloads_on(Network& net, const NodeId& host);

/// Computes the northbound path of an app to the active controller.
void allocate_app_path(Network& net, std::string_view app);

/// Installs delivery rules for every user of every service and allocates
/// app paths. Called once on a freshly declared network.
void provision(Network& net);

/// Installs the delivery rule of `client` for `service` on its first hop.
/// Returns false when the client has no first-hop switch.
bool install_delivery_rule(net::Topology& t, std::string_view service, const NodeId& client,
                           net::Installer by);

}  // namespace healnet::service
