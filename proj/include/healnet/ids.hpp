#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace healnet {

/// Printable identifier tagged by what it names, so a LinkId cannot be passed
/// where a NodeId is expected.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}
  explicit Id(std::string_view value) : value_(value) {}
  explicit Id(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

struct NodeTag;
struct LinkTag;

using NodeId = Id<NodeTag>;
using LinkId = Id<LinkTag>;

}  // namespace healnet

template <class Tag>
struct std::hash<healnet::Id<Tag>> {
  std::size_t operator()(const healnet::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
