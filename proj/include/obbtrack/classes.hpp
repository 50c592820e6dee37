#pragma once

#include <map>
#include <string>
#include <vector>

#include "obbtrack/geometry.hpp"

namespace obbtrack {

/// Known object classes, keyed by class id.
class ClassRegistry {
 public:
  ClassRegistry() = default;
  explicit ClassRegistry(const std::vector<ClassSpec>& specs) {
    for (const auto& s : specs) add(s);
  }

  void add(const ClassSpec& spec) {
    if (spec.class_id.empty()) throw ConfigError("class id must not be empty");
    if (!spec.nominal_extent.finite() || spec.nominal_extent.x <= 0.0 || spec.nominal_extent.y <= 0.0 ||
        spec.nominal_extent.z <= 0.0) {
      throw ConfigError("class '" + spec.class_id + "': nominal extent must be positive");
    }
    hypothesis_count(spec);  // throws on unsupported plane counts
    specs_[spec.class_id] = spec;
  }

  bool contains(const std::string& id) const { return specs_.count(id) != 0; }

  const ClassSpec& at(const std::string& id) const {
    auto it = specs_.find(id);
    if (it == specs_.end()) throw InvalidInput("unknown class '" + id + "'");
    return it->second;
  }

  ClassSpec& mutable_at(const std::string& id) {
    auto it = specs_.find(id);
    if (it == specs_.end()) throw ConfigError("unknown class '" + id + "'");
    return it->second;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : specs_) out.push_back(id);
    return out;
  }

 private:
  std::map<std::string, ClassSpec> specs_;
};

// Mobile workstation, stationary workstation, mobile storage unit. Heights are the
// measured asset heights; footprints are nominal.
inline ClassRegistry default_class_registry() {
  return ClassRegistry({
      {"MW", {1.2, 0.8, 0.7}, 0},
      {"SW", {1.6, 0.8, 0.82}, 1},
      {"MSU", {0.8, 0.8, 1.8}, 2},
  });
}

}  // namespace obbtrack
