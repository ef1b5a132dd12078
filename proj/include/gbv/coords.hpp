#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbv {

// Thrown on validation failures (bad input data, inconsistent degrees, ...).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Kind { base, fiber };

struct GradedCoordinate {
  std::string name;
  int degree = 0;
  Kind kind = Kind::base;
};

// An ordered list of graded coordinates.  Declaration order fixes the
// canonical monomial order; parity is degree mod 2; fiber-kind coordinates
// carry the truncation filtration.
class CoordinateSystem {
 public:
  static std::shared_ptr<const CoordinateSystem> make(
      std::vector<GradedCoordinate> coords) {
    return std::shared_ptr<const CoordinateSystem>(
        new CoordinateSystem(std::move(coords)));
  }

  int size() const { return int(coords_.size()); }
  const GradedCoordinate& at(int i) const { return coords_.at(i); }
  const std::string& name(int i) const { return coords_.at(i).name; }
  int degree(int i) const { return coords_.at(i).degree; }
  int parity(int i) const { return ((coords_.at(i).degree % 2) + 2) % 2; }
  bool odd(int i) const { return parity(i) == 1; }
  Kind kind(int i) const { return coords_.at(i).kind; }

  int index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown coordinate: " + name);
    return it->second;
  }
  int find(const std::string& name) const {  // -1 when absent
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  bool same_as(const CoordinateSystem& o) const {
    if (this == &o) return true;
    if (coords_.size() != o.coords_.size()) return false;
    for (size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i].name != o.coords_[i].name ||
          coords_[i].degree != o.coords_[i].degree ||
          coords_[i].kind != o.coords_[i].kind)
        return false;
    }
    return true;
  }

 private:
  explicit CoordinateSystem(std::vector<GradedCoordinate> coords)
      : coords_(std::move(coords)) {
    for (size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i].name.empty()) throw Error("coordinate with empty name");
      auto [it, fresh] = index_.emplace(coords_[i].name, int(i));
      (void)it;
      if (!fresh) throw Error("duplicate coordinate name: " + coords_[i].name);
    }
  }

  std::vector<GradedCoordinate> coords_;
  std::map<std::string, int> index_;
};

using CoordsPtr = std::shared_ptr<const CoordinateSystem>;

}  // namespace gbv
