#pragma once

#include <string>
#include <utility>
#include <vector>

namespace nvb {

/// Outcome of a verifier: empty violation list means the check passed.
struct Report {
  std::vector<std::string> violations;
  std::vector<std::string> notes;

  bool ok() const { return violations.empty(); }
  void fail(std::string msg) { violations.push_back(std::move(msg)); }
  void note(std::string msg) { notes.push_back(std::move(msg)); }
  void merge(const Report& o) {
    violations.insert(violations.end(), o.violations.begin(), o.violations.end());
    notes.insert(notes.end(), o.notes.begin(), o.notes.end());
  }
};

}  // namespace nvb
