#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace optistat {

enum class FamilyMode { one_vs_all, all_pairs };

struct Hypothesis {
  std::size_t i = 0;  // control (one_vs_all) or first algorithm
  std::size_t j = 0;
  double z = 0;
  double raw_p = 1;
  double adjusted_p = 1;
  bool rejected = false;
};

/// An ordered family of pairwise hypotheses H_ij: algorithm i equivalent to j.
struct HypothesisFamily {
  FamilyMode mode = FamilyMode::all_pairs;
  std::vector<std::string> algorithms;
  std::vector<Hypothesis> hypotheses;
  std::string method = "raw";
  double alpha = 0.05;
  bool degenerate = false;
  std::vector<std::string> notes;

  std::size_t size() const { return hypotheses.size(); }

  const Hypothesis& find(std::size_t a, std::size_t b) const {
    for (const auto& h : hypotheses)
      if ((h.i == a && h.j == b) || (h.i == b && h.j == a)) return h;
    throw UnknownIdError("hypothesis not in family");
  }
  const Hypothesis& find(const std::string& a, const std::string& b) const {
    return find(index(a), index(b));
  }

  std::size_t index(const std::string& name) const {
    for (std::size_t t = 0; t < algorithms.size(); ++t)
      if (algorithms[t] == name) return t;
    throw UnknownIdError("unknown algorithm '" + name + "'");
  }
};

}  // namespace optistat
