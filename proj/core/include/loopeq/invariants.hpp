#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

// Randomized sweep over the loop-operation lemmas.  Each generated string is
// anchored at an edge position admitting the operation class under test and
// every operation at that anchor is checked against the lemma set:
//
//   split    iota drops by at least one; area unchanged
//   merge    iota grows by at most one; area unchanged
//   deform   iota grows by at most one; area(s) <= area(s') + 1;
//            at most 4d deformations per anchor
//   revive   iota unchanged; result count matches the closed form
//            prod_p (K(p)+1)(K(p)+2)/2 - 1; boundary inequality
//            |dQ| <= 8(d-1)|Q| for the stuck component
//   counts   splittings and mergers per anchor at most 2dB once B covers
//            the maximal edge occupancy
//
// The sweep is deterministic in (seed, options) and single threaded.

namespace loopeq {

struct InvariantCounts {
  long long cases = 0;   // anchored strings examined
  long long checks = 0;  // individual inequalities evaluated
  long long violations = 0;
};

struct InvariantWitness {
  std::string lemma;
  std::string detail;  // serialized instance: lattice, loops, operation
};

struct InvariantReport {
  std::map<std::string, InvariantCounts> lemmas;
  std::vector<InvariantWitness> witnesses;  // truncated at witness_cap
  long long generation_attempts = 0;

  long long total_checks() const;
  long long total_violations() const;
  bool passed() const;
  // Rows "lemma,cases,checks,violations" with a header, newline terminated.
  std::string to_csv() const;
};

struct InvariantSuiteOptions {
  long long cases = 1000;  // per operation class and lattice
  uint64_t seed = 7;
  std::vector<std::pair<int, int>> lattices = {{3, 2}, {2, 3}};  // (L, d)
  int max_len = 16;
  int max_loops = 3;
  int area_cap = 32;
  size_t witness_cap = 20;
  // Harness self-check: shifts the measured iota of every operation result
  // by this many quarter units.  Any nonzero value must produce violations.
  int iota_bias_quarters = 0;
};

InvariantReport run_invariant_suite(const InvariantSuiteOptions& opt = {});

}  // namespace loopeq
