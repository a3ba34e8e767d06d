#pragma once

#include <iosfwd>
#include <string>

namespace grbf {

struct SelfTestOptions {
  bool mutate = false;       // corrupt one sign inside the moment expansion;
                             // the agreement suite must then report failures
  bool verbose = false;      // print every check, not just failures
  std::string suite_filter;  // substring match on suite names; empty runs all
};

struct SelfTestSummary {
  int suites = 0;
  int checks = 0;
  int failures = 0;
  bool passed() const { return suites > 0 && failures == 0; }
};

// Runs the built-in invariant suites: every identity the integration engine
// and the assembled systems are supposed to satisfy, checked against
// independent routes (quadrature, naive loops, closed forms). One line per
// suite is written to `out`.
SelfTestSummary run_selftest(const SelfTestOptions& options, std::ostream& out);

}  // namespace grbf
