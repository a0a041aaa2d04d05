// Acceptance gate: prints one pass/fail line per criterion.  The exit
// status is the number of failed criteria, 2 for an unknown group name,
// and 3 when a criterion aborts with an exception.

#include <cstdio>
#include <exception>
#include <set>
#include <string>

#include "kpp/acceptance.hpp"

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "all";
  static const std::set<std::string> known = {"all", "fast", "linear",
                                              "routes", "front"};
  if (known.count(group) == 0) {
    std::fprintf(stderr, "usage: %s [all|fast|linear|routes|front]\n", argv[0]);
    return 2;
  }
  try {
    return kpp::acceptance::print_and_score(kpp::acceptance::run_group(group));
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", ex.what());
    return 3;
  }
}
