// Copyright 2026 The retrotrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the acceptance criteria and prints one verdict line per criterion.

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenarios.h"

#ifndef RETROTRACE_TOPOLOGY_DIR
#define RETROTRACE_TOPOLOGY_DIR "topologies"
#endif

int main(int argc, char** argv) {
  namespace rc = retrotrace::check;
  CLI::App app{"retrotrace acceptance criteria"};
  rc::AcceptanceOptions opt;
  opt.topologies = RETROTRACE_TOPOLOGY_DIR;
  std::string topologies = opt.topologies.string();
  std::vector<std::string> only;
  app.add_option("--topologies", topologies, "Directory of topology files")
      ->check(CLI::ExistingDirectory);
  app.add_option("--seed", opt.seed, "Seed for workloads and property cases");
  app.add_option("--only", only, "Run only these criteria (e.g. AC3)");
  CLI11_PARSE(app, argc, argv);
  opt.topologies = topologies;

  const std::set<std::string> wanted(only.begin(), only.end());
  int failed = 0, ran = 0;
  for (const auto& c : rc::criteria()) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    rc::CriterionResult r;
    try {
      r = c.run(opt);
    } catch (const std::exception& e) {
      r.id = c.id;
      r.title = "error";
      r.pass = false;
      r.detail = e.what();
    }
    ran++;
    if (!r.pass) failed++;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.title
              << ": " << r.detail << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 && ran > 0 ? 0 : 1;
}
