#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "acceptance.hpp"

// Runs the acceptance criteria (all, or the ids given as arguments) and
// prints one line per criterion.
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    int failed = 0;
    travwave::acceptance::run(only, [&](const travwave::acceptance::CriterionResult& r) {
        std::printf("%s\n", r.line().c_str());
        std::fflush(stdout);
        if (!r.passed) ++failed;
    });
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
