#include <cnslab/acceptance.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    std::string suite = argc > 1 ? argv[1] : "all";
    int jobs = 1;
    if (const char* env = std::getenv("CNSLAB_JOBS")) jobs = std::max(1, std::atoi(env));
    try {
        auto results = cnslab::acceptance::run_suite(cnslab::acceptance::suite_ids(suite), jobs,
                                                     [](const auto& r) { std::cout << r.line() << std::endl; });
        int failed = 0;
        for (auto& r : results) failed += !r.pass;
        std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
        return failed ? 1 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
