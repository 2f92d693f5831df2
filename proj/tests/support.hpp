#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "msci/series.hpp"

namespace testsupport {

// Puck positions, t = 0..19, as printed.
inline const std::vector<double> table1_values{0,   7,   20,  39,  64,  95,  132, 175, 224, 279,
                                               340, 407, 480, 559, 644, 735, 832, 935, 1044, 1159};

// Coin walk rows (q, x), x0 = 0 implicit.
inline const std::vector<msci::Sample> table2_rows{
    {1, -1}, {0, 0}, {0, 1}, {1, 0}, {0, 1}, {1, 0}, {1, -1}, {0, 0}, {0, 1}, {0, 2},
    {0, 3},  {1, 2}, {1, 1}, {0, 2}, {1, 1}, {1, 0}, {0, 1},  {1, 0}, {1, -1}, {0, 0}};

inline msci::TimeSeries table1() { return msci::derive_states(table1_values); }
inline msci::TimeSeries table2() { return msci::TimeSeries::from_samples(0.0, table2_rows); }

inline std::string data_file(const std::string& name) { return std::string(MSCI_TEST_DATA) + "/" + name; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("msci_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport
