#pragma once

#include "bobgmm/gmm.hpp"
#include "bobgmm/oracle.hpp"

#include <cstdint>

namespace bobgmm {

struct SimSetting {
    int n = 50;
    int d = 5;
    int K = 2;
    int setting_id = 0;  ///< 1..9 for the tabulated settings, 0 for custom
};

/// Tabulated settings 1..9.
SimSetting sim_setting(int id);
void validate(const SimSetting& s);

/// mu_k: first ceil(0.6 d) entries equal 5k - 4 (k 1-based), rest 0.
Vector true_mean(int k, int d);

struct SimulatedData {
    Matrix Y;
    LabelMatrix Z;
};

/// z_i uniform over K, y_i ~ N(mu_{z_i}, I). Row i uses stream (simulate, 0, i).
SimulatedData generate_simulation(const SimSetting& setting, std::uint64_t seed);

struct Standardization {
    Vector mean;
    Vector sd;  ///< n - 1 denominator

    Matrix apply(const Matrix& Y) const;
    Matrix invert(const Matrix& Z) const;
};

/// Column-wise z-scores. Throws InvalidArgument naming a constant column.
std::pair<Matrix, Standardization> standardize(const Matrix& Y);

}  // namespace bobgmm
