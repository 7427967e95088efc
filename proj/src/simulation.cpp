#include "bobgmm/simulation.hpp"

#include "bobgmm/errors.hpp"
#include "bobgmm/rng.hpp"
#include "bobgmm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bobgmm {

SimSetting sim_setting(int id) {
    if (id < 1 || id > 9) throw InvalidArgument("simulation setting id must be 1..9");
    static constexpr int ns[] = {50, 50, 50, 100, 100, 100, 150, 150, 150};
    static constexpr int ds[] = {5, 10, 15, 5, 10, 15, 5, 10, 15};
    static constexpr int Ks[] = {2, 2, 2, 3, 3, 3, 4, 4, 4};
    return {ns[id - 1], ds[id - 1], Ks[id - 1], id};
}

void validate(const SimSetting& s) {
    if (s.n < 1 || s.d < 1 || s.K < 1) throw InvalidArgument("simulation needs n, d, K >= 1");
}

Vector true_mean(int k, int d) {
    const int active = (3 * d + 4) / 5;  // ceil(0.6 d)
    Vector mu = Vector::Zero(d);
    mu.head(active).setConstant(5.0 * k - 4.0);
    return mu;
}

SimulatedData generate_simulation(const SimSetting& setting, std::uint64_t seed) {
    validate(setting);
    std::vector<Vector> mus;
    for (int k = 1; k <= setting.K; ++k) mus.push_back(true_mean(k, setting.d));
    Matrix Y(setting.n, setting.d);
    std::vector<int> labels(static_cast<std::size_t>(setting.n));
    for (int i = 0; i < setting.n; ++i) {
        StreamRng rng(seed, stream_id(StreamTag::simulate, 0, static_cast<std::uint64_t>(i)));
        const int z = std::min(setting.K - 1, static_cast<int>(rng.uniform() * setting.K));
        labels[static_cast<std::size_t>(i)] = z;
        for (int j = 0; j < setting.d; ++j) Y(i, j) = mus[static_cast<std::size_t>(z)](j) + sample_standard_normal(rng);
    }
    return {std::move(Y), LabelMatrix::from_labels(labels, setting.K)};
}

Matrix Standardization::apply(const Matrix& Y) const {
    if (Y.cols() != mean.size()) throw DimensionError("standardization dimension mismatch");
    return (Y.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Matrix Standardization::invert(const Matrix& Z) const {
    if (Z.cols() != mean.size()) throw DimensionError("standardization dimension mismatch");
    return (Z.array().rowwise() * sd.transpose().array()).matrix().rowwise() + mean.transpose();
}

std::pair<Matrix, Standardization> standardize(const Matrix& Y) {
    if (Y.rows() < 2) throw InvalidArgument("standardize needs at least two rows");
    Standardization st;
    st.mean = Y.colwise().mean().transpose();
    st.sd.resize(Y.cols());
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        const double ss = (Y.col(j).array() - st.mean(j)).square().sum();
        st.sd(j) = std::sqrt(ss / static_cast<double>(Y.rows() - 1));
        if (!(st.sd(j) > 0.0)) throw InvalidArgument("column " + std::to_string(j) + " is constant");
    }
    return {st.apply(Y), st};
}

}  // namespace bobgmm
