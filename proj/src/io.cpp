#include "bobgmm/io.hpp"

#include "bobgmm/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace bobgmm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t j = 0; j < cells.size(); ++j) numeric = numeric && parse_double(cells[j], row[j]);
        if (!numeric) {
            if (!first) throw InvalidArgument(path + ": non-numeric row " + std::to_string(rows.size() + 1));
            if (header) *header = cells;
            first = false;
            continue;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DimensionError(path + ": ragged row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
        first = false;
    }
    if (rows.empty()) throw InvalidArgument(path + ": no data rows");
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

void write_matrix_csv(const std::string& path, const Matrix& M, const std::vector<std::string>& header) {
    auto out = open_out(path);
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
        out << '\n';
    }
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << M(i, j);
        out << '\n';
    }
}

std::vector<int> read_labels_csv(const std::string& path) {
    const Matrix M = read_matrix_csv(path);
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < M.rows(); ++i) labels.push_back(static_cast<int>(M(i, 0)));
    return labels;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    auto out = open_out(path);
    out << "z\n";
    for (int z : labels) out << z << '\n';
}

void write_draws_csv(const std::string& path, const std::vector<GmmParams>& draws, const std::string& source,
                     const nlohmann::json& extra) {
    if (draws.empty()) throw InvalidArgument("no draws to write");
    const int K = draws.front().num_components();
    const int d = draws.front().dim();
    Matrix M(static_cast<Eigen::Index>(draws.size()), flat_size(K, d));
    for (std::size_t s = 0; s < draws.size(); ++s) M.row(static_cast<Eigen::Index>(s)) = flatten(draws[s]).transpose();
    const auto labels = flat_labels(K, d);
    write_matrix_csv(path, M, labels);
    nlohmann::json meta = {{"source", source},
                                {"K", K},
                                {"d", d},
                                {"M", flat_size(K, d)},
                                {"rows", draws.size()},
                                {"columns", labels},
                                {"layout", "pi_1..pi_{K-1}; then per component mean, then lower triangle of the "
                                           "covariance row by row"}};
    if (extra.is_object()) meta.update(extra);
    write_json(path + ".json", meta);
}

std::vector<GmmParams> read_draws_csv(const std::string& path) {
    nlohmann::json meta;
    {
        auto in = open_in(path + ".json");
        in >> meta;
    }
    const int K = meta.at("K").get<int>();
    const int d = meta.at("d").get<int>();
    const Matrix M = read_matrix_csv(path);
    if (M.cols() != flat_size(K, d)) throw DimensionError(path + ": column count does not match layout");
    std::vector<GmmParams> draws;
    draws.reserve(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index s = 0; s < M.rows(); ++s) draws.push_back(unflatten(M.row(s).transpose(), K, d));
    return draws;
}

void write_trace_csv(const std::string& path, const BoResult& bo) {
    auto out = open_out(path);
    const auto D = bo.trace.empty() ? 0 : bo.trace.front().x.size();
    out << "iteration";
    for (Eigen::Index j = 0; j < D; ++j) out << ",x" << j;
    out << ",upsilon,wall_seconds\n";
    for (const auto& r : bo.trace) {
        out << r.iteration;
        for (Eigen::Index j = 0; j < r.x.size(); ++j) out << ',' << r.x(j);
        out << ',' << r.value << ',' << r.wall_seconds << '\n';
    }
}

namespace {

std::vector<double> to_vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const GmmParams& p) {
    nlohmann::json j;
    j["weights"] = to_vec(p.weights);
    j["means"] = nlohmann::json::array();
    j["covs"] = nlohmann::json::array();
    for (int k = 0; k < p.num_components(); ++k) {
        j["means"].push_back(to_vec(p.means[static_cast<std::size_t>(k)]));
        const Matrix& C = p.covs[static_cast<std::size_t>(k)];
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < C.rows(); ++r) rows.push_back(to_vec(C.row(r).transpose()));
        j["covs"].push_back(rows);
    }
    return j;
}

nlohmann::json to_json(const MethodMetrics& m) {
    return {{"method", m.method}, {"tv", m.tv}, {"ks", m.ks}, {"S", m.S}, {"seed", m.seed},
            {"elapsed", m.elapsed_seconds}, {"elapsed_seconds", m.elapsed_seconds}};
}

nlohmann::json to_json(const MetricSummary& s) {
    return {{"method", s.method},         {"runs", s.runs},           {"tv_median", s.tv_median},
            {"tv_iqr", s.tv_iqr},         {"ks_median", s.ks_median}, {"ks_iqr", s.ks_iqr},
            {"elapsed_median", s.elapsed_median}, {"elapsed_iqr", s.elapsed_iqr}};
}

namespace {

std::string to_string(CovarianceUpdate u) {
    return u == CovarianceUpdate::surrogate_mode ? "surrogate_mode" : "marginal_mode";
}

CovarianceUpdate parse_covariance_update(const std::string& s) {
    if (s == "surrogate_mode") return CovarianceUpdate::surrogate_mode;
    if (s == "marginal_mode") return CovarianceUpdate::marginal_mode;
    throw InvalidArgument("unknown covariance_update '" + s + "'");
}

IncumbentRule parse_incumbent(const std::string& s) {
    if (s == "posterior_mean") return IncumbentRule::posterior_mean;
    if (s == "raw_best") return IncumbentRule::raw_best;
    throw InvalidArgument("unknown incumbent rule '" + s + "'");
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    maybe(j, "K", c.K);
    if (j.contains("scheme")) c.scheme.variant = parse_weight_variant(j.at("scheme").get<std::string>());
    if (j.contains("x")) c.scheme.bob_x = from_vec(j.at("x").get<std::vector<double>>());
    maybe(j, "dirichlet_likelihood", c.scheme.dirichlet_likelihood);
    if (j.contains("likelihood_scale"))
        c.scheme.likelihood_scale = parse_likelihood_scale(j.at("likelihood_scale").get<std::string>());
    maybe(j, "S", c.S);
    maybe(j, "batch_size", c.batch_size);
    if (j.contains("bo")) {
        const auto& b = j.at("bo");
        maybe(b, "n_init", c.bo_budget.n_init);
        maybe(b, "n_iter", c.bo_budget.n_iter);
        maybe(b, "n_candidates", c.acquisition.n_candidates);
        maybe(b, "n_refine", c.acquisition.n_refine);
        if (b.contains("incumbent")) c.acquisition.incumbent = parse_incumbent(b.at("incumbent").get<std::string>());
    }
    if (j.contains("box")) {
        const auto& b = j.at("box");
        c.search_box = SearchBox{from_vec(b.at("lower").get<std::vector<double>>()),
                                 from_vec(b.at("upper").get<std::vector<double>>())};
    } else if (j.contains("box_upper")) {
        c.search_box = default_bob_box(c.K, j.at("box_upper").get<double>());
    }
    if (j.contains("prior")) {
        const auto& p = j.at("prior");
        maybe(p, "concentration", c.prior.concentration);
        if (p.contains("lambda") && !p.at("lambda").is_null()) c.prior.lambda = p.at("lambda").get<double>();
        if (p.contains("nu") && !p.at("nu").is_null()) c.prior.nu = p.at("nu").get<double>();
        maybe(p, "grid_lambda", c.prior.grid_lambda);
        maybe(p, "grid_nu", c.prior.grid_nu);
        maybe(p, "split_fraction", c.prior.split_fraction);
    }
    if (j.contains("em")) {
        const auto& e = j.at("em");
        maybe(e, "max_iter", c.em.max_iter);
        maybe(e, "tol", c.em.tol);
        if (e.contains("covariance_update"))
            c.em.covariance_update = parse_covariance_update(e.at("covariance_update").get<std::string>());
        if (e.contains("tempering") && !e.at("tempering").is_null()) {
            const auto& t = e.at("tempering");
            TemperingProfile prof;
            maybe(t, "a", prof.a);
            maybe(t, "b", prof.b);
            maybe(t, "c", prof.c);
            maybe(t, "r", prof.r);
            c.em.profile = prof;
        }
    }
    maybe(j, "tune_tempering", c.tune_tempering);
    maybe(j, "init_restarts", c.init_restarts);
    maybe(j, "max_failure_fraction", c.max_failure_fraction);
    maybe(j, "seed", c.seed);
    if (j.contains("exec")) {
        const auto e = j.at("exec").get<std::string>();
        if (e == "serial")
            c.exec = Exec::serial;
        else if (e == "parallel")
            c.exec = Exec::parallel;
        else
            throw InvalidArgument("exec must be serial or parallel");
    }
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["K"] = c.K;
    j["scheme"] = to_string(c.scheme.variant);
    if (c.scheme.bob_x.size() > 0) j["x"] = to_vec(c.scheme.bob_x);
    j["dirichlet_likelihood"] = c.scheme.dirichlet_likelihood;
    j["likelihood_scale"] = to_string(c.scheme.likelihood_scale);
    j["S"] = c.S;
    j["batch_size"] = c.batch_size;
    j["bo"] = {{"n_init", c.bo_budget.n_init},
               {"n_iter", c.bo_budget.n_iter},
               {"n_candidates", c.acquisition.n_candidates},
               {"n_refine", c.acquisition.n_refine},
               {"incumbent", c.acquisition.incumbent == IncumbentRule::raw_best ? "raw_best" : "posterior_mean"}};
    if (c.search_box) j["box"] = {{"lower", to_vec(c.search_box->lower)}, {"upper", to_vec(c.search_box->upper)}};
    j["prior"] = {{"concentration", c.prior.concentration},
                  {"grid_lambda", c.prior.grid_lambda},
                  {"grid_nu", c.prior.grid_nu},
                  {"split_fraction", c.prior.split_fraction}};
    if (c.prior.lambda) j["prior"]["lambda"] = *c.prior.lambda;
    if (c.prior.nu) j["prior"]["nu"] = *c.prior.nu;
    j["em"] = {{"max_iter", c.em.max_iter}, {"tol", c.em.tol},
               {"covariance_update", to_string(c.em.covariance_update)}};
    if (c.em.profile)
        j["em"]["tempering"] = {{"a", c.em.profile->a}, {"b", c.em.profile->b}, {"c", c.em.profile->c},
                                {"r", c.em.profile->r}};
    j["tune_tempering"] = c.tune_tempering;
    j["init_restarts"] = c.init_restarts;
    j["max_failure_fraction"] = c.max_failure_fraction;
    j["seed"] = c.seed;
    j["exec"] = c.exec == Exec::serial ? "serial" : "parallel";
    return j;
}

nlohmann::json read_json(const std::string& path) {
    auto in = open_in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
    return j;
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(read_json(path)); }

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

}  // namespace bobgmm
