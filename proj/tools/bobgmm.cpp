// Command-line driver: simulate, tune, sample, oracle, predictive, compare.
#include "bobgmm/errors.hpp"
#include "bobgmm/init.hpp"
#include "bobgmm/io.hpp"
#include "bobgmm/oracle.hpp"
#include "bobgmm/parallel.hpp"
#include "bobgmm/pipeline.hpp"
#include "bobgmm/predictive.hpp"
#include "bobgmm/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace bobgmm;
using nlohmann::json;

namespace {

struct Common {
    std::vector<std::string> configs;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> K, S, batch_size, bo_init, bo_iter, init_restarts;
    std::optional<double> lambda, nu, concentration;
    std::optional<std::string> exec, likelihood_scale;
    bool no_tune_tempering = false;
};

void add_common(CLI::App* app, Common& c, bool needs_seed) {
    app->add_option("-c,--config", c.configs, "JSON config; later files override earlier ones")
        ->check(CLI::ExistingFile);
    app->add_option("--set", c.sets, "override any config field, e.g. em.max_iter=500 or bo.incumbent=\"raw_best\"");
    auto* seed = app->add_option("--seed", c.seed, "master seed");
    if (needs_seed) seed->required();
    app->add_option("-K,--components", c.K);
    app->add_option("-S,--draws", c.S, "posterior draws");
    app->add_option("--batch-size", c.batch_size, "draws per objective evaluation");
    app->add_option("--bo-init", c.bo_init);
    app->add_option("--bo-iter", c.bo_iter);
    app->add_option("--init-restarts", c.init_restarts);
    app->add_option("--lambda", c.lambda, "fix lambda (skips its CV)");
    app->add_option("--nu", c.nu, "fix nu (skips its CV)");
    app->add_option("--concentration", c.concentration);
    app->add_option("--exec", c.exec)->check(CLI::IsMember({"serial", "parallel"}));
    app->add_option("--likelihood-scale", c.likelihood_scale, "normalized likelihood weights sum to 1 (unit) or n")
        ->check(CLI::IsMember({"unit", "n"}));
    app->add_flag("--no-tune-tempering", c.no_tune_tempering);
}

// "a.b.c=v": v is parsed as JSON when it can be, else kept as a string.
void apply_set(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects key=value, got '" + assignment + "'");
    std::string ptr = "/" + assignment.substr(0, eq);
    for (auto& ch : ptr)
        if (ch == '.') ch = '/';
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    j[json::json_pointer(ptr)] = value;
}

json merged_config(const Common& c) {
    json j = json::object();
    for (const auto& path : c.configs) j.merge_patch(read_json(path));
    if (c.K) j["K"] = *c.K;
    if (c.S) j["S"] = *c.S;
    if (c.batch_size) j["batch_size"] = *c.batch_size;
    if (c.bo_init) j["bo"]["n_init"] = *c.bo_init;
    if (c.bo_iter) j["bo"]["n_iter"] = *c.bo_iter;
    if (c.init_restarts) j["init_restarts"] = *c.init_restarts;
    if (c.lambda) j["prior"]["lambda"] = *c.lambda;
    if (c.nu) j["prior"]["nu"] = *c.nu;
    if (c.concentration) j["prior"]["concentration"] = *c.concentration;
    if (c.exec) j["exec"] = *c.exec;
    if (c.likelihood_scale) j["likelihood_scale"] = *c.likelihood_scale;
    if (c.no_tune_tempering) j["tune_tempering"] = false;
    if (c.seed) j["seed"] = *c.seed;
    for (const auto& s : c.sets) apply_set(j, s);
    return j;
}

struct Data {
    std::string path;
    bool raw = false;
};

void add_data(CLI::App* app, Data& d) {
    app->add_option("-d,--data", d.path, "data matrix CSV (rows are observations)")->required()->check(CLI::ExistingFile);
    app->add_flag("--raw", d.raw, "skip column standardization");
}

Matrix load_data(const Data& d) {
    Matrix Y = read_matrix_csv(d.path);
    return d.raw ? Y : standardize(Y).first;
}

void log_line(const std::string& msg) { std::clog << msg << '\n'; }

json tempering_fragment(const Problem& p) {
    json j;
    j["prior"] = {{"lambda", p.lambda}, {"nu", p.nu}};
    if (p.em.profile)
        j["em"]["tempering"] = {{"a", p.em.profile->a}, {"b", p.em.profile->b}, {"c", p.em.profile->c},
                                {"r", p.em.profile->r}};
    if (p.tempering) {
        j["tempering_index"] = p.tempering->index;
        json scores = json::array();
        for (const auto& sc : p.tempering->scores) scores.push_back(sc ? json(*sc) : json());
        j["tempering_scores"] = scores;
    }
    return j;
}

int run(int argc, char** argv) {
    CLI::App app{"Posterior sampling for Gaussian mixtures by optimized weighted bootstrap"};
    app.require_subcommand(1);

    if (const char* env = std::getenv("BOBGMM_THREADS")) {
        const int n = std::atoi(env);
        if (n < 1) throw InvalidArgument("BOBGMM_THREADS must be a positive integer");
        set_worker_count(n);
    }

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a tabulated or custom simulation data set");
    int setting = 1;
    SimSetting custom{0, 0, 0, 0};
    std::uint64_t sim_seed = 0;
    std::string out_dir = ".";
    sim->add_option("--setting", setting, "tabulated setting 1..9")->check(CLI::Range(1, 9));
    sim->add_option("-n", custom.n, "custom sample size (with -p and -k)");
    sim->add_option("-p,--dim", custom.d);
    sim->add_option("-k,--components", custom.K);
    sim->add_option("--seed", sim_seed)->required();
    sim->add_option("-o,--out-dir", out_dir);

    // tune-temper
    auto* tt = app.add_subcommand("tune-temper", "select lambda, nu and the tempering profile");
    Common tt_c;
    Data tt_d;
    std::string tt_out = "tempering.json";
    add_common(tt, tt_c, true);
    add_data(tt, tt_d);
    tt->add_option("-o,--out", tt_out, "config fragment to pass to later commands");

    // tune-bob
    auto* tb = app.add_subcommand("tune-bob", "tune the BOB hyperparameters x by Bayesian optimization");
    Common tb_c;
    Data tb_d;
    std::string tb_out = "bob_x.json", tb_trace;
    add_common(tb, tb_c, true);
    add_data(tb, tb_d);
    tb->add_option("-o,--out", tb_out);
    tb->add_option("--trace", tb_trace, "BO trace CSV");

    // sample
    auto* sa = app.add_subcommand("sample", "draw approximate posterior samples");
    Common sa_c;
    Data sa_d;
    std::string scheme, sa_out = "draws.csv", sa_trace;
    std::optional<std::vector<double>> sa_x;
    bool dirichlet = false;
    add_common(sa, sa_c, true);
    add_data(sa, sa_d);
    sa->add_option("--scheme", scheme)->required()->check(CLI::IsMember({"bob", "wbb1", "wbb2", "wlb"}));
    sa->add_option("--x", sa_x, "fixed BOB hyperparameters; skips tuning")->expected(1, -1);
    sa->add_flag("--dirichlet-likelihood", dirichlet, "WBB: normalize likelihood weights onto the simplex");
    sa->add_option("-o,--out", sa_out);
    sa->add_option("--trace", sa_trace, "BO trace CSV (bob only)");

    // oracle
    auto* orc = app.add_subcommand("oracle", "exact conditional posterior draws given known labels");
    Common or_c;
    Data or_d;
    std::string labels_path, or_out = "oracle.csv";
    add_common(orc, or_c, true);
    add_data(orc, or_d);
    orc->add_option("-z,--labels", labels_path)->required()->check(CLI::ExistingFile);
    orc->add_option("-o,--out", or_out);

    // predictive
    auto* pr = app.add_subcommand("predictive", "sample one predictive point per posterior draw");
    std::string pr_in, pr_out = "predictive.csv";
    std::uint64_t pr_seed = 0;
    std::uint64_t pr_major = 0;
    pr->add_option("-i,--draws", pr_in)->required()->check(CLI::ExistingFile);
    pr->add_option("--seed", pr_seed)->required();
    pr->add_option("--stream", pr_major, "stream index; 0 is reserved for the oracle in compare");
    pr->add_option("-o,--out", pr_out);

    // compare
    auto* cmp = app.add_subcommand("compare", "TV and KS distances to the oracle predictive");
    std::string cmp_oracle, cmp_out = "metrics.json";
    std::vector<std::string> cmp_methods, cmp_runs;
    std::uint64_t cmp_seed = 0;
    std::size_t s_pred = 20000;
    int tv_bins = kDefaultTvBins;
    cmp->add_option("--oracle", cmp_oracle)->check(CLI::ExistingFile);
    cmp->add_option("--method", cmp_methods, "draw CSVs to compare")->check(CLI::ExistingFile);
    cmp->add_option("--seed", cmp_seed);
    cmp->add_option("--predictive-draws", s_pred);
    cmp->add_option("--tv-bins", tv_bins)->check(CLI::PositiveNumber);
    cmp->add_option("--summarize", cmp_runs, "metrics JSON files from repeated runs; prints medians and IQRs")
        ->check(CLI::ExistingFile);
    cmp->add_option("-o,--out", cmp_out);

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        SimSetting s = sim_setting(setting);
        if (custom.n > 0 || custom.d > 0 || custom.K > 0) {
            if (custom.n < 1 || custom.d < 1 || custom.K < 1) throw InvalidArgument("custom settings need -n, -p and -k");
            s = custom;
        }
        const auto data = generate_simulation(s, sim_seed);
        std::filesystem::create_directories(out_dir);
        std::vector<std::string> header;
        for (int j = 0; j < s.d; ++j) header.push_back("y" + std::to_string(j + 1));
        write_matrix_csv(out_dir + "/Y.csv", data.Y, header);
        write_labels_csv(out_dir + "/Z.csv", data.Z.labels());
        log_line("wrote " + out_dir + "/Y.csv and Z.csv (n=" + std::to_string(s.n) + ", d=" + std::to_string(s.d) +
                 ", K=" + std::to_string(s.K) + ")");
        return 0;
    }

    if (tt->parsed()) {
        RunConfig cfg = run_config_from_json(merged_config(tt_c));
        cfg.tune_tempering = true;
        cfg.em.profile.reset();
        const Problem p = prepare_problem(load_data(tt_d), cfg);
        write_json(tt_out, tempering_fragment(p));
        log_line("lambda=" + std::to_string(p.lambda) + " nu=" + std::to_string(p.nu) + "; wrote " + tt_out);
        return 0;
    }

    if (tb->parsed()) {
        RunConfig cfg = run_config_from_json(merged_config(tb_c));
        cfg.scheme.variant = WeightVariant::bob;
        cfg.scheme.bob_x = Vector();
        cfg.S = 1;
        const Problem p = prepare_problem(load_data(tb_d), cfg);
        const BobConfig bc = bob_config(cfg, p);
        std::uint64_t eval_index = 0;
        const BlackBox f = [&](const Vector& x) {
            return objective_for_optimizer(x, p.Y, p.prior, p.init, bc, cfg.seed, eval_index++);
        };
        const BoResult bo = maximize(f, bc.search_space, cfg.bo_budget, cfg.seed, cfg.acquisition);
        json j = tempering_fragment(p);
        j["scheme"] = "bob";
        j["likelihood_scale"] = to_string(cfg.scheme.likelihood_scale);
        j["x"] = std::vector<double>(bo.best_x.data(), bo.best_x.data() + bo.best_x.size());
        j["objective"] = bo.best_value;
        j["failed_evaluations"] = bo.failed;
        write_json(tb_out, j);
        if (!tb_trace.empty()) write_trace_csv(tb_trace, bo);
        log_line("x* written to " + tb_out);
        return 0;
    }

    if (sa->parsed()) {
        json j = merged_config(sa_c);
        j["scheme"] = scheme;
        if (sa_x) j["x"] = *sa_x;
        if (dirichlet) j["dirichlet_likelihood"] = true;
        const RunConfig cfg = run_config_from_json(j);
        const Problem p = prepare_problem(load_data(sa_d), cfg);
        DrawSet set;
        if (cfg.scheme.variant == WeightVariant::bob && cfg.scheme.bob_x.size() > 0) {
            validate(cfg.scheme, cfg.K);
            set = sample_draws(p, cfg.scheme, cfg.S, cfg.seed, cfg.exec, cfg.max_failure_fraction);
        } else if (cfg.scheme.variant == WeightVariant::bob) {
            BobRun r = run_bob(p, cfg);
            if (!sa_trace.empty()) write_trace_csv(sa_trace, r.bo);
            std::ostringstream xs;
            for (Eigen::Index i = 0; i < r.x_star.size(); ++i) xs << (i ? "," : "") << r.x_star(i);
            log_line("x* = (" + xs.str() + ")");
            set = std::move(r.draws);
        } else {
            set = run_wbb(p, cfg);
        }
        write_draws_csv(sa_out, set.draws, set.label,
                        {{"elapsed", set.elapsed_seconds}, {"dropped", set.failed.size()}, {"seed", cfg.seed}});
        log_line(set.label + ": " + std::to_string(set.draws.size()) + " draws, " + std::to_string(set.failed.size()) +
                 " dropped, " + std::to_string(set.elapsed_seconds) + " s");
        return 0;
    }

    if (orc->parsed()) {
        const RunConfig cfg = run_config_from_json(merged_config(or_c));
        validate(cfg);
        const Matrix Y = load_data(or_d);
        const auto [lambda, nu] = resolve_lambda_nu(Y, cfg);
        const auto prior = NiwDirichletPrior::symmetric(cfg.K, static_cast<int>(Y.cols()), cfg.prior.concentration,
                                                        lambda, nu);
        const auto Z = LabelMatrix::from_labels(read_labels_csv(labels_path), cfg.K);
        const auto draws = sample_bayes_posterior(posterior_hyper(Y, Z, prior), static_cast<std::size_t>(cfg.S),
                                                  cfg.seed, cfg.exec);
        write_draws_csv(or_out, draws, "bayes");
        log_line("bayes: " + std::to_string(draws.size()) + " draws");
        return 0;
    }

    if (pr->parsed()) {
        const auto draws = read_draws_csv(pr_in);
        const auto pd = sample_predictive(draws, pr_seed, pr_major, pr_in);
        write_matrix_csv(pr_out, pd.samples);
        return 0;
    }

    if (cmp->parsed()) {
        if (!cmp_runs.empty()) {
            std::vector<std::vector<MethodMetrics>> runs;
            for (const auto& path : cmp_runs) {
                std::vector<MethodMetrics> run;
                const json doc = read_json(path);
                for (const auto& m : doc.at("methods"))
                    run.push_back({m.at("method"), m.at("tv"), m.at("ks"), m.at("elapsed"), m.value("S", 0u),
                                   m.value("seed", std::uint64_t{0})});
                runs.push_back(std::move(run));
            }
            json out = json::array();
            for (const auto& s : summarize_runs(runs)) out.push_back(to_json(s));
            write_json(cmp_out, {{"summary", out}});
            std::cout << out.dump(2) << '\n';
            return 0;
        }
        if (cmp_oracle.empty() || cmp_methods.empty())
            throw InvalidArgument("compare needs --oracle and at least one --method, or --summarize");
        if (cmp->count("--seed") == 0) throw InvalidArgument("compare needs --seed");
        const auto bayes = read_draws_csv(cmp_oracle);
        std::vector<DrawSet> sets;
        for (const auto& path : cmp_methods) {
            DrawSet s;
            s.label = std::filesystem::path(path).stem().string();
            s.draws = read_draws_csv(path);
            s.elapsed_seconds = read_json(path + ".json").value("elapsed", 0.0);
            sets.push_back(std::move(s));
        }
        const auto metrics = compare_methods(bayes, sets, s_pred, cmp_seed, tv_bins);
        json out = json::array();
        for (const auto& m : metrics) out.push_back(to_json(m));
        write_json(cmp_out, {{"methods", out}});
        std::cout << out.dump(2) << '\n';
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
