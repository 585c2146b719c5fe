// Command-line front end: simulate | volterra | fit | study.
// Configs are JSON; outputs are CSV/JSON plus a run manifest.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ecmabund/ecmabund.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ecmabund;

namespace {

constexpr const char* kVersion = "1.0.0";

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return j;
}

DesignSpec design_from_json(const json& j) {
    DesignSpec d;
    if (j.contains("design")) {
        const json& dj = j.at("design");
        d.nx = dj.value("nx", d.nx);
        d.ny = dj.value("ny", d.ny);
        d.cell_side = dj.value("cell_side", d.cell_side);
        d.t0 = dj.value("t0", d.t0);
        if (dj.contains("check_times")) d.check_times = dj.at("check_times").get<std::vector<double>>();
        d.tL = dj.value("tL", d.check_times.front());
        d.tH = dj.value("tH", d.check_times.back());
        d.dt = dj.value("dt", d.dt);
    }
    return d;
}

ModelTag model_from_string(const std::string& s) {
    if (s == "snapshot") return ModelTag::snapshot;
    if (s == "capture") return ModelTag::capture;
    if (s == "ecodiff") return ModelTag::ecodiff;
    throw std::runtime_error("unknown model: " + s + " (expected snapshot|capture|ecodiff)");
}

void write_manifest(const fs::path& outdir, const std::string& subcommand, const std::string& config_path,
                    std::uint64_t seed, double seconds, const std::vector<std::string>& outputs, bool ok) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config_path;
    m["output_dir"] = outdir.string();
    m["seed"] = seed;
    m["version"] = kVersion;
    m["elapsed_seconds"] = seconds;
    m["outputs"] = outputs;
    m["completed"] = ok;
    std::ofstream out(outdir / "manifest.json");
    out << m.dump(2) << '\n';
}

int resolve_threads(int threads_flag) {
    if (const char* env = std::getenv("ECMABUND_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return threads_flag > 0 ? threads_flag : 1;
}

struct CommonArgs {
    std::string config, out = ".", data;
    std::uint64_t seed = 1;
    int threads = 1;
    bool markov = false;
    int replications = -1;
};

int cmd_simulate(const CommonArgs& a) {
    const auto t_start = std::chrono::steady_clock::now();
    const json cfg = load_config(a.config);
    const DesignSpec spec = design_from_json(cfg);
    const Grid grid = build_design(spec);
    const std::string model_s = cfg.value("model", "snapshot");
    const ModelTag model = model_from_string(model_s);
    const double sigma = cfg.value("sigma", 2.0), vx = cfg.value("vx", -1.0), vy = cfg.value("vy", 1.0);
    const double pdet = cfg.value("p", 0.1), alpha = cfg.value("alpha", 0.1);
    const double n_ind = cfg.value("N", 1000.0);
    const BrownianAdvection traj(spec.t0, 0.0, 0.0, vx, vy, sigma);
    Rng rng(a.seed);
    std::vector<std::vector<std::uint64_t>> counts;
    if (model == ModelTag::snapshot) {
        counts = simulate_snapshot(rng, static_cast<std::uint64_t>(n_ind), pdet, traj, spec.check_times, grid);
    } else if (model == ModelTag::capture) {
        CaptureConfig cc;
        cc.alpha = alpha;
        cc.t0 = spec.t0;
        cc.tL = spec.tL;
        cc.tH = spec.tH;
        cc.dt = spec.dt;
        cc.grid = grid;
        cc.check_times = spec.check_times;
        cc.markov_approx = a.markov;
        double margin;
        if (!check_alpha_validity(alpha, spec.t0, spec.tH, &margin))
            std::cerr << "warning: alpha*(tH-t0) >= 1 (margin " << margin << "); capture-time density may be invalid\n";
        CaptureModel cm(traj, cc);
        counts = cm.simulate(rng, static_cast<std::uint64_t>(n_ind));
    } else {
        counts = simulate_ecodiff(rng, n_ind, pdet, traj, spec.check_times, grid);
    }
    fs::create_directories(a.out);
    const fs::path csv_path = fs::path(a.out) / (model_s + "_counts.csv");
    write_file(csv_path.string(), counts_csv(spec.check_times, grid, counts));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest(a.out, "simulate", a.config, a.seed, secs, {csv_path.string()}, true);
    std::cout << "wrote " << csv_path.string() << '\n';
    return 0;
}

int cmd_volterra(const CommonArgs& a) {
    const auto t_start = std::chrono::steady_clock::now();
    const json cfg = load_config(a.config);
    const double alpha = cfg.value("alpha", 0.1);
    const double t0 = cfg.value("t0", 0.0), tH = cfg.value("tH", 1.5), dt = cfg.value("dt", 1.0 / 60.0);
    const std::string kernel_s = cfg.value("kernel", "full_space");
    double margin;
    if (!check_alpha_validity(alpha, t0, tH, &margin))
        std::cerr << "warning: alpha*(tH-t0) >= 1 (margin " << margin
                  << "); the solution may not be a sub-density (run proceeds)\n";
    CaptureKernel kernel;
    std::function<double(double)> analytic; // nullptr when no closed form is known
    if (kernel_s == "full_space") {
        kernel = full_space_kernel();
        analytic = [&](double t) { return alpha * std::exp(-alpha * (t - t0)); };
    } else if (kernel_s == "escaping") {
        const int dim = cfg.value("dim", 2);
        kernel = escaping_kernel(dim, t0);
        analytic = [&, dim](double t) {
            const double e = t - t0;
            return alpha * std::exp(-alpha * e) * chi2_cdf(1.0 / (e * e), dim);
        };
    } else if (kernel_s == "brownian") {
        const double sigma = cfg.value("sigma", 2.0), vx = cfg.value("vx", -1.0), vy = cfg.value("vy", 1.0);
        const DesignSpec spec = design_from_json(cfg);
        const Grid grid = build_design(spec);
        auto traj = std::make_shared<BrownianAdvection>(t0, 0.0, 0.0, vx, vy, sigma);
        const Rect dom{grid.xmin, grid.xmax, grid.ymin, grid.ymax};
        kernel = {[traj, dom](double t) { return traj->rect_prob(t, dom); },
                  [traj, dom](double t, double u) { return traj->pair_rect_prob(t, dom, u, dom); }};
    } else {
        throw std::runtime_error("unknown kernel: " + kernel_s + " (expected full_space|escaping|brownian)");
    }
    const VolterraSolution sol = solve_volterra(kernel, alpha, t0, tH, dt);
    std::string csv = analytic ? "t,f_Tc,phi_Tc,f_analytic,abs_error\n" : "t,f_Tc,phi_Tc\n";
    double max_err = 0.0;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        csv += fmt_num(sol.times[k]) + ',' + fmt_num(sol.f[k]) + ',' + fmt_num(sol.phi[k]);
        if (analytic) {
            const double fa = analytic(sol.times[k]);
            const double err = std::fabs(sol.f[k] - fa);
            max_err = std::max(max_err, err);
            csv += ',' + fmt_num(fa) + ',' + fmt_num(err);
        }
        csv += '\n';
    }
    fs::create_directories(a.out);
    const fs::path csv_path = fs::path(a.out) / "volterra.csv";
    write_file(csv_path.string(), csv);
    if (analytic) std::cout << "max |f - analytic| = " << max_err << " (bound 2*alpha*dt = " << 2 * alpha * dt << ")\n";
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest(a.out, "volterra", a.config, a.seed, secs, {csv_path.string()}, true);
    std::cout << "wrote " << csv_path.string() << '\n';
    return 0;
}

int cmd_fit(const CommonArgs& a) {
    const auto t_start = std::chrono::steady_clock::now();
    const json cfg = load_config(a.config);
    const DesignSpec spec = design_from_json(cfg);
    const Grid grid = build_design(spec);
    FitProblem prob;
    prob.model = model_from_string(cfg.value("model", "snapshot"));
    prob.t0 = spec.t0;
    prob.times = spec.check_times;
    prob.grid = grid;
    prob.n_individuals = cfg.value("N", 1000.0);
    prob.tL = spec.tL;
    prob.tH = spec.tH;
    prob.dt = spec.dt;
    prob.markov_approx = a.markov;
    prob.qmc_seed = a.seed;
    prob.data = read_counts_csv(a.data, prob.times, grid);
    if (cfg.contains("init")) {
        const auto v = cfg.at("init").get<std::vector<double>>();
        if (v.size() != 4) throw std::runtime_error("config field 'init' must have 4 entries");
        prob.init = Eigen::Map<const Eigen::VectorXd>(v.data(), 4);
    }
    const FitMethod method = cfg.value("method", "mgle") == std::string("mle") ? FitMethod::mle : FitMethod::mgle;
    const FitResult res = fit(prob, method, cfg.value("continuity_correction", true));
    json out;
    out["model"] = cfg.value("model", "snapshot");
    out["method"] = method == FitMethod::mle ? "mle" : "mgle";
    out["estimates"] = {{"sigma", res.estimates[0]},
                        {"vx", res.estimates[1]},
                        {"vy", res.estimates[2]},
                        {prob.model == ModelTag::capture ? "alpha" : "p", res.estimates[3]}};
    out["loglik"] = res.loglik;
    out["cc_loglik"] = res.cc_loglik;
    out["cc_se"] = res.cc_se;
    out["ci_lower"] = std::vector<double>(res.ci_lo.data(), res.ci_lo.data() + 4);
    out["ci_upper"] = std::vector<double>(res.ci_hi.data(), res.ci_hi.data() + 4);
    out["converged"] = res.converged;
    out["hessian_pd"] = res.hessian_pd;
    out["fevals"] = res.fevals;
    out["message"] = res.message;
    fs::create_directories(a.out);
    const fs::path json_path = fs::path(a.out) / "fit.json";
    std::ofstream(json_path) << out.dump(2) << '\n';
    // human-readable table
    std::printf("%-10s %12s %12s %12s\n", "param", "estimate", "ci_lo", "ci_hi");
    const char* names[4] = {"sigma", "vx", "vy", prob.model == ModelTag::capture ? "alpha" : "p"};
    for (int i = 0; i < 4; ++i)
        std::printf("%-10s %12.5f %12.5f %12.5f\n", names[i], res.estimates[i], res.ci_lo[i], res.ci_hi[i]);
    std::printf("logL = %.4f   c.c. logL = %.4f (se %.2e)\n", res.loglik, res.cc_loglik, res.cc_se);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest(a.out, "fit", a.config, a.seed, secs, {json_path.string()}, res.converged);
    return res.converged ? 0 : 1;
}

int cmd_study(const CommonArgs& a) {
    const auto t_start = std::chrono::steady_clock::now();
    const json cfg = load_config(a.config);
    StudyConfig sc;
    sc.design = design_from_json(cfg);
    if (cfg.contains("models")) {
        sc.models.clear();
        for (const auto& m : cfg.at("models")) sc.models.push_back(model_from_string(m.get<std::string>()));
    }
    if (cfg.contains("N_list")) sc.n_list = cfg.at("N_list").get<std::vector<double>>();
    if (cfg.contains("sigma_list")) sc.sigma_list = cfg.at("sigma_list").get<std::vector<double>>();
    sc.vx = cfg.value("vx", sc.vx);
    sc.vy = cfg.value("vy", sc.vy);
    sc.p = cfg.value("p", sc.p);
    sc.alpha = cfg.value("alpha", sc.alpha);
    sc.replications = a.replications > 0 ? a.replications : cfg.value("replications", 50);
    sc.master_seed = a.seed;
    sc.markov_approx = a.markov;
    sc.truth_init = cfg.value("truth_init", true);
    sc.threads = resolve_threads(a.threads);
    const StudyResult res = run_study(sc);
    fs::create_directories(a.out);
    const fs::path csv_path = fs::path(a.out) / "study.csv";
    write_file(csv_path.string(), study_csv(res));
    json detail = json::array();
    for (const auto& row : res.rows) {
        json r;
        r["model"] = model_name(row.model);
        r["N"] = row.n_individuals;
        r["sigma"] = row.sigma;
        json reps = json::array();
        for (const auto& d : row.detail)
            reps.push_back({{"rep", d.rep},
                            {"estimates", std::vector<double>(d.estimates.data(), d.estimates.data() + d.estimates.size())},
                            {"loglik", d.loglik},
                            {"converged", d.converged},
                            {"used_fallback", d.used_fallback}});
        r["replications"] = reps;
        detail.push_back(r);
    }
    const fs::path json_path = fs::path(a.out) / "study_detail.json";
    std::ofstream(json_path) << detail.dump(2) << '\n';
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest(a.out, "study", a.config, a.seed, secs, {csv_path.string(), json_path.string()}, true);
    std::cout << "wrote " << csv_path.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Movement-based statistical models for space-time abundance data"};
    app.require_subcommand(1);
    CommonArgs a;
    auto add_common = [&](CLI::App* sub, bool needs_data) {
        sub->add_option("--config", a.config, "JSON config file")->required();
        sub->add_option("--out", a.out, "output directory");
        sub->add_option("--seed", a.seed, "master RNG seed");
        sub->add_option("--threads", a.threads, "worker threads (env ECMABUND_THREADS overrides)");
        sub->add_flag("--markov-approx", a.markov, "center-point shortcut for two-time cell probabilities");
        sub->add_option("--replications", a.replications, "override replication count");
        if (needs_data) sub->add_option("--data", a.data, "counts CSV")->required();
    };
    CLI::App* sim = app.add_subcommand("simulate", "simulate one dataset");
    CLI::App* vol = app.add_subcommand("volterra", "solve the capture-time density equation");
    CLI::App* fitc = app.add_subcommand("fit", "fit one dataset");
    CLI::App* study = app.add_subcommand("study", "run the simulation study");
    add_common(sim, false);
    add_common(vol, false);
    add_common(fitc, true);
    add_common(study, false);
    CLI11_PARSE(app, argc, argv);
    try {
        if (sim->parsed()) return cmd_simulate(a);
        if (vol->parsed()) return cmd_volterra(a);
        if (fitc->parsed()) return cmd_fit(a);
        if (study->parsed()) return cmd_study(a);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
