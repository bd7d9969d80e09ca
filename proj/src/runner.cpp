#include "dabm/runner.hpp"

#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dabm/calib/models.hpp"
#include "dabm/gradval/probes.hpp"
#include "dabm/parallel.hpp"
#include "json.hpp"

namespace dabm::runner {

namespace fs = std::filesystem;
using config::Command;
using config::ExperimentConfig;
using config::ModelName;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class Output {
public:
    Output(fs::path dir, std::string id) : dir_(std::move(dir)), id_(std::move(id)) { fs::create_directories(dir_); }

    /// Opens a CSV and writes the manifest reference line.
    std::ofstream csv(const std::string& name) {
        auto os = open(name);
        os << "# manifest=manifest.json run_id=" << id_ << '\n';
        os.precision(12);
        return os;
    }

    std::ofstream open(const std::string& name) {
        std::ofstream os(dir_ / name);
        if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
        files_.push_back(name);
        return os;
    }

    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::string id_;
    std::vector<std::string> files_;
};

std::vector<std::size_t> active_indices(const ExperimentConfig& cfg) {
    const auto names = cfg.param_names();
    std::vector<std::size_t> out;
    if (cfg.params.empty()) {
        for (std::size_t i = 0; i < names.size(); ++i) out.push_back(i);
        return out;
    }
    for (const auto& p : cfg.params) {
        out.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), p) - names.begin()));
    }
    return out;
}

gradval::ModelProbe make_probe(const ExperimentConfig& cfg, const est::EstimatorKind& kind,
                               const models::sir::ContactGraph* graph) {
    switch (cfg.model) {
        case ModelName::sir: return gradval::sir_probe(cfg.sir.sim, *graph, kind, cfg.sir.observable);
        case ModelName::axtell: return gradval::axtell_probe(cfg.axtell.sim, cfg.axtell.observable);
        case ModelName::sugarscape: return gradval::sugarscape_probe(cfg.sugarscape.sim, cfg.sugarscape.observable);
    }
    throw std::logic_error("unknown model");
}

gradval::FdConfig make_fd(const ExperimentConfig& cfg, const gradval::ModelProbe& probe) {
    auto fd = gradval::default_fd(probe, cfg.fd.n_fd);
    fd.common_random = cfg.fd.common_random;
    fd.threads = cfg.threads;
    for (const auto& [name, eps] : cfg.fd.epsilon) {
        const auto it = std::find(probe.param_names.begin(), probe.param_names.end(), name);
        fd.epsilon[static_cast<std::size_t>(it - probe.param_names.begin())] = eps;
    }
    return fd;
}

void write_report_summary(std::ostream& os, const gradval::GradReport& rep, const std::string& prefix) {
    for (const auto& p : rep.params) {
        os << prefix << p << ',' << rep.significant_rows(p) << ',' << rep.median_rel_error(p) << ','
           << rep.median_abs_error(p) << ',' << rep.sign_agreement(p) << ',' << rep.within_factor(2.0, p) << '\n';
    }
}

// ---------------------------------------------------------------------------

void cmd_simulate(const ExperimentConfig& cfg, Output& out, std::ostream& log) {
    const auto R = static_cast<std::size_t>(cfg.replicates);
    auto os = out.csv("trajectory.csv");
    switch (cfg.model) {
        case ModelName::sir: {
            const auto graph = build_graph(cfg.sir);
            std::vector<models::sir::Trajectory<double>> runs(R);
            parallel_for(R, cfg.threads, [&](std::size_t r) {
                runs[r] = models::sir::primal_run(cfg.sir.params, graph, cfg.sir.sim, cfg.master_seed, r);
            });
            os << "replicate,t,infections,recoveries\n";
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t t = 0; t < runs[r].infections.size(); ++t) {
                    os << r << ',' << t << ',' << runs[r].infections[t] << ',' << runs[r].recoveries[t] << '\n';
                }
            }
            break;
        }
        case ModelName::axtell: {
            std::vector<models::axtell::Trajectory<double>> runs(R);
            parallel_for(R, cfg.threads, [&](std::size_t r) {
                Rng rng = seed_split(cfg.master_seed, stream_id(r, StreamPurpose::simulation, 0));
                runs[r] = models::axtell::simulate(cfg.axtell.params, cfg.axtell.sim, rng);
            });
            os << "replicate,t,mean_effort,mean_size,mean_output\n";
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t t = 0; t < runs[r].mean_output.size(); ++t) {
                    os << r << ',' << t << ',' << runs[r].mean_effort[t] << ',' << runs[r].mean_size[t] << ','
                       << runs[r].mean_output[t] << '\n';
                }
            }
            break;
        }
        case ModelName::sugarscape: {
            std::vector<models::sugarscape::Trajectory<double>> runs(R);
            parallel_for(R, cfg.threads, [&](std::size_t r) {
                Rng rng = seed_split(cfg.master_seed, stream_id(r, StreamPurpose::simulation, 0));
                runs[r] = models::sugarscape::simulate(cfg.sugarscape.params, cfg.sugarscape.sim, rng);
            });
            os << "replicate,t,mean_holdings,fraction_alive\n";
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t t = 0; t < runs[r].mean_holdings.size(); ++t) {
                    os << r << ',' << t << ',' << runs[r].mean_holdings[t] << ',' << runs[r].fraction_alive[t] << '\n';
                }
            }
            break;
        }
    }
    log << "simulate: " << R << " replicate(s) of " << to_string(cfg.model) << " -> trajectory.csv\n";
}

void cmd_gradcheck(const ExperimentConfig& cfg, Output& out, std::ostream& log) {
    std::unique_ptr<models::sir::ContactGraph> graph;
    if (cfg.model == ModelName::sir) graph = std::make_unique<models::sir::ContactGraph>(build_graph(cfg.sir));
    const auto probe = make_probe(cfg, cfg.estimator, graph.get());
    const auto theta = cfg.theta();
    const auto active = active_indices(cfg);
    const auto fd = make_fd(cfg, probe);
    const auto rep = gradval::compare(probe, theta, active, fd, cfg.replicates, cfg.master_seed);
    {
        auto os = out.csv("gradcheck.csv");
        rep.write_csv(os);
    }
    auto os = out.csv("gradcheck_summary.csv");
    os << "param,significant_rows,median_rel_error,median_abs_error,sign_agreement,within_2x\n";
    write_report_summary(os, rep, "");
    log << "gradcheck: " << probe.name << ", " << active.size() << " parameter(s), median relative error "
        << rep.median_rel_error() << ", sign agreement " << rep.sign_agreement() << '\n';
}

void cmd_sensitivity(const ExperimentConfig& cfg, Output& out, std::ostream& log) {
    std::unique_ptr<models::sir::ContactGraph> graph;
    if (cfg.model == ModelName::sir) graph = std::make_unique<models::sir::ContactGraph>(build_graph(cfg.sir));
    const auto probe = make_probe(cfg, cfg.estimator, graph.get());
    const auto theta = cfg.theta();
    const auto active = active_indices(cfg);
    const auto tab = gradval::sensitivity(probe, theta, active, cfg.replicates, cfg.master_seed, cfg.threads);
    auto os = out.csv("sensitivity.csv");
    tab.write_csv(os, probe.name);
    log << "sensitivity: " << probe.name << ", " << active.size() << " parameter(s) from " << cfg.replicates
        << " AD run(s)\n";
}

void cmd_benchmark(const ExperimentConfig& cfg, Output& out, std::ostream& log) {
    const auto graph = build_graph(cfg.sir);
    const auto theta = cfg.theta();
    const auto active = active_indices(cfg);
    const auto base = make_probe(cfg, est::EstimatorKind{est::EstimatorType::hard}, &graph);
    const auto fd = make_fd(cfg, base);
    const auto ref = gradval::fd_reference(base, theta, active, fd, cfg.master_seed);
    auto rows = out.csv("benchmark.csv");
    rows << "estimator,param,t,ad_mean,ad_se,fd_mean,fd_se,rel_err,noise_floor_flag\n";
    auto sum = out.csv("benchmark_summary.csv");
    sum << "estimator,param,significant_rows,median_rel_error,median_abs_error,sign_agreement,within_2x\n";
    auto timing = out.csv("benchmark_timing.csv");  // wall-clock, the one non-reproducible output
    timing << "estimator,seconds,seconds_per_replicate\n";
    for (const auto& kind : cfg.benchmark) {
        const auto probe = make_probe(cfg, kind, &graph);
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = gradval::compare(probe, theta, active, fd, ref, cfg.replicates, cfg.master_seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto label = est::to_string(kind.type);
        for (const auto& r : rep.rows) {
            rows << label << ',' << r.param << ',' << r.t << ',' << r.ad_mean << ',' << r.ad_se << ',' << r.fd_mean
                 << ',' << r.fd_se << ',' << r.rel_err << ',' << (r.noise_floor ? 1 : 0) << '\n';
        }
        write_report_summary(sum, rep, label + ",");
        timing << label << ',' << secs << ',' << secs / cfg.replicates << '\n';
        log << "benchmark: " << kind.label() << " median relative error " << rep.median_rel_error()
            << ", median |error| " << rep.median_abs_error() << " (" << secs << " s)\n";
    }
}

void cmd_calibrate(const ExperimentConfig& cfg, Output& out, std::ostream& log) {
    const auto& cc = cfg.calibrate;
    const auto names = cfg.param_names();
    std::vector<std::size_t> free;
    for (const auto& n : cc.free) {
        free.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin()));
    }
    calib::CalibModel model;
    switch (cfg.model) {
        case ModelName::sir: {
            std::vector<models::sir::Param> ps;
            for (auto i : free) ps.push_back(static_cast<models::sir::Param>(i));
            model = calib::sir_calib_model(cfg.sir.params, ps, build_graph(cfg.sir), cfg.sir.sim, cfg.estimator);
            break;
        }
        case ModelName::axtell: model = calib::axtell_calib_model(cfg.axtell.params, free, cfg.axtell.sim); break;
        case ModelName::sugarscape:
            model = calib::sugarscape_calib_model(cfg.sugarscape.params, free, cfg.sugarscape.sim);
            break;
    }
    const auto full = cfg.theta();
    std::vector<double> truth;
    for (auto i : free) truth.push_back(full[i]);

    // Synthetic observations at the configured parameter values.
    const auto observed =
        model.simulate(truth, derive_seed(cfg.master_seed, stream_id(0, StreamPurpose::observation, 0)));
    {
        auto os = out.csv("observed.csv");
        os << "t";
        const std::size_t d = observed.front().size();
        for (std::size_t k = 0; k < d; ++k) os << ",y" << k;
        os << '\n';
        for (std::size_t t = 0; t < observed.size(); ++t) {
            os << t;
            for (double v : observed[t]) os << ',' << v;
            os << '\n';
        }
    }
    const calib::MmdLoss loss({observed}, cc.time_weight);
    const auto init = calib::make_posterior(cc.family, cc.priors, cfg.master_seed);
    auto tc = cc.train;
    tc.seed = cfg.master_seed;
    tc.gvi.threads = cfg.threads;
    const int every = std::max(1, tc.epochs / 10);
    const auto res = calib::train(tc, init, model, loss, [&](const calib::HistoryRow& row) {
        if (row.epoch % every == 0 || row.epoch + 1 == tc.epochs) {
            log << "epoch " << row.epoch << ": train " << row.train_loss << ", validation " << row.val_loss << '\n';
        }
    });
    {
        auto os = out.csv("history.csv");
        os << "epoch,train_loss,val_loss\n";
        for (const auto& h : res.history) os << h.epoch << ',' << h.train_loss << ',' << h.val_loss << '\n';
    }
    {
        auto os = out.open("checkpoint.txt");
        calib::save_checkpoint(os, res.posterior);
    }
    const std::size_t D = free.size();
    Rng srng = seed_split(cfg.master_seed, stream_id(0, StreamPurpose::validation, 0xA11));
    const auto samples = res.posterior.sample(static_cast<std::size_t>(cc.posterior_samples), srng);
    {
        auto os = out.csv("posterior_samples.csv");
        os << "sample";
        for (const auto& n : cc.free) os << ',' << n;
        os << '\n';
        for (std::size_t s = 0; s < samples.size(); ++s) {
            os << s;
            for (double v : samples[s]) os << ',' << v;
            os << '\n';
        }
    }
    // Predictive check: MMD^2 of single simulations against the data, prior vs posterior draws.
    Rng prng = seed_split(cfg.master_seed, stream_id(0, StreamPurpose::validation, 0xB22));
    const int P = cc.predictive_samples;
    double prior_mmd = 0.0, post_mmd = 0.0;
    auto pred = out.csv("predictive.csv");
    pred << "source,draw,mmd\n";
    for (int k = 0; k < P; ++k) {
        std::vector<double> th(D);
        for (std::size_t i = 0; i < D; ++i) th[i] = cc.priors[i].sample(prng);
        const double m = loss(std::vector<calib::PointSet<double>>{model.simulate(
            th, derive_seed(cfg.master_seed, stream_id(static_cast<std::uint64_t>(k), StreamPurpose::validation, 0xC33)))});
        pred << "prior," << k << ',' << m << '\n';
        prior_mmd += m / P;
    }
    for (int k = 0; k < P; ++k) {
        const auto th = res.posterior.sample(prng);
        const double m = loss(std::vector<calib::PointSet<double>>{model.simulate(
            th, derive_seed(cfg.master_seed, stream_id(static_cast<std::uint64_t>(k), StreamPurpose::validation, 0xD44)))});
        pred << "posterior," << k << ',' << m << '\n';
        post_mmd += m / P;
    }
    auto sum = out.csv("calibration_summary.csv");
    sum << "param,truth,posterior_mean,posterior_sd\n";
    for (std::size_t i = 0; i < D; ++i) {
        double m = 0.0, v = 0.0;
        for (const auto& s : samples) m += s[i] / static_cast<double>(samples.size());
        for (const auto& s : samples) v += (s[i] - m) * (s[i] - m) / static_cast<double>(samples.size());
        sum << cc.free[i] << ',' << truth[i] << ',' << m << ',' << std::sqrt(v) << '\n';
        log << "  " << cc.free[i] << ": truth " << truth[i] << ", posterior " << m << " +- " << std::sqrt(v) << '\n';
    }
    log << "calibrate: best epoch " << res.best_epoch << ", predictive MMD prior " << prior_mmd << ", posterior "
        << post_mmd << '\n';
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

models::sir::ContactGraph build_graph(const config::SirBlock& sir) {
    if (sir.graph == "complete") return models::sir::ContactGraph::complete(sir.agents);
    Rng rng = seed_split(sir.graph_seed, stream_id(0, StreamPurpose::structure, 0));
    return models::sir::ContactGraph::erdos_renyi(sir.agents, sir.p_edge, rng);
}

std::string run_id(const ExperimentConfig& cfg) {
    auto j = nlohmann::ordered_json::parse(config::to_json(cfg));
    j.erase("output_dir");
    j.erase("threads");
    return hex64(fnv1a(j.dump()));
}

RunResult run(const ExperimentConfig& cfg, std::ostream& log) {
    RunResult res;
    res.run_id = run_id(cfg);
    Output out(cfg.output_dir, res.run_id);
    switch (cfg.command) {
        case Command::simulate: cmd_simulate(cfg, out, log); break;
        case Command::gradcheck: cmd_gradcheck(cfg, out, log); break;
        case Command::sensitivity: cmd_sensitivity(cfg, out, log); break;
        case Command::calibrate: cmd_calibrate(cfg, out, log); break;
        case Command::benchmark_estimators: cmd_benchmark(cfg, out, log); break;
    }
    res.files = out.files();

    nlohmann::ordered_json m;
    m["run_id"] = res.run_id;
    m["config"] = nlohmann::ordered_json::parse(config::to_json(cfg));
    m["config_source"] = cfg.source;
    m["seeds"] = {{"master_seed", cfg.master_seed},
                  {"graph_seed", cfg.sir.graph_seed},
                  {"streams",
                   "xoshiro256** seeded by splitmix64(master, stream_id(replicate, purpose, sub)); purposes: "
                   "simulation=1 pruning=2 structure=3 fd_plus=4 fd_minus=5 variational=6 validation=7 "
                   "observation=8 estimator=9"}};
    m["versions"] = {{"dabm", kVersion},
                     {"compiler", __VERSION__},
                     {"cplusplus", __cplusplus},
                     {"boost", BOOST_LIB_VERSION}};
    m["files"] = res.files;
    std::ofstream os(fs::path(cfg.output_dir) / "manifest.json");
    os << m.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write manifest.json");
    return res;
}

}  // namespace dabm::runner
