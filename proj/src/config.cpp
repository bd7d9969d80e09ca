#include "dabm/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dabm::config {

namespace {

std::string where(const std::string& source, int line, int column) {
    return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

// Reads a YAML document, keeping the source name for messages.
class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const auto m = n.Mark();
        throw ConfigError(source_, m.is_null() ? 0 : m.line + 1, m.is_null() ? 0 : m.column + 1, msg);
    }

    void expect_map(const YAML::Node& n, const std::string& path) const {
        if (!n.IsMap()) fail(n, "'" + path + "' must be a mapping");
    }

    void allow(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> keys) const {
        expect_map(map, path);
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key)) {
                std::string list;
                for (const auto& k : ok) list += (list.empty() ? "" : ", ") + k;
                fail(kv.first, "unknown key '" + key + "' in " + path + " (allowed: " + list + ")");
            }
        }
    }

    template <class T>
    T as(const YAML::Node& n, const std::string& path) const {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + path + "' must be " + kind<T>());
        }
    }

    static std::string join(const std::string& path, const char* key) {
        return path.empty() ? std::string(key) : path + "." + key;
    }

    template <class T>
    void read(const YAML::Node& map, const char* key, const std::string& path, T& out) const {
        if (const auto n = map[key]) out = as<T>(n, join(path, key));
    }

    template <class T>
    void read(const YAML::Node& map, const char* key, const std::string& path, T& out,
              const std::function<bool(const T&)>& ok, const std::string& rule) const {
        if (const auto n = map[key]) {
            out = as<T>(n, join(path, key));
            if (!ok(out)) fail(n, "'" + join(path, key) + "' " + rule);
        }
    }

    // Calls f; library validation errors become errors at node n.
    template <class F>
    void guard(const YAML::Node& n, F&& f) const {
        try {
            f();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(n, e.what());
        }
    }

private:
    template <class T>
    static std::string kind() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else return "a list";
    }

    std::string source_;
};

const auto positive_int = [](const int& v) { return v > 0; };
const auto positive_size = [](const std::size_t& v) { return v > 0; };
const auto positive = [](const double& v) { return v > 0.0; };
const auto nonneg = [](const double& v) { return v >= 0.0; };

std::size_t find_name(const Reader& r, const YAML::Node& n, const std::vector<std::string>& names,
                      const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        std::string list;
        for (const auto& k : names) list += (list.empty() ? "" : ", ") + k;
        r.fail(n, "unknown parameter '" + name + "' (expected one of: " + list + ")");
    }
    return static_cast<std::size_t>(it - names.begin());
}

template <std::size_t N>
void read_params(const Reader& r, const YAML::Node& node, const std::string& path,
                 const std::vector<std::string>& names, std::array<double, N>& out) {
    r.expect_map(node, path);
    for (const auto& kv : node) {
        const auto name = kv.first.as<std::string>();
        out[find_name(r, kv.first, names, name)] = r.as<double>(kv.second, path + "." + name);
    }
}

void read_smoother(const Reader& r, const YAML::Node& n, const std::string& path, ad::SmootherConfig& s) {
    r.allow(n, path, {"kind", "scale", "lower", "upper"});
    if (const auto k = n["kind"]) r.guard(k, [&] { s.kind = ad::smoother_kind_from_string(r.as<std::string>(k, path + ".kind")); });
    r.read(n, "scale", path, s.scale);
    r.read(n, "lower", path, s.lower);
    r.read(n, "upper", path, s.upper);
    r.guard(n, [&] { s.validate(); });
}

est::EstimatorKind read_estimator(const Reader& r, const YAML::Node& n, const std::string& path) {
    est::EstimatorKind k;
    if (n.IsScalar()) {
        r.guard(n, [&] { k.type = est::estimator_type_from_string(r.as<std::string>(n, path)); });
        return k;
    }
    r.allow(n, path, {"kind", "tau", "samples", "side", "both_sides"});
    if (const auto t = n["kind"]) r.guard(t, [&] { k.type = est::estimator_type_from_string(r.as<std::string>(t, path + ".kind")); });
    r.read(n, "tau", path, k.tau);
    r.read(n, "samples", path, k.samples);
    if (const auto s = n["side"]) {
        const auto v = r.as<std::string>(s, path + ".side");
        if (v == "right") k.side = spa::PerturbationSide::right;
        else if (v == "left") k.side = spa::PerturbationSide::left;
        else r.fail(s, "'" + path + ".side' must be 'right' or 'left'");
    }
    r.read(n, "both_sides", path, k.both_sides);
    r.guard(n, [&] { k.validate(); });
    return k;
}

std::vector<std::string> read_names(const Reader& r, const YAML::Node& n, const std::string& path,
                                    const std::vector<std::string>& names) {
    if (!n.IsSequence()) r.fail(n, "'" + path + "' must be a list of parameter names");
    std::vector<std::string> out;
    for (const auto& item : n) {
        const auto name = r.as<std::string>(item, path);
        find_name(r, item, names, name);
        if (std::find(out.begin(), out.end(), name) != out.end()) r.fail(item, "parameter '" + name + "' listed twice");
        out.push_back(name);
    }
    return out;
}

void read_sir(const Reader& r, const YAML::Node& n, SirBlock& b) {
    const std::string p = "sir";
    r.allow(n, p, {"agents", "steps", "dt", "graph", "policies", "smoother", "params", "observable"});
    r.read<std::size_t>(n, "agents", p, b.agents, positive_size, "must be positive");
    r.read<int>(n, "steps", p, b.sim.steps, positive_int, "must be positive");
    r.read<double>(n, "dt", p, b.sim.dt, positive, "must be positive");
    if (const auto g = n["graph"]) {
        r.allow(g, p + ".graph", {"kind", "p_edge", "seed"});
        if (const auto k = g["kind"]) {
            b.graph = r.as<std::string>(k, p + ".graph.kind");
            if (b.graph != "complete" && b.graph != "erdos-renyi") {
                r.fail(k, "'sir.graph.kind' must be 'complete' or 'erdos-renyi'");
            }
        }
        r.read<double>(g, "p_edge", p + ".graph", b.p_edge, [](const double& v) { return v > 0.0 && v <= 1.0; },
                       "must lie in (0, 1]");
        r.read(g, "seed", p + ".graph", b.graph_seed);
    }
    if (const auto pol = n["policies"]) {
        r.allow(pol, p + ".policies", {"quarantine", "distancing"});
        r.read(pol, "quarantine", p + ".policies", b.sim.policies.quarantine);
        r.read(pol, "distancing", p + ".policies", b.sim.policies.distancing);
    }
    if (const auto s = n["smoother"]) read_smoother(r, s, p + ".smoother", b.sim.smoother);
    const auto& names = models::sir::param_names();
    if (const auto pr = n["params"]) read_params(r, pr, p + ".params", {names.begin(), names.end()}, b.params);
    if (const auto o = n["observable"]) {
        b.observable = r.as<std::string>(o, p + ".observable");
        if (b.observable != "infections" && b.observable != "recoveries") {
            r.fail(o, "'sir.observable' must be 'infections' or 'recoveries'");
        }
    }
}

void read_axtell(const Reader& r, const YAML::Node& n, AxtellBlock& b) {
    const std::string p = "axtell";
    r.allow(n, p, {"agents", "steps", "tau", "relax_choice", "full_effort_mixture", "min_friends", "max_friends",
                   "params", "observable"});
    r.read<std::size_t>(n, "agents", p, b.sim.agents, [](const std::size_t& v) { return v >= 2; }, "must be at least 2");
    r.read<int>(n, "steps", p, b.sim.steps, positive_int, "must be positive");
    r.read<double>(n, "tau", p, b.sim.tau, positive, "must be positive");
    r.read(n, "relax_choice", p, b.sim.relax_choice);
    r.read(n, "full_effort_mixture", p, b.sim.full_effort_mixture);
    r.read<int>(n, "min_friends", p, b.sim.min_friends, [](const int& v) { return v >= 0; }, "must be non-negative");
    r.read<int>(n, "max_friends", p, b.sim.max_friends, [](const int& v) { return v >= 0; }, "must be non-negative");
    if (b.sim.max_friends < b.sim.min_friends) r.fail(n, "'axtell.max_friends' must be >= 'axtell.min_friends'");
    const auto& names = models::axtell::param_names();
    if (const auto pr = n["params"]) read_params(r, pr, p + ".params", {names.begin(), names.end()}, b.params);
    if (const auto o = n["observable"]) {
        b.observable = r.as<std::string>(o, p + ".observable");
        if (b.observable != "mean_output" && b.observable != "mean_size" && b.observable != "mean_effort") {
            r.fail(o, "'axtell.observable' must be 'mean_output', 'mean_size' or 'mean_effort'");
        }
    }
}

void read_sugarscape(const Reader& r, const YAML::Node& n, SugarscapeBlock& b) {
    const std::string p = "sugarscape";
    r.allow(n, p, {"agents", "grid", "steps", "regen", "peak_capacity", "peak_width", "visions", "strict_vision", "tau",
                   "survival", "params", "observable"});
    r.read<std::size_t>(n, "agents", p, b.sim.agents, positive_size, "must be positive");
    r.read<std::size_t>(n, "grid", p, b.sim.grid, positive_size, "must be positive");
    r.read<int>(n, "steps", p, b.sim.steps, positive_int, "must be positive");
    r.read<double>(n, "regen", p, b.sim.regen, nonneg, "must be non-negative");
    r.read<double>(n, "peak_capacity", p, b.sim.peak_capacity, positive, "must be positive");
    r.read<double>(n, "peak_width", p, b.sim.peak_width, positive, "must be positive");
    if (const auto v = n["visions"]) {
        const auto vs = r.as<std::vector<int>>(v, p + ".visions");
        if (vs.size() != 2 || vs[0] < 1 || vs[1] < 1 || vs[0] == vs[1]) {
            r.fail(v, "'sugarscape.visions' must list two distinct vision ranges >= 1");
        }
        b.sim.visions = {vs[0], vs[1]};
    }
    r.read(n, "strict_vision", p, b.sim.strict_vision);
    r.read<double>(n, "tau", p, b.sim.tau, positive, "must be positive");
    if (const auto s = n["survival"]) read_smoother(r, s, p + ".survival", b.sim.survival);
    const std::size_t V = static_cast<std::size_t>(std::max(b.sim.visions[0], b.sim.visions[1]));
    if (b.sim.grid < 2 * V + 1) r.fail(n, "'sugarscape.grid' must be at least 2 * max(visions) + 1");
    if (b.sim.agents > b.sim.grid * b.sim.grid) r.fail(n, "'sugarscape.agents' exceeds the number of cells");
    if (const auto pr = n["params"]) read_params(r, pr, p + ".params", models::sugarscape::param_names(b.sim), b.params);
    if (const auto o = n["observable"]) {
        b.observable = r.as<std::string>(o, p + ".observable");
        if (b.observable != "mean_holdings" && b.observable != "fraction_alive") {
            r.fail(o, "'sugarscape.observable' must be 'mean_holdings' or 'fraction_alive'");
        }
    }
}

void read_fd(const Reader& r, const YAML::Node& n, const std::vector<std::string>& names, FdBlock& b) {
    r.allow(n, "fd", {"n_fd", "common_random", "epsilon"});
    r.read<int>(n, "n_fd", "fd", b.n_fd, positive_int, "must be positive");
    r.read(n, "common_random", "fd", b.common_random);
    if (const auto e = n["epsilon"]) {
        r.expect_map(e, "fd.epsilon");
        for (const auto& kv : e) {
            const auto name = kv.first.as<std::string>();
            find_name(r, kv.first, names, name);
            const double v = r.as<double>(kv.second, "fd.epsilon." + name);
            if (!(v > 0.0)) r.fail(kv.second, "'fd.epsilon." + name + "' must be positive");
            b.epsilon[name] = v;
        }
    }
}

void read_calibrate(const Reader& r, const YAML::Node& n, const std::vector<std::string>& names, CalibrateBlock& b) {
    const std::string p = "calibrate";
    r.allow(n, p, {"free", "priors", "family", "train", "posterior_samples", "predictive_samples"});
    if (const auto f = n["free"]) b.free = read_names(r, f, p + ".free", names);
    if (b.free.empty()) r.fail(n, "'calibrate.free' must name at least one parameter");
    if (b.free.size() > ad::kMaxTangent) r.fail(n, "'calibrate.free' allows at most 16 parameters");
    const auto pri = n["priors"];
    if (!pri) r.fail(n, "'calibrate.priors' is required");
    r.expect_map(pri, p + ".priors");
    for (const auto& kv : pri) {
        const auto name = kv.first.as<std::string>();
        if (std::find(b.free.begin(), b.free.end(), name) == b.free.end()) {
            r.fail(kv.first, "prior given for '" + name + "', which is not in 'calibrate.free'");
        }
    }
    for (const auto& name : b.free) {
        const auto node = pri[name];
        if (!node) r.fail(pri, "missing prior for free parameter '" + name + "'");
        const std::string q = p + ".priors." + name;
        r.allow(node, q, {"kind", "a", "b"});
        calib::ParamPrior pr;
        pr.name = name;
        if (const auto k = node["kind"]) r.guard(k, [&] { pr.kind = calib::prior_kind_from_string(r.as<std::string>(k, q + ".kind")); });
        r.read(node, "a", q, pr.a);
        r.read(node, "b", q, pr.b);
        r.guard(node, [&] { pr.validate(); });
        b.priors.push_back(pr);
    }
    if (const auto f = n["family"]) {
        r.allow(f, p + ".family", {"kind", "layers", "hidden", "blocks"});
        if (const auto k = f["kind"]) r.guard(k, [&] { b.family.kind = calib::family_kind_from_string(r.as<std::string>(k, p + ".family.kind")); });
        r.read<int>(f, "layers", p + ".family", b.family.layers, positive_int, "must be positive");
        r.read<int>(f, "hidden", p + ".family", b.family.hidden, positive_int, "must be positive");
        r.read<int>(f, "blocks", p + ".family", b.family.blocks, [](const int& v) { return v >= 0; }, "must be non-negative");
    }
    b.family.dim = b.free.size();
    if (const auto t = n["train"]) {
        const std::string q = p + ".train";
        r.allow(t, q, {"epochs", "batch", "mmd_samples", "lr", "beta1", "beta2", "eps", "weight_decay", "norm_clip",
                       "estimator", "loss_weight", "time_weight"});
        auto& tc = b.train;
        r.read<int>(t, "epochs", q, tc.epochs, [](const int& v) { return v >= 0; }, "must be non-negative");
        r.read<int>(t, "batch", q, tc.gvi.batch, positive_int, "must be positive");
        r.read<int>(t, "mmd_samples", q, tc.gvi.mmd_samples, positive_int, "must be positive");
        r.read<double>(t, "lr", q, tc.optimizer.lr, positive, "must be positive");
        const auto unit = [](const double& v) { return v >= 0.0 && v < 1.0; };
        r.read<double>(t, "beta1", q, tc.optimizer.beta1, unit, "must lie in [0, 1)");
        r.read<double>(t, "beta2", q, tc.optimizer.beta2, unit, "must lie in [0, 1)");
        r.read<double>(t, "eps", q, tc.optimizer.eps, positive, "must be positive");
        r.read<double>(t, "weight_decay", q, tc.optimizer.weight_decay, nonneg, "must be non-negative");
        r.read(t, "norm_clip", q, tc.optimizer.clip_unit_norm);
        if (const auto e = t["estimator"]) r.guard(e, [&] { tc.estimator = calib::gradient_estimator_from_string(r.as<std::string>(e, q + ".estimator")); });
        r.read<double>(t, "loss_weight", q, tc.gvi.loss_weight, nonneg, "must be non-negative");
        r.read<double>(t, "time_weight", q, b.time_weight, nonneg, "must be non-negative");
        if (tc.estimator == calib::GradientEstimator::vargrad && tc.gvi.batch < 2) {
            r.fail(t, "'calibrate.train.batch' must be at least 2 for vargrad");
        }
    }
    r.read<int>(n, "posterior_samples", p, b.posterior_samples, positive_int, "must be positive");
    r.read<int>(n, "predictive_samples", p, b.predictive_samples, positive_int, "must be positive");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& msg)
    : std::runtime_error(where(source, line, column) + ": " + msg), line_(line), column_(column) {}

std::string to_string(ModelName m) {
    switch (m) {
        case ModelName::axtell: return "axtell";
        case ModelName::sugarscape: return "sugarscape";
        case ModelName::sir: return "sir";
    }
    return "unknown";
}

std::string to_string(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::gradcheck: return "gradcheck";
        case Command::sensitivity: return "sensitivity";
        case Command::calibrate: return "calibrate";
        case Command::benchmark_estimators: return "benchmark-estimators";
    }
    return "unknown";
}

std::vector<std::string> ExperimentConfig::param_names() const {
    switch (model) {
        case ModelName::axtell: {
            const auto& n = models::axtell::param_names();
            return {n.begin(), n.end()};
        }
        case ModelName::sugarscape: return models::sugarscape::param_names(sugarscape.sim);
        case ModelName::sir: {
            const auto& n = models::sir::param_names();
            return {n.begin(), n.end()};
        }
    }
    return {};
}

std::vector<double> ExperimentConfig::theta() const {
    switch (model) {
        case ModelName::axtell: return {axtell.params.begin(), axtell.params.end()};
        case ModelName::sugarscape: return {sugarscape.params.begin(), sugarscape.params.end()};
        case ModelName::sir: return {sir.params.begin(), sir.params.end()};
    }
    return {};
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    const Reader r(source);
    if (!root || root.IsNull()) throw ConfigError(source, 1, 1, "empty configuration");
    r.allow(root, "the configuration", {"model", "command", "master_seed", "replicates", "threads", "output_dir",
                                        "params", "estimator", "benchmark", "sir", "axtell", "sugarscape", "fd",
                                        "calibrate"});
    ExperimentConfig cfg;
    cfg.source = source;

    const auto m = root["model"];
    if (!m) r.fail(root, "'model' is required (axtell, sugarscape or sir)");
    const auto model = r.as<std::string>(m, "model");
    if (model == "axtell") cfg.model = ModelName::axtell;
    else if (model == "sugarscape") cfg.model = ModelName::sugarscape;
    else if (model == "sir") cfg.model = ModelName::sir;
    else r.fail(m, "unknown model '" + model + "' (expected axtell, sugarscape or sir)");

    const auto c = root["command"];
    if (!c) r.fail(root, "'command' is required");
    const auto command = r.as<std::string>(c, "command");
    if (command == "simulate") cfg.command = Command::simulate;
    else if (command == "gradcheck") cfg.command = Command::gradcheck;
    else if (command == "sensitivity") cfg.command = Command::sensitivity;
    else if (command == "calibrate") cfg.command = Command::calibrate;
    else if (command == "benchmark-estimators") cfg.command = Command::benchmark_estimators;
    else r.fail(c, "unknown command '" + command + "' (expected simulate, gradcheck, sensitivity, calibrate or benchmark-estimators)");

    r.read(root, "master_seed", "", cfg.master_seed);
    r.read<int>(root, "replicates", "", cfg.replicates, positive_int, "must be positive");
    r.read<int>(root, "threads", "", cfg.threads, positive_int, "must be positive");
    r.read(root, "output_dir", "", cfg.output_dir);

    if (const auto n = root["sir"]) read_sir(r, n, cfg.sir);
    if (const auto n = root["axtell"]) read_axtell(r, n, cfg.axtell);
    if (const auto n = root["sugarscape"]) read_sugarscape(r, n, cfg.sugarscape);

    const auto names = cfg.param_names();
    if (const auto n = root["params"]) cfg.params = read_names(r, n, "params", names);
    if (const auto n = root["estimator"]) cfg.estimator = read_estimator(r, n, "estimator");
    if (const auto n = root["benchmark"]) {
        if (!n.IsSequence()) r.fail(n, "'benchmark' must be a list of estimators");
        for (const auto& item : n) cfg.benchmark.push_back(read_estimator(r, item, "benchmark[]"));
    }
    if (const auto n = root["fd"]) read_fd(r, n, names, cfg.fd);
    if (const auto n = root["calibrate"]) read_calibrate(r, n, names, cfg.calibrate);

    // Cross-field rules.
    if (cfg.model != ModelName::sir) {
        const auto e = root["estimator"];
        if (e && cfg.estimator.type != est::EstimatorType::straight_through) {
            r.fail(e, "'estimator' applies to the sir model only (axtell and sugarscape use their own relaxations)");
        }
        if (root["benchmark"]) r.fail(root["benchmark"], "'benchmark' applies to the sir model only");
    }
    if (cfg.command == Command::calibrate) {
        if (!root["calibrate"]) r.fail(root, "command 'calibrate' needs a 'calibrate' block");
        if (cfg.model == ModelName::sir && cfg.estimator.type == est::EstimatorType::spa_pruned) {
            r.fail(root["estimator"], "calibration needs a Dual-carrying estimator; spa-pruned is not one");
        }
    }
    if (cfg.command == Command::benchmark_estimators) {
        if (cfg.model != ModelName::sir) r.fail(c, "'benchmark-estimators' is defined for the sir model");
        if (cfg.benchmark.empty()) {
            for (auto t : {est::EstimatorType::straight_through, est::EstimatorType::gumbel_softmax,
                           est::EstimatorType::spa_smoothed, est::EstimatorType::spa_pruned}) {
                est::EstimatorKind k;
                k.type = t;
                cfg.benchmark.push_back(k);
            }
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, 0, "cannot open configuration file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

namespace {

nlohmann::ordered_json estimator_json(const est::EstimatorKind& k) {
    return {{"kind", est::to_string(k.type)},
            {"tau", k.tau},
            {"samples", k.samples},
            {"side", k.side == spa::PerturbationSide::right ? "right" : "left"},
            {"both_sides", k.both_sides}};
}

nlohmann::ordered_json smoother_json(const ad::SmootherConfig& s) {
    return {{"kind", ad::to_string(s.kind)}, {"scale", s.scale}, {"lower", s.lower}, {"upper", s.upper}};
}

template <std::size_t N>
nlohmann::ordered_json params_json(const std::array<double, N>& p, const std::vector<std::string>& names) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < N; ++i) j[names[i]] = p[i];
    return j;
}

}  // namespace

std::string to_json(const ExperimentConfig& cfg) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["model"] = to_string(cfg.model);
    j["command"] = to_string(cfg.command);
    j["master_seed"] = cfg.master_seed;
    j["replicates"] = cfg.replicates;
    j["threads"] = cfg.threads;
    j["output_dir"] = cfg.output_dir;
    j["params"] = cfg.params;
    j["estimator"] = estimator_json(cfg.estimator);
    j["benchmark"] = ordered_json::array();
    for (const auto& k : cfg.benchmark) j["benchmark"].push_back(estimator_json(k));
    switch (cfg.model) {
        case ModelName::sir: {
            const auto& s = cfg.sir;
            const auto& names = models::sir::param_names();
            j["sir"] = {{"agents", s.agents},
                        {"steps", s.sim.steps},
                        {"dt", s.sim.dt},
                        {"graph", {{"kind", s.graph}, {"p_edge", s.p_edge}, {"seed", s.graph_seed}}},
                        {"policies", {{"quarantine", s.sim.policies.quarantine}, {"distancing", s.sim.policies.distancing}}},
                        {"smoother", smoother_json(s.sim.smoother)},
                        {"params", params_json(s.params, {names.begin(), names.end()})},
                        {"observable", s.observable}};
            break;
        }
        case ModelName::axtell: {
            const auto& a = cfg.axtell;
            const auto& names = models::axtell::param_names();
            j["axtell"] = {{"agents", a.sim.agents},
                           {"steps", a.sim.steps},
                           {"tau", a.sim.tau},
                           {"relax_choice", a.sim.relax_choice},
                           {"full_effort_mixture", a.sim.full_effort_mixture},
                           {"min_friends", a.sim.min_friends},
                           {"max_friends", a.sim.max_friends},
                           {"params", params_json(a.params, {names.begin(), names.end()})},
                           {"observable", a.observable}};
            break;
        }
        case ModelName::sugarscape: {
            const auto& s = cfg.sugarscape;
            j["sugarscape"] = {{"agents", s.sim.agents},
                               {"grid", s.sim.grid},
                               {"steps", s.sim.steps},
                               {"regen", s.sim.regen},
                               {"peak_capacity", s.sim.peak_capacity},
                               {"peak_width", s.sim.peak_width},
                               {"visions", {s.sim.visions[0], s.sim.visions[1]}},
                               {"strict_vision", s.sim.strict_vision},
                               {"tau", s.sim.tau},
                               {"survival", smoother_json(s.sim.survival)},
                               {"params", params_json(s.params, models::sugarscape::param_names(s.sim))},
                               {"observable", s.observable}};
            break;
        }
    }
    ordered_json eps = ordered_json::object();
    for (const auto& [k, v] : cfg.fd.epsilon) eps[k] = v;
    j["fd"] = {{"n_fd", cfg.fd.n_fd}, {"common_random", cfg.fd.common_random}, {"epsilon", eps}};
    if (cfg.command == Command::calibrate) {
        const auto& c = cfg.calibrate;
        ordered_json pri = ordered_json::object();
        for (const auto& p : c.priors) pri[p.name] = {{"kind", calib::to_string(p.kind)}, {"a", p.a}, {"b", p.b}};
        const auto& t = c.train;
        j["calibrate"] = {
            {"free", c.free},
            {"priors", pri},
            {"family",
             {{"kind", calib::to_string(c.family.kind)}, {"layers", c.family.layers}, {"hidden", c.family.hidden},
              {"blocks", c.family.blocks}}},
            {"train",
             {{"epochs", t.epochs},
              {"batch", t.gvi.batch},
              {"mmd_samples", t.gvi.mmd_samples},
              {"lr", t.optimizer.lr},
              {"beta1", t.optimizer.beta1},
              {"beta2", t.optimizer.beta2},
              {"eps", t.optimizer.eps},
              {"weight_decay", t.optimizer.weight_decay},
              {"norm_clip", t.optimizer.clip_unit_norm},
              {"estimator", calib::to_string(t.estimator)},
              {"loss_weight", t.gvi.loss_weight},
              {"time_weight", c.time_weight}}},
            {"posterior_samples", c.posterior_samples},
            {"predictive_samples", c.predictive_samples}};
    }
    return j.dump(2);
}

}  // namespace dabm::config
