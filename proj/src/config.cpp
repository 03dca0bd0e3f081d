#include "mvsde/config.hpp"

#include "mvsde/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mvsde {

const std::vector<KeyInfo>& config_keys() {
    static const std::vector<KeyInfo> keys = {
        {"seed", "1", "master seed"},
        {"model.name", "linear", "zero | linear | sqrt | delay"},
        {"model.a", "-1", "linear: coefficient of x"},
        {"model.c", "0.5", "linear, sqrt: coefficient of the mean"},
        {"model.sigma0", "0.2", "diffusion scale"},
        {"model.kappa", "1", "sqrt: mean-reversion speed"},
        {"model.theta", "1", "sqrt: mean-reversion level"},
        {"model.beta", "1", "delay: path-drift gain"},
        {"model.delay_location", "-1", "delay: atom location of the delay measure"},
        {"model.K_b", "auto", "override of the declared drift constant"},
        {"model.K_B", "auto", "override of the declared path-drift constant"},
        {"model.K_sigma", "auto", "override of the declared Hoelder constant"},
        {"model.alpha", "auto", "override of the declared Hoelder exponent"},
        {"model.p", "auto", "moment order of the initial data"},
        {"sim.T", "1", "horizon"},
        {"sim.dt", "0.01", "time step"},
        {"sim.N", "100", "particle count"},
        {"sim.r", "0", "delay horizon; 0 means dt, or the delay of the delay model"},
        {"init.law", "gaussian", "constant | gaussian | pareto"},
        {"init.value", "1", "constant level"},
        {"init.mean", "1", "gaussian mean"},
        {"init.sd", "0.5", "gaussian standard deviation"},
        {"init.shape", "4", "bounded Pareto shape"},
        {"init.lo", "1", "bounded Pareto lower end"},
        {"init.hi", "10", "bounded Pareto upper end"},
        {"chaos.N_list", "64,128,256,512,1024,2048,4096", "particle counts"},
        {"chaos.replicas", "20", "replicas per particle count"},
        {"chaos.M", "32768", "reference sample count"},
        {"solver.M", "10000", "paths per Picard iterate"},
        {"solver.lambda", "auto", "weight of the flow metric"},
        {"solver.tol", "1e-3", "stopping tolerance on rho"},
        {"solver.max_iter", "50", "iteration cap"},
        {"solver.common_noise", "false", "reuse one noise seed across iterations"},
        {"tv.N_list", "2,4,8,32", "particle counts of the TV study"},
        {"tv.replicas", "10000", "replicas pooled per particle count"},
        {"tv.times", "1", "times at which TV is estimated"},
        {"tv.bin_width", "auto", "histogram bin width"},
        {"yamada.epsilon", "0.1", "epsilon of V_eps"},
        {"yamada.points", "10000", "audit grid size"},
        {"audit.x_lo", "-1", "sampling box lower end"},
        {"audit.x_hi", "1", "sampling box upper end"},
        {"audit.samples", "10000", "sampled tuples per condition"},
        {"audit.times", "0", "times at which coefficients are sampled"},
        {"mollify.n", "0", "simulate: mollification index, 0 for none"},
        {"output.format", "long", "simulate: long | wide"},
        {"out", "out", "output directory"},
        {"threads", "0", "thread count, 0 for the runtime default"},
    };
    return keys;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> cmds = {"simulate",  "solve",             "chaos-rate",   "coupling",
                                                  "tv-study",  "check-assumptions", "yamada-verify"};
    return cmds;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
    const auto& keys = config_keys();
    return std::any_of(keys.begin(), keys.end(), [&](const KeyInfo& k) { return key == k.key; });
}

double parse_real(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(key, "expected a finite real number, got '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
    return v;
}

std::optional<double> parse_opt_real(const std::string& key, const std::string& s) {
    if (s == "auto") return std::nullopt;
    return parse_real(key, s);
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& key, const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (out.empty() || std::any_of(out.begin(), out.end(), [](const std::string& x) { return x.empty(); }))
        throw ConfigError(key, "expected a comma-separated list, got '" + s + "'");
    return out;
}

std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(key, s)) {
        const auto v = parse_u64(key, item);
        if (v < 1) throw ConfigError(key, "particle counts must be >= 1");
        if (!out.empty() && v <= out.back()) throw ConfigError(key, "must be strictly increasing");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(key, s)) out.push_back(parse_real(key, item));
    return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno), "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_key(key)) throw ConfigError(key, "unknown key (" + source + ":" + std::to_string(lineno) + ")");
        if (std::any_of(out.begin(), out.end(), [&](const auto& kv) { return kv.first == key; }))
            throw ConfigError(key, "duplicate key (" + source + ":" + std::to_string(lineno) + ")");
        out.emplace_back(key, value);
    }
    return out;
}

RunConfig parse_config(const std::string& command, const KeyValues& file, const KeyValues& overrides) {
    const auto& cmds = subcommands();
    if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
        throw ConfigError("command", "unknown subcommand '" + command + "'");

    std::map<std::string, std::string> v;
    for (const auto& k : config_keys()) v[k.key] = k.default_value;
    for (const auto* src : {&file, &overrides})
        for (const auto& [key, value] : *src) {
            if (!known_key(key)) throw ConfigError(key, "unknown key");
            v[key] = trim(value);
        }

    RunConfig c;
    c.command = command;
    for (const auto& k : config_keys()) c.values.emplace_back(k.key, v[k.key]);

    const auto real = [&](const char* key) { return parse_real(key, v[key]); };
    const auto count = [&](const char* key) { return static_cast<std::size_t>(parse_u64(key, v[key])); };

    c.sim.seed = parse_u64("seed", v["seed"]);

    c.model_name = v["model.name"];
    require(c.model_name == "zero" || c.model_name == "linear" || c.model_name == "sqrt" || c.model_name == "delay",
            "model.name", "unknown model '" + c.model_name + "' (zero, linear, sqrt, delay)");
    c.a = real("model.a");
    c.c = real("model.c");
    c.sigma0 = real("model.sigma0");
    c.kappa = real("model.kappa");
    c.theta = real("model.theta");
    c.beta = real("model.beta");
    c.delay_location = real("model.delay_location");
    require(c.delay_location <= 0.0, "model.delay_location", "must be <= 0");
    c.K_b = parse_opt_real("model.K_b", v["model.K_b"]);
    c.K_B = parse_opt_real("model.K_B", v["model.K_B"]);
    c.K_sigma = parse_opt_real("model.K_sigma", v["model.K_sigma"]);
    c.alpha = parse_opt_real("model.alpha", v["model.alpha"]);
    c.p = parse_opt_real("model.p", v["model.p"]);
    if (c.K_B) require(*c.K_B >= 0.0, "model.K_B", "must be >= 0");
    if (c.K_sigma) require(*c.K_sigma >= 0.0, "model.K_sigma", "must be >= 0");
    if (c.alpha)
        require(*c.alpha >= 0.5 && *c.alpha <= 1.0, "model.alpha",
                v["model.alpha"] + " outside [1/2, 1], the admissible Hoelder exponent range of the diffusion");
    if (c.p) require(*c.p > 1.0 && *c.p != 2.0, "model.p", "moment order must exceed 1 and differ from 2");

    c.sim.T = real("sim.T");
    c.sim.dt = real("sim.dt");
    c.sim.N = count("sim.N");
    c.sim.r = real("sim.r");
    if (c.model_name == "delay" && c.sim.r == 0.0 && c.delay_location < 0.0) c.sim.r = -c.delay_location;
    c.sim.validate();
    if (c.model_name == "delay")
        require(c.delay_location >= -c.sim.delay() * (1.0 + 1e-12), "model.delay_location",
                "lies below -sim.r; increase sim.r");

    c.init.kind = initial_kind_from_name(v["init.law"]);
    c.init.value = real("init.value");
    c.init.mean = real("init.mean");
    c.init.sd = real("init.sd");
    c.init.shape = real("init.shape");
    c.init.lo = real("init.lo");
    c.init.hi = real("init.hi");
    c.init.validate();

    c.N_list = parse_count_list("chaos.N_list", v["chaos.N_list"]);
    c.replicas = count("chaos.replicas");
    require(c.replicas >= 2, "chaos.replicas", "must be >= 2");
    c.reference_M = count("chaos.M");
    require(c.reference_M >= 2, "chaos.M", "must be >= 2");

    c.solver.M = count("solver.M");
    require(c.solver.M >= 2, "solver.M", "must be >= 2");
    const auto lambda = parse_opt_real("solver.lambda", v["solver.lambda"]);
    if (lambda) require(*lambda >= 0.0, "solver.lambda", "must be >= 0");
    c.solver.lambda = lambda.value_or(-1.0);
    c.solver.tol = real("solver.tol");
    require(c.solver.tol > 0.0, "solver.tol", "must be positive");
    c.solver.max_iter = count("solver.max_iter");
    require(c.solver.max_iter >= 1, "solver.max_iter", "must be >= 1");
    c.solver.common_noise = parse_bool("solver.common_noise", v["solver.common_noise"]);
    c.solver.seed = c.sim.seed;

    c.tv_N_list = parse_count_list("tv.N_list", v["tv.N_list"]);
    c.tv_replicas = count("tv.replicas");
    require(c.tv_replicas >= 2, "tv.replicas", "must be >= 2");
    c.tv_times = parse_real_list("tv.times", v["tv.times"]);
    if (command == "tv-study")
        for (double t : c.tv_times) require(t >= 0.0 && t <= c.sim.T, "tv.times", "times must lie in [0, sim.T]");
    c.tv_bin_width = parse_opt_real("tv.bin_width", v["tv.bin_width"]).value_or(0.0);
    require(c.tv_bin_width >= 0.0, "tv.bin_width", "must be positive or auto");

    c.yamada_epsilon = real("yamada.epsilon");
    require(c.yamada_epsilon >= 0.02 && c.yamada_epsilon < 1.0, "yamada.epsilon", "must lie in [0.02, 1)");
    c.yamada_points = count("yamada.points");
    require(c.yamada_points >= 4, "yamada.points", "must be >= 4");

    c.audit.x_lo = real("audit.x_lo");
    c.audit.x_hi = real("audit.x_hi");
    require(c.audit.x_lo < c.audit.x_hi, "audit.x_hi", "must exceed audit.x_lo");
    c.audit.sample_count = count("audit.samples");
    require(c.audit.sample_count >= 1, "audit.samples", "must be >= 1");
    c.audit.t_grid = parse_real_list("audit.times", v["audit.times"]);
    c.audit.seed = c.sim.seed;

    const auto n = parse_u64("mollify.n", v["mollify.n"]);
    require(n <= 1000000, "mollify.n", "must be <= 1e6");
    c.mollify_n = static_cast<int>(n);
    c.output_format = v["output.format"];
    require(c.output_format == "long" || c.output_format == "wide", "output.format", "must be long or wide");

    c.out_dir = v["out"];
    require(!c.out_dir.empty(), "out", "must not be empty");
    const auto threads = parse_u64("threads", v["threads"]);
    require(threads <= 4096, "threads", "must be <= 4096");
    c.threads = static_cast<int>(threads);

    if (c.model_name == "delay" && DelayMeasure::dirac(c.delay_location).snapped(c.sim.delay(), c.sim.dt).second)
        c.warnings.push_back("model.delay_location moved to the nearest multiple of sim.dt");
    (void)build_model(c);
    return c;
}

RunConfig parse_config_file(const std::string& command, const std::string& path, const KeyValues& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(command, parse_key_values(ss.str(), path), overrides);
}

ModelSpec build_model(const RunConfig& c) {
    ModelSpec m;
    if (c.model_name == "zero") {
        m = zero_model();
    } else if (c.model_name == "linear") {
        m = linear_model(c.a, c.c, c.sigma0);
    } else if (c.model_name == "sqrt") {
        m = sqrt_model(c.kappa, c.theta, c.c, c.sigma0);
    } else if (c.model_name == "delay") {
        auto [dm, moved] = DelayMeasure::dirac(c.delay_location).snapped(c.sim.delay(), c.sim.dt);
        (void)moved;
        m = delay_model(c.beta, c.sigma0, dm);
    } else {
        throw ConfigError("model.name", "unknown model '" + c.model_name + "'");
    }
    if (c.K_b) m.constants.K_b = *c.K_b;
    if (c.K_B) m.constants.K_B = *c.K_B;
    if (c.K_sigma) m.constants.K_sigma = *c.K_sigma;
    if (c.alpha) m.constants.alpha = *c.alpha;
    if (c.p) m.moment_order = *c.p;
    try {
        validate(m);
    } catch (const DomainError& e) {
        throw ConfigError("model", e.what());
    }
    return m;
}

std::string manifest_text(const RunConfig& c) {
    std::ostringstream os;
    os << "# mvsde " << MVSDE_VERSION << "\n# command: " << c.command << '\n';
    for (const auto& [key, value] : c.values)
        if (key != "out" && key != "threads") os << key << " = " << value << '\n';
    return os.str();
}

}  // namespace mvsde
