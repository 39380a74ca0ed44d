#include "shl/harness.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shl/grsf.hpp"

namespace shl {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& v) {
    const std::string s = trim(v);
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(x)) throw ConfigError(key, key + ": not a number: '" + v + "'");
    return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
    const std::string s = trim(v);
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(s, &pos);
        if (pos == s.size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError(key, key + ": not an integer: '" + v + "'");
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
    const std::string s = trim(v);
    try {
        std::size_t pos = 0;
        if (!s.empty() && s[0] != '-') {
            const unsigned long long x = std::stoull(s, &pos);
            if (pos == s.size()) return x;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key, key + ": not an unsigned 64-bit seed: '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::string s = v;
    for (char& ch : s)
        if (ch == ',') ch = ' ';
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(key, tok));
    if (out.empty()) throw ConfigError(key, key + ": empty list");
    return out;
}

const KeySpec* find_key(const std::string& key) {
    for (const auto& k : known_keys())
        if (k.key == key) return &k;
    return nullptr;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, key + ": " + what);
}

}  // namespace

const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys{
        {"run.scenario", KeyType::text, "scenario name"},
        {"run.seed", KeyType::integer, "master seed (u64)"},
        {"run.samples", KeyType::integer, "Monte Carlo sample count"},
        {"run.out", KeyType::text, "output directory"},
        {"run.format", KeyType::text, "csv or json"},
        {"kernel.family", KeyType::text, "exponential or squared_exponential"},
        {"kernel.zeta", KeyType::number, "field variance"},
        {"kernel.ell", KeyType::number, "correlation length"},
        {"domain.kind", KeyType::text, "interval, ball, ring or all"},
        {"domain.L", KeyType::number, "interval length"},
        {"domain.R", KeyType::number, "ball radius"},
        {"solver.grid", KeyType::integer, "noise grid nodes"},
        {"solver.t_list", KeyType::list, "evaluation times"},
        {"laser.beta", KeyType::number, "surface amplitude"},
        {"laser.alpha", KeyType::number, "absorption rate"},
        {"laser.b", KeyType::number, "noise amplitude"},
        {"burgers.a", KeyType::number, "viscosity"},
        {"burgers.cells", KeyType::integer, "finite-volume cells"},
        {"ball.psi", KeyType::number, "constant boundary value"},
        {"ball.alpha_list", KeyType::list, "probe heights on the axis"},
    };
    return keys;
}

double RunConfig::number(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : parse_number(key, it->second);
}

int RunConfig::integer(const std::string& key, int fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : static_cast<int>(parse_integer(key, it->second));
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::vector<double> RunConfig::list(const std::string& key, const std::vector<double>& fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : parse_list(key, it->second);
}

void set_key(RunConfig& c, const std::string& key, const std::string& raw) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError(key, "unknown config key '" + key + "'");
    const std::string value = trim(raw);
    if (key == "run.scenario") {
        c.scenario = value;
    } else if (key == "run.seed") {
        c.seed = parse_seed(key, value);
        c.seed_set = true;
    } else if (key == "run.samples") {
        const long long n = parse_integer(key, value);
        require(n >= 100 && n <= 10000000, key, "must be in [100, 1e7]");
        c.samples = static_cast<int>(n);
    } else if (key == "run.out") {
        require(!value.empty(), key, "empty path");
        c.out_dir = value;
    } else if (key == "run.format") {
        if (value == "csv") c.format = OutputFormat::csv;
        else if (value == "json") c.format = OutputFormat::json;
        else throw ConfigError(key, key + ": expected csv or json, got '" + value + "'");
    } else {
        switch (spec->type) {
            case KeyType::number: parse_number(key, value); break;
            case KeyType::integer: parse_integer(key, value); break;
            case KeyType::list: parse_list(key, value); break;
            case KeyType::text: break;
        }
        c.params[key] = value;
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line, "line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
        const std::string k = trim(line.substr(0, eq));
        const std::string full = section.empty() ? k : section + "." + k;
        set_key(c, full, line.substr(eq + 1));
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("--config", "cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void validate(const RunConfig& c) {
    if (c.scenario.empty()) throw ConfigError("run.scenario", "run.scenario: no scenario given");
    if (!find_scenario(c.scenario)) throw ConfigError("run.scenario", "run.scenario: unknown scenario '" + c.scenario + "'");

    if (c.params.count("kernel.family")) {
        try {
            kernel_family_from_string(c.params.at("kernel.family"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("kernel.family", std::string("kernel.family: ") + e.what());
        }
    }
    if (c.params.count("domain.kind")) {
        const std::string d = c.params.at("domain.kind");
        require(d == "interval" || d == "ball" || d == "ring" || d == "all", "domain.kind",
                "expected interval, ball, ring or all");
    }
    auto positive = [&](const std::string& k) {
        if (c.params.count(k)) require(c.number(k, 1.0) > 0.0, k, "must be > 0");
    };
    auto nonneg = [&](const std::string& k) {
        if (c.params.count(k)) require(c.number(k, 0.0) >= 0.0, k, "must be >= 0");
    };
    nonneg("kernel.zeta");
    // These scenarios sample a field for every entry; zeta = 0 has no sampler.
    if (c.scenario == "moments-matrix" || c.scenario == "ball-equilibrium") positive("kernel.zeta");
    positive("kernel.ell");
    positive("domain.L");
    positive("domain.R");
    nonneg("laser.alpha");
    nonneg("laser.b");
    positive("burgers.a");
    if (c.params.count("laser.beta")) c.number("laser.beta", 0.0);
    if (c.params.count("ball.psi")) c.number("ball.psi", 0.0);
    if (c.params.count("solver.grid")) {
        const int g = c.integer("solver.grid", 0);
        require(g >= 3 && g <= 4096, "solver.grid", "must be in [3, 4096]");
    }
    if (c.params.count("burgers.cells")) {
        const int g = c.integer("burgers.cells", 0);
        require(g >= 16 && g <= 1 << 16, "burgers.cells", "must be in [16, 65536]");
    }
    if (c.params.count("solver.t_list"))
        for (double t : c.list("solver.t_list", {})) require(t > 0.0, "solver.t_list", "times must be > 0");
    if (c.params.count("ball.alpha_list")) {
        const double R = c.number("domain.R", 1.0);
        for (double a : c.list("ball.alpha_list", {}))
            require(a >= 0.0 && a < R, "ball.alpha_list", "heights must lie in [0, R)");
    }
}

nlohmann::json config_echo(const RunConfig& c) {
    nlohmann::json j;
    j["scenario"] = c.scenario;
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    j["out"] = c.out_dir;
    j["format"] = c.format == OutputFormat::csv ? "csv" : "json";
    j["params"] = c.params;
    return j;
}

const std::vector<ScenarioInfo>& scenario_table() {
    static const std::vector<ScenarioInfo> t{
        {"kernel-props", "heat kernel: normalization, L_p norms, semigroup, derivatives, Green's function",
         "t_list=0.1,1,10"},
        {"cauchy", "Cauchy problem: convolution solution, mass, sup bound, stochastic mean",
         "zeta=1 ell=1 grid=201 t_list=0.5,1,2 samples=10000"},
        {"moments-matrix", "moment bounds on interval, ball and ring; decay in t",
         "domain=all zeta=0.5,1,2 t_list=0.5,1,2,5 samples=10000"},
        {"inequalities-suite", "Li-Yau and Harnack, deterministic and in expectation", "samples=10000"},
        {"burgers", "Cole-Hopf transform, quasilinear residual, Burgers vs finite volumes", "a=0.1 cells=2048"},
        {"ball-equilibrium", "Poisson kernel, Dirichlet problem on the ball, volatility bound, equilibrium",
         "R=1 psi=0.5 zeta=1 alpha_list=0.1,0.3,0.5,0.7 samples=10000"},
        {"laser", "laser pulse beta e^{-alpha z} on [0,L] with additive noise b J",
         "beta=1 alpha=2 L=1 b=0.5 zeta=1 ell=0.2 t_list=0.05,0.2,1 samples=10000"},
        {"she-white-noise", "variance growth of the white-noise heat equation, n = 1, 2", "t_list=1..100"},
    };
    return t;
}

std::string list_scenarios_text() {
    std::size_t w0 = 8, w1 = 9;
    for (const auto& s : scenario_table()) {
        w0 = std::max(w0, s.name.size());
        w1 = std::max(w1, s.exercises.size());
    }
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size() + 2, ' '); };
    std::string out = pad("scenario", w0) + pad("exercises", w1) + "defaults\n";
    for (const auto& s : scenario_table()) out += pad(s.name, w0) + pad(s.exercises, w1) + s.defaults + "\n";
    return out;
}

nlohmann::json list_scenarios_json() {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& s : scenario_table())
        a.push_back({{"name", s.name}, {"exercises", s.exercises}, {"defaults", s.defaults}});
    return a;
}

RunContext::RunContext(const RunConfig& c, fs::path dir) : cfg_(c), dir_(std::move(dir)) {}

std::uint64_t RunContext::op_seed(const std::string& op) {
    const std::uint64_t s = splitmix64(cfg_.seed ^ fnv1a(op));
    seeds_[op] = s;
    return s;
}

void RunContext::check(const std::string& name, bool pass, nlohmann::json detail) {
    checks_.push_back({name, pass, std::move(detail)});
}

void RunContext::write_text(const fs::path& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << body;
    if (!f) throw std::runtime_error("write failed for " + p.string());
    files_.push_back(name);
}

void RunContext::write_table(const std::string& stem, const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
    if (cfg_.format == OutputFormat::json) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json o;
            for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r.at(i);
            a.push_back(o);
        }
        write_text(stem + ".json", a.dump(2) + "\n");
        return;
    }
    std::string body;
    for (std::size_t i = 0; i < header.size(); ++i) body += (i ? "," : "") + header[i];
    body += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) body += (i ? "," : "") + format_double(r[i]);
        body += "\n";
    }
    write_text(stem + ".csv", body);
}

void RunContext::write_curve(const std::string& stem, const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
    const OutputFormat keep = cfg_.format;
    cfg_.format = OutputFormat::csv;
    write_table(stem + "_curve", header, rows);
    cfg_.format = keep;
}

void RunContext::write_json(const std::string& stem, const nlohmann::json& j) {
    write_text(stem + ".json", j.dump(2) + "\n");
}

std::string sha256_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char h[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(h, sizeof h, "%02x", md[i]);
        hex += h;
    }
    return hex;
}

RunResult run_scenario(const RunConfig& c) {
    RunResult res;
    try {
        validate(c);
    } catch (const ConfigError& e) {
        res.exit_code = exit_config;
        res.error = e.what();
        return res;
    }

    const fs::path dir = fs::path(c.out_dir) / c.scenario;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        res.exit_code = exit_compute;
        res.error = "cannot create " + dir.string() + ": " + ec.message();
        return res;
    }

    RunContext ctx(c, dir);
    const auto start = std::chrono::steady_clock::now();
    bool failed = false;
    try {
        find_scenario(c.scenario)(ctx);
        nlohmann::json v = nlohmann::json::array();
        for (const auto& k : ctx.checks()) v.push_back({{"name", k.name}, {"pass", k.pass}, {"detail", k.detail}});
        ctx.write_json("verdicts", v);
    } catch (const std::exception& e) {
        failed = true;
        res.error = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool all_pass = !ctx.checks().empty();
    for (const auto& k : ctx.checks()) all_pass = all_pass && k.pass;
    res.checks = ctx.checks();
    res.exit_code = failed ? exit_compute : (all_pass ? exit_pass : exit_verdict);

    nlohmann::json m;
    m["config"] = config_echo(c);
    m["version"] = version;
    m["master_seed"] = c.seed;
    m["op_seeds"] = ctx.op_seeds();
    m["wall_time_s"] = wall;
    m["status"] = failed ? "compute_failure" : (all_pass ? "pass" : "verdict_failure");
    m["exit_code"] = res.exit_code;
    if (failed) m["error"] = res.error;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : ctx.files()) {
        nlohmann::json e{{"path", f.generic_string()}, {"valid", !failed}};
        std::error_code fe;
        if (fs::exists(dir / f, fe)) {
            e["bytes"] = fs::file_size(dir / f);
            e["sha256"] = sha256_file(dir / f);
        }
        files.push_back(e);
    }
    m["files"] = files;
    res.manifest = dir / "manifest.json";
    std::ofstream mf(res.manifest, std::ios::trunc);
    mf << m.dump(2) << "\n";
    if (!mf) {
        res.exit_code = exit_compute;
        res.error = "cannot write " + res.manifest.string();
    }
    return res;
}

}  // namespace shl
