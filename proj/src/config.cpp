#include "qwave/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qwave/errors.hpp"
#include "qwave/io.hpp"

namespace qwave::config {

namespace {

// Raised by value parsers; converted to ConfigError with the line number.
struct BadValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || p != end || std::isnan(x)) throw BadValue("expected a number, got '" + s + "'");
    return x;
}

std::size_t to_size(const std::string& s) {
    unsigned long long x = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || p != end) throw BadValue("expected a nonnegative integer, got '" + s + "'");
    return static_cast<std::size_t>(x);
}

int to_int(const std::string& s) {
    int x = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || p != end) throw BadValue("expected an integer, got '" + s + "'");
    return x;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw BadValue("expected true or false, got '" + s + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& s, F&& one) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(one(trim(item)));
    if (out.empty()) throw BadValue("expected a comma-separated list");
    return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_same_v<T, double>) out += io::format_double(xs[i]);
        else out += std::to_string(xs[i]);
    }
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw BadValue(what);
}

struct Key {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<std::pair<std::string, Key>>& table() {
    using C = ExperimentConfig;
    auto num = [](double x) { return io::format_double(x); };
    static const std::vector<std::pair<std::string, Key>> keys = {
        {"model",
         {[](C& c, const std::string& v) {
              require(v == "linear" || v == "one_plus_u" || v == "exponential",
                      "model must be linear, one_plus_u or exponential");
              c.model = v;
          },
          [](const C& c) { return c.model; }}},
        {"model_k",
         {[](C& c, const std::string& v) {
              c.model_k = to_double(v);
              require(c.model_k > 0.0 && std::isfinite(c.model_k), "model_k must be positive");
          },
          [num](const C& c) { return num(c.model_k); }}},
        {"a_min",
         {[](C& c, const std::string& v) {
              c.a_min = to_double(v);
              require(c.a_min > 0.0 && c.a_min < 1.0, "a_min must lie in (0, 1)");
          },
          [num](const C& c) { return num(c.a_min); }}},
        {"epsilon",
         {[](C& c, const std::string& v) {
              c.epsilon = to_double(v);
              require(c.epsilon >= 0.0 && std::isfinite(c.epsilon), "epsilon must be >= 0");
          },
          [num](const C& c) { return num(c.epsilon); }}},
        {"bump",
         {[](C& c, const std::string& v) {
              try {
                  model::parse_bump_kind(v);
              } catch (const std::exception&) {
                  throw BadValue("bump must be displacement, velocity or mixed");
              }
              c.bump = v;
          },
          [](const C& c) { return c.bump; }}},
        {"mollify_n",
         {[](C& c, const std::string& v) {
              c.mollify_n = to_int(v);
              require(c.mollify_n >= 0, "mollify_n must be >= 0 (0 disables mollification)");
          },
          [](const C& c) { return std::to_string(c.mollify_n); }}},
        {"K",
         {[](C& c, const std::string& v) {
              c.K = to_double(v);
              require(c.K > 0.0, "K must be positive (inf allowed)");
          },
          [num](const C& c) { return num(c.K); }}},
        {"N",
         {[](C& c, const std::string& v) {
              c.N = to_size(v);
              require(c.N >= 16, "N must be at least 16");
          },
          [](const C& c) { return std::to_string(c.N); }}},
        {"R_max",
         {[](C& c, const std::string& v) {
              c.R_max = to_double(v);
              require(c.R_max > 0.0 && std::isfinite(c.R_max), "R_max must be positive");
          },
          [num](const C& c) { return num(c.R_max); }}},
        {"cfl",
         {[](C& c, const std::string& v) {
              c.cfl = to_double(v);
              require(c.cfl > 0.0 && c.cfl < 1.0, "cfl must lie in (0, 1)");
          },
          [num](const C& c) { return num(c.cfl); }}},
        {"T",
         {[](C& c, const std::string& v) {
              c.T = to_double(v);
              require(c.T > 0.0 && std::isfinite(c.T), "T must be positive");
          },
          [num](const C& c) { return num(c.T); }}},
        {"sample_dt",
         {[](C& c, const std::string& v) {
              c.sample_dt = to_double(v);
              require(c.sample_dt > 0.0 && std::isfinite(c.sample_dt), "sample_dt must be positive");
          },
          [num](const C& c) { return num(c.sample_dt); }}},
        {"u_guard",
         {[](C& c, const std::string& v) {
              c.u_guard = to_double(v);
              require(c.u_guard > 0.0 && std::isfinite(c.u_guard), "u_guard must be positive");
          },
          [num](const C& c) { return num(c.u_guard); }}},
        {"dense_stride",
         {[](C& c, const std::string& v) {
              c.dense_stride = to_size(v);
              require(c.dense_stride >= 1, "dense_stride must be >= 1");
          },
          [](const C& c) { return std::to_string(c.dense_stride); }}},
        {"snapshots",
         {[](C& c, const std::string& v) {
              c.snapshots = to_size(v);
              require(c.snapshots >= 1, "snapshots must be >= 1");
          },
          [](const C& c) { return std::to_string(c.snapshots); }}},
        {"fan", {[](C& c, const std::string& v) { c.fan = to_size(v); },
                 [](const C& c) { return std::to_string(c.fan); }}},
        {"refine", {[](C& c, const std::string& v) { c.refine = to_bool(v); },
                    [](const C& c) { return std::string(c.refine ? "true" : "false"); }}},
        {"radii",
         {[](C& c, const std::string& v) {
              c.radii = to_size(v);
              require(c.radii >= 4, "radii must be >= 4");
          },
          [](const C& c) { return std::to_string(c.radii); }}},
        {"substeps",
         {[](C& c, const std::string& v) {
              c.substeps = to_int(v);
              require(c.substeps >= 1, "substeps must be >= 1");
          },
          [](const C& c) { return std::to_string(c.substeps); }}},
        {"local_horizon",
         {[](C& c, const std::string& v) {
              c.local_horizon = to_double(v);
              require(c.local_horizon > 0.0 && c.local_horizon <= 1.0, "local_horizon must lie in (0, 1]");
          },
          [num](const C& c) { return num(c.local_horizon); }}},
        {"delta",
         {[](C& c, const std::string& v) {
              c.delta = to_double(v);
              require(c.delta > 0.0 && std::isfinite(c.delta), "delta must be positive");
          },
          [num](const C& c) { return num(c.delta); }}},
        {"scales",
         {[](C& c, const std::string& v) {
              c.scales = to_list<double>(v, to_double);
              for (double s : c.scales) require(s > 0.0 && std::isfinite(s), "scales must be positive");
          },
          [](const C& c) { return join(c.scales); }}},
        {"perturbation",
         {[](C& c, const std::string& v) {
              c.perturbation = to_double(v);
              require(c.perturbation > 0.0 && std::isfinite(c.perturbation), "perturbation must be positive");
          },
          [num](const C& c) { return num(c.perturbation); }}},
        {"lambdas",
         {[](C& c, const std::string& v) {
              c.lambdas = to_list<double>(v, to_double);
              for (double l : c.lambdas) require(l >= 0.0 && l <= 1.0, "lambdas must lie in [0, 1]");
          },
          [](const C& c) { return join(c.lambdas); }}},
        {"resolutions",
         {[](C& c, const std::string& v) {
              c.resolutions = to_list<std::size_t>(v, to_size);
              require(c.resolutions.size() >= 3, "resolutions needs at least three entries");
              for (std::size_t i = 1; i < c.resolutions.size(); ++i)
                  require(c.resolutions[i] == 2 * c.resolutions[i - 1],
                          "resolutions must double from one entry to the next");
          },
          [](const C& c) { return join(c.resolutions); }}},
        {"seed", {[](C& c, const std::string& v) { c.seed = static_cast<unsigned>(to_size(v)); },
                  [](const C& c) { return std::to_string(c.seed); }}},
        {"selftest_N",
         {[](C& c, const std::string& v) {
              c.selftest_N = to_size(v);
              require(c.selftest_N >= 64 && c.selftest_N % 64 == 0, "selftest_N must be a positive multiple of 64");
          },
          [](const C& c) { return std::to_string(c.selftest_N); }}},
        {"selftest_cases",
         {[](C& c, const std::string& v) {
              c.selftest_cases = to_size(v);
              require(c.selftest_cases >= 1, "selftest_cases must be >= 1");
          },
          [](const C& c) { return std::to_string(c.selftest_cases); }}},
    };
    return keys;
}

const Key* lookup(const std::string& name) {
    for (const auto& [k, v] : table())
        if (k == name) return &v;
    return nullptr;
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value, std::size_t line) {
    const Key* k = lookup(key);
    if (!k) throw ConfigError("unknown key '" + key + "'", line);
    try {
        k->set(cfg, value);
    } catch (const BadValue& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.rfind(key + " ", 0) == 0 ? msg : key + ": " + msg, line);
    }
}

} // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : table()) out.push_back(k);
        return out;
    }();
    return names;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.N % cfg.dense_stride != 0 || cfg.N / cfg.dense_stride < 3)
        throw ConfigError("dense_stride must divide N and leave at least 3 cells", 0);
    if (cfg.model == "one_plus_u" && cfg.u_guard <= (cfg.a_min - 1.0) / cfg.model_k)
        throw ConfigError("u_guard is below the coefficient's admissible floor", 0);
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line);
        if (value.empty()) throw ConfigError(key + ": missing value", line);
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
        set_key(cfg, key, value, line);
    }
    validate(cfg);
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value", 0);
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (value.empty()) throw ConfigError(key + ": missing value in override", 0);
    set_key(cfg, key, value, 0);
    validate(cfg);
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : table()) out += k + " = " + v.get(*this) + "\n";
    return out;
}

model::CoefficientModel ExperimentConfig::coefficient() const {
    if (model == "linear") return model::CoefficientModel::linear();
    if (model == "exponential") return model::CoefficientModel::exponential(model_k);
    return model::CoefficientModel::one_plus_u(model_k, a_min);
}

evolve::RunOptions ExperimentConfig::run_options() const {
    evolve::RunOptions o;
    o.T = T;
    o.cfl = cfl;
    o.sample_dt = sample_dt;
    o.u_guard = u_guard;
    o.dense_stride = dense_stride;
    return o;
}

model::Grid ExperimentConfig::grid() const { return model::Grid::over(R_max, N); }

} // namespace qwave::config
