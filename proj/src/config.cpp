#include "bhqrc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <type_traits>

namespace bhqrc {

using nlohmann::json;

std::string_view to_string(Regime regime) {
    switch (regime) {
    case Regime::Mott: return "mott";
    case Regime::Chaotic: return "chaotic";
    case Regime::Superfluid: return "superfluid";
    }
    return "unknown";
}

Regime parse_regime(std::string_view name) {
    if (name == "mott") return Regime::Mott;
    if (name == "chaotic") return Regime::Chaotic;
    if (name == "superfluid") return Regime::Superfluid;
    throw ConfigError("unknown regime '" + std::string(name) + "'");
}

double regime_j_over_u(Regime regime) {
    switch (regime) {
    case Regime::Mott: return 1e-3;
    case Regime::Chaotic: return 0.1;
    case Regime::Superfluid: return 1e3;
    }
    return 0.0;
}

std::string_view to_string(DtObjective objective) {
    return objective == DtObjective::MaxDelay ? "max-delay" : "per-index";
}

std::string_view to_string(OutputFormat format) {
    return format == OutputFormat::Csv ? "csv" : "json";
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw ConfigError("unknown output format '" + std::string(name) + "'");
}

SplitProtocol ProtocolConfig::split(double j_over_u) const {
    return {wash_out.value_or(default_wash_out(j_over_u)), train, test};
}

const std::vector<int>& TaskConfig::indices() const {
    return kind == TaskKind::Narma ? orders : delays;
}

namespace {

std::vector<int> range(int first, int last) {
    std::vector<int> out;
    for (int v = first; v <= last; ++v) out.push_back(v);
    return out;
}

// Walks one JSON object, rejecting keys nobody asked for.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown key " + path_ + "." + key);
        }
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    template <class T>
    void read(const std::string& key, T& out) {
        if (const json* v = get(key)) {
            if constexpr (std::is_unsigned_v<T>) {
                if (v->is_number_integer() && v->get<long long>() < 0) {
                    throw ConfigError(where(key) + " must be non-negative");
                }
            }
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                throw ConfigError(where(key) + " has the wrong type");
            }
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> parse_j_grid(const json& v, const std::string& where) {
    const auto one = [&](const json& e) -> double {
        if (e.is_number()) return e.get<double>();
        if (e.is_string()) return regime_j_over_u(parse_regime(e.get<std::string>()));
        throw ConfigError(where + " entries must be numbers or regime names");
    };
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& e : v) out.push_back(one(e));
    } else if (v.is_object()) {
        if (v.size() != 1 || !v.contains("logspace")) {
            throw ConfigError(where + " object form must be {\"logspace\": [lo, hi, count]}");
        }
        const auto& l = v["logspace"];
        if (!l.is_array() || l.size() != 3 || !l[2].is_number_integer() || l[2].get<int>() < 1) {
            throw ConfigError(where + ".logspace must be [lo_exponent, hi_exponent, count]");
        }
        const double lo = l[0].get<double>();
        const double hi = l[1].get<double>();
        const int n = l[2].get<int>();
        for (int i = 0; i < n; ++i) {
            const double e = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
            out.push_back(std::pow(10.0, e));
        }
    } else {
        out.push_back(one(v));
    }
    if (out.empty()) throw ConfigError(where + " is empty");
    for (double j : out) {
        if (!(j > 0.0) || !std::isfinite(j)) throw ConfigError(where + " values must be positive");
    }
    return out;
}

template <class T>
std::vector<T> scalar_or_array(const json& v, const std::string& where) {
    try {
        if (v.is_array()) return v.get<std::vector<T>>();
        return {v.get<T>()};
    } catch (const json::exception&) {
        throw ConfigError(where + " has the wrong type");
    }
}

std::vector<int> int_grid(const json& v, const std::string& where) {
    if (v.is_object()) {
        if (v.size() != 1 || !v.contains("range")) {
            throw ConfigError(where + " object form must be {\"range\": [first, last]}");
        }
        const auto r = v["range"];
        if (!r.is_array() || r.size() != 2) throw ConfigError(where + ".range must be [first, last]");
        return range(r[0].get<int>(), r[1].get<int>());
    }
    auto out = scalar_or_array<int>(v, where);
    if (out.empty()) throw ConfigError(where + " is empty");
    return out;
}

void parse_lattice(const json& node, LatticeConfig& c) {
    Section s(node, "lattice");
    s.read("sites", c.sites);
    s.read("cutoff", c.cutoff);
    if (const json* v = s.get("topology")) {
        c.topologies.clear();
        for (const auto& name : scalar_or_array<std::string>(*v, s.where("topology"))) {
            try {
                c.topologies.push_back(parse_topology(name));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (const json* v = s.get("j_over_u")) c.j_over_u = parse_j_grid(*v, s.where("j_over_u"));
    if (const json* v = s.get("disorder")) c.disorder = scalar_or_array<double>(*v, s.where("disorder"));
    s.read("realizations", c.realizations);
    if (c.sites < 2) throw ConfigError("lattice.sites must be >= 2");
    if (c.cutoff < 1) throw ConfigError("lattice.cutoff must be >= 1");
    if (c.realizations < 1) throw ConfigError("lattice.realizations must be >= 1");
    if (c.topologies.empty() || c.disorder.empty()) throw ConfigError("lattice grids must be non-empty");
    for (double d : c.disorder) {
        if (!(d >= 0.0 && d < 1.0)) throw ConfigError("lattice.disorder must lie in [0, 1)");
    }
}

void parse_dynamics(const json& node, DynamicsConfig& c) {
    Section s(node, "dynamics");
    if (const json* v = s.get("dt")) {
        if (v->is_object()) {
            const auto steps = int_grid(*v, s.where("dt"));
            c.dt.assign(steps.begin(), steps.end());
        } else {
            c.dt = scalar_or_array<double>(*v, s.where("dt"));
        }
    }
    s.read("virtual_nodes", c.virtual_nodes);
    if (const json* v = s.get("injection_site")) {
        if (!v->is_number_integer()) throw ConfigError("dynamics.injection_site must be an integer");
        c.injection_site = v->get<int>() - 1;
    }
    if (c.dt.empty()) throw ConfigError("dynamics.dt is empty");
    for (double dt : c.dt) {
        if (!(dt > 0.0)) throw ConfigError("dynamics.dt values must be positive");
    }
    if (c.virtual_nodes < 1) throw ConfigError("dynamics.virtual_nodes must be >= 1");
}

void parse_protocol(const json& node, ProtocolConfig& c) {
    Section s(node, "protocol");
    if (const json* v = s.get("wash_out")) {
        if (!v->is_null()) {
            if (!v->is_number_integer() || v->get<long long>() < 0) throw ConfigError("protocol.wash_out must be a non-negative integer");
            c.wash_out = v->get<std::size_t>();
        }
    }
    s.read("train", c.train);
    s.read("test", c.test);
    if (c.train < 2 || c.test < 2) throw ConfigError("protocol.train and protocol.test must be >= 2");
}

void parse_task_section(const json& node, TaskConfig& c) {
    Section s(node, "task");
    if (const json* v = s.get("kind")) {
        if (!v->is_string()) throw ConfigError("task.kind must be a string");
        c.kind = parse_task(v->get<std::string>());
    }
    if (const json* v = s.get("delays")) c.delays = int_grid(*v, s.where("delays"));
    s.read("degree", c.degree);
    if (const json* v = s.get("orders")) c.orders = int_grid(*v, s.where("orders"));
    s.read("threshold", c.threshold);
    if (const json* v = s.get("optimize")) {
        const auto name = v->is_string() ? v->get<std::string>() : std::string();
        if (name == "max-delay") c.objective = DtObjective::MaxDelay;
        else if (name == "per-index") c.objective = DtObjective::PerIndex;
        else throw ConfigError("task.optimize must be \"max-delay\" or \"per-index\"");
    }
    for (int d : c.delays) {
        if (d < 0) throw ConfigError("task.delays must be non-negative");
    }
    for (int n : c.orders) {
        if (n < 2) throw ConfigError("task.orders must be >= 2");
    }
    if (c.degree < 1) throw ConfigError("task.degree must be >= 1");
    if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("task.threshold must lie in (0, 1)");
}

void parse_noise(const json& node, NoiseConfig& c) {
    Section s(node, "noise");
    if (const json* v = s.get("measurements")) {
        c.measurements.clear();
        const auto one = [&](const json& e) -> std::optional<double> {
            if (e.is_null() || (e.is_string() && e.get<std::string>() == "ideal")) return std::nullopt;
            if (!e.is_number() || !(e.get<double>() >= 1.0)) {
                throw ConfigError("noise.measurements entries must be >= 1, null or \"ideal\"");
            }
            return e.get<double>();
        };
        if (v->is_array()) {
            for (const auto& e : *v) c.measurements.push_back(one(e));
        } else {
            c.measurements.push_back(one(*v));
        }
        if (c.measurements.empty()) throw ConfigError("noise.measurements is empty");
    }
    s.read("realizations", c.realizations);
    if (c.realizations < 1) throw ConfigError("noise.realizations must be >= 1");
}

void parse_spectral(const json& node, SpectralConfig& c) {
    Section s(node, "spectral");
    s.read("sites", c.sites);
    if (const json* v = s.get("total")) {
        if (!v->is_null()) {
            if (!v->is_number_integer()) throw ConfigError("spectral.total must be an integer");
            c.total = v->get<int>();
        }
    }
    s.read("parity", c.parity);
    if (const json* v = s.get("topology")) {
        try {
            c.topology = parse_topology(v->get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(std::string("spectral.topology: ") + e.what());
        }
    }
    if (const json* v = s.get("j_over_un")) c.j_over_un = parse_j_grid(*v, s.where("j_over_un"));
    s.read("inner_fraction", c.inner_fraction);
    s.read("epsilon", c.epsilon);
    s.read("eigenvectors", c.eigenvectors);
    if (c.parity != "odd" && c.parity != "even") throw ConfigError("spectral.parity must be odd or even");
    if (!(c.inner_fraction > 0.0 && c.inner_fraction <= 1.0)) {
        throw ConfigError("spectral.inner_fraction must lie in (0, 1]");
    }
    if (c.sites < 2) throw ConfigError("spectral.sites must be >= 2");
    if (c.eigenvectors < 1) throw ConfigError("spectral.eigenvectors must be >= 1");
}

void parse_output(const json& node, OutputConfig& c) {
    Section s(node, "output");
    s.read("dir", c.dir);
    s.read("name", c.name);
    if (const json* v = s.get("format")) {
        if (!v->is_string()) throw ConfigError("output.format must be a string");
        c.format = parse_format(v->get<std::string>());
    }
    s.read("features", c.features);
    if (c.name.empty()) throw ConfigError("output.name must not be empty");
}

} // namespace

ExperimentConfig parse_config(const json& document) {
    ExperimentConfig c;
    {
        Section root(document, "config");
        if (const json* v = root.get("lattice")) parse_lattice(*v, c.lattice);
        if (const json* v = root.get("dynamics")) parse_dynamics(*v, c.dynamics);
        if (const json* v = root.get("protocol")) parse_protocol(*v, c.protocol);
        if (const json* v = root.get("task")) parse_task_section(*v, c.task);
        if (const json* v = root.get("readout")) {
            Section s(*v, "readout");
            s.read("beta", c.beta);
            if (!(c.beta >= 0.0)) throw ConfigError("readout.beta must be non-negative");
        }
        if (const json* v = root.get("noise")) parse_noise(*v, c.noise);
        if (const json* v = root.get("spectral")) parse_spectral(*v, c.spectral);
        if (const json* v = root.get("cutoff_check")) {
            Section s(*v, "cutoff_check");
            if (const json* cut = s.get("cutoffs")) c.cutoffs = int_grid(*cut, s.where("cutoffs"));
            for (int n : c.cutoffs) {
                if (n < 1) throw ConfigError("cutoff_check.cutoffs must be >= 1");
            }
        }
        if (const json* v = root.get("output")) parse_output(*v, c.output);
        if (const json* v = root.get("seed")) {
            if (!v->is_number_integer() || v->get<long long>() < 0) throw ConfigError("seed must be a non-negative integer");
            c.seed = v->get<std::uint64_t>();
        }
    }
    if (c.task.delays.empty()) c.task.delays = range(0, 15);
    if (c.task.orders.empty()) c.task.orders = range(2, 14);
    if (c.dynamics.injection_site < 0 || c.dynamics.injection_site >= c.lattice.sites) {
        throw ConfigError("dynamics.injection_site must lie in 1..lattice.sites");
    }
    if (c.spectral.j_over_un.empty()) {
        c.spectral.j_over_un = parse_j_grid(json{{"logspace", {-2, 1, 31}}}, "spectral.j_over_un");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json document;
    try {
        document = json::parse(in, nullptr, true, /*ignore_comments=*/false);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_config(document);
}

json to_json(const ExperimentConfig& c) {
    json topologies = json::array();
    for (auto t : c.lattice.topologies) topologies.push_back(std::string(to_string(t)));
    json measurements = json::array();
    for (const auto& m : c.noise.measurements) measurements.push_back(m ? json(*m) : json(nullptr));
    return {
        {"lattice",
         {{"sites", c.lattice.sites},
          {"cutoff", c.lattice.cutoff},
          {"topology", topologies},
          {"j_over_u", c.lattice.j_over_u},
          {"disorder", c.lattice.disorder},
          {"realizations", c.lattice.realizations}}},
        {"dynamics",
         {{"dt", c.dynamics.dt},
          {"virtual_nodes", c.dynamics.virtual_nodes},
          {"injection_site", c.dynamics.injection_site + 1}}},
        {"protocol",
         {{"wash_out", c.protocol.wash_out ? json(*c.protocol.wash_out) : json(nullptr)},
          {"train", c.protocol.train},
          {"test", c.protocol.test}}},
        {"task",
         {{"kind", std::string(to_string(c.task.kind))},
          {"delays", c.task.delays},
          {"degree", c.task.degree},
          {"orders", c.task.orders},
          {"threshold", c.task.threshold},
          {"optimize", std::string(to_string(c.task.objective))}}},
        {"readout", {{"beta", c.beta}}},
        {"noise", {{"measurements", measurements}, {"realizations", c.noise.realizations}}},
        {"spectral",
         {{"sites", c.spectral.sites},
          {"total", c.spectral.total ? json(*c.spectral.total) : json(nullptr)},
          {"parity", c.spectral.parity},
          {"topology", std::string(to_string(c.spectral.topology))},
          {"j_over_un", c.spectral.j_over_un},
          {"inner_fraction", c.spectral.inner_fraction},
          {"epsilon", c.spectral.epsilon},
          {"eigenvectors", c.spectral.eigenvectors}}},
        {"cutoff_check", {{"cutoffs", c.cutoffs}}},
        {"output",
         {{"dir", c.output.dir},
          {"name", c.output.name},
          {"format", std::string(to_string(c.output.format))},
          {"features", c.output.features}}},
        {"seed", c.seed},
    };
}

std::string config_hash(const ExperimentConfig& config) {
    json canonical = to_json(config);
    // Where results go does not change what they are.
    canonical.erase("output");
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical.dump())));
    return buffer;
}

} // namespace bhqrc
