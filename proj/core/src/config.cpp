#include "randomkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <nlohmann/json.hpp>
#include <sstream>

namespace randomkit {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double parse_decimal(std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw std::invalid_argument("'" + std::string(text) + "' is not a number");
    }
    return value;
}

std::string canonical_param(std::string_view name) {
    static const std::map<std::string, std::string, std::less<>> aliases{
        {"γ", "gamma"}, {"λ", "lambda"}, {"α", "alpha"}, {"η", "eta"}};
    if (auto it = aliases.find(name); it != aliases.end()) return it->second;
    return std::string(name);
}

double json_number(const json& value, const std::string& path) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        try {
            return parse_number(value.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(path, e.what());
        }
    }
    throw ConfigError(path, "expected a number or a fraction string");
}

int json_count(const json& obj, const char* key, const std::string& path, int minimum) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) throw ConfigError(where, "is required");
    const auto& v = obj.at(key);
    if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == std::floor(v.get<double>()))) {
        throw ConfigError(where, "must be an integer");
    }
    const auto value = v.get<long long>();
    if (value < minimum || value > std::numeric_limits<int>::max()) {
        throw ConfigError(where, "must be an integer >= " + std::to_string(minimum));
    }
    return static_cast<int>(value);
}

AllocationTarget json_target(const json& value, const std::string& path) {
    if (!value.is_array()) throw ConfigError(path, "must be an array of positive weights");
    std::vector<double> w;
    for (std::size_t i = 0; i < value.size(); ++i) {
        w.push_back(json_number(value[i], path + "[" + std::to_string(i) + "]"));
    }
    try {
        return normalize_target(w);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

ProcedureConfig finish_procedure(ProcedureKind kind, const AllocationTarget& target, ProcedureParams params,
                                 int planned_n, const std::map<std::string, bool>& given,
                                 const std::string& path, const std::string& params_path) {
    for (auto name : required_params(kind)) {
        if (!given.count(std::string(name))) {
            throw ConfigError(params_path, std::string(kind_name(kind)) + " needs parameter '" + std::string(name) + "'");
        }
    }
    try {
        return make_config(kind, target, params, planned_n);
    } catch (const InvalidParameter& e) {
        throw ConfigError(params_path + "." + e.param(), e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace

double parse_number(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty number");
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const double num = parse_decimal(std::string_view(s).substr(0, slash));
        const double den = parse_decimal(std::string_view(s).substr(slash + 1));
        if (den == 0.0) throw std::invalid_argument("'" + s + "' divides by zero");
        return num / den;
    }
    return parse_decimal(s);
}

AllocationTarget parse_weights(std::string_view text) {
    std::vector<double> w;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) w.push_back(parse_number(item));
    return normalize_target(w);
}

std::vector<std::string_view> required_params(ProcedureKind kind) {
    switch (kind) {
        case ProcedureKind::PBD:
        case ProcedureKind::BSD:
        case ProcedureKind::EUD:
            return {"b"};
        case ProcedureKind::BCDWIT:
            return {"p", "b"};
        case ProcedureKind::EBCD:
            return {"p"};
        case ProcedureKind::ABCD:
        case ProcedureKind::DLUD:
            return {"a"};
        case ProcedureKind::GBCD:
        case ProcedureKind::BBCD:
        case ProcedureKind::DBCD:
            return {"gamma"};
        case ProcedureKind::BUD:
            return {"lambda"};
        case ProcedureKind::MWUD:
            return {"alpha"};
        case ProcedureKind::MAXENT:
            return {"eta"};
        case ProcedureKind::CRD:
        case ProcedureKind::RAND:
        case ProcedureKind::TMD:
            return {};
    }
    return {};
}

void set_param(ProcedureKind kind, ProcedureParams& params, std::string_view raw_name, double value,
               const std::string& path) {
    const std::string name = canonical_param(raw_name);
    const auto allowed = required_params(kind);
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw ConfigError(path, std::string(kind_name(kind)) + " has no parameter '" + std::string(raw_name) + "'");
    }
    auto integer = [&](int& slot) {
        if (value != std::floor(value) || std::abs(value) > 1e9) throw ConfigError(path, "must be an integer");
        slot = static_cast<int>(value);
    };
    if (name == "b") integer(params.b);
    else if (name == "lambda") integer(params.lambda);
    else if (name == "p") params.p = value;
    else if (name == "a") params.a = value;
    else if (name == "gamma") params.gamma = value;
    else if (name == "alpha") params.alpha = value;
    else if (name == "eta") params.eta = value;
}

ProcedureConfig parse_procedure_spec(std::string_view spec, const AllocationTarget& target, int n) {
    const std::string text = trim(spec);
    const auto colon = text.find(':');
    const std::string kind_text = trim(std::string_view(text).substr(0, colon));
    const auto kind = parse_kind(kind_text);
    if (!kind) throw ConfigError("proc", "unknown procedure '" + kind_text + "'");

    ProcedureParams params;
    std::map<std::string, bool> given;
    int planned_n = n;
    if (colon != std::string::npos) {
        std::istringstream in(text.substr(colon + 1));
        std::string item;
        while (std::getline(in, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("proc", "expected NAME=VALUE, got '" + trim(item) + "'");
            const std::string name = canonical_param(trim(std::string_view(item).substr(0, eq)));
            const std::string where = "proc." + name;
            double value = 0.0;
            try {
                value = parse_number(std::string_view(item).substr(eq + 1));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where, e.what());
            }
            if (name == "n" && (*kind == ProcedureKind::RAND || *kind == ProcedureKind::TMD)) {
                if (value != std::floor(value) || value < 1) throw ConfigError(where, "must be an integer >= 1");
                planned_n = static_cast<int>(value);
                continue;
            }
            set_param(*kind, params, name, value, where);
            given[name] = true;
        }
    }
    return finish_procedure(*kind, target, params, planned_n, given, "proc", "proc");
}

RunConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");

    static const char* known[] = {"procedures", "w",       "n",       "nsim",   "seed",  "metrics",
                                  "output_dir", "emit_plots", "threads", "format", "brt_normalization"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError(key, "unknown field");
        }
    }

    RunConfig cfg;
    cfg.n = json_count(doc, "n", "", 1);
    cfg.nsim = json_count(doc, "nsim", "", 1);
    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
            throw ConfigError("seed", "must be a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("threads")) cfg.threads = json_count(doc, "threads", "", 0);
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigError("output_dir", "must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("emit_plots")) {
        if (!doc.at("emit_plots").is_boolean()) throw ConfigError("emit_plots", "must be true or false");
        cfg.emit_plots = doc.at("emit_plots").get<bool>();
    }
    if (doc.contains("format")) {
        const auto& f = doc.at("format");
        if (f == "csv") cfg.format = OutputFormat::Csv;
        else if (f == "json") cfg.format = OutputFormat::Json;
        else throw ConfigError("format", "must be \"csv\" or \"json\"");
    }
    if (doc.contains("brt_normalization")) {
        const auto& f = doc.at("brt_normalization");
        if (f == "absolute") cfg.brt_normalization = BrtNormalization::Absolute;
        else if (f == "minmax") cfg.brt_normalization = BrtNormalization::MinMax;
        else throw ConfigError("brt_normalization", "must be \"absolute\" or \"minmax\"");
    }

    if (doc.contains("metrics")) {
        const auto& m = doc.at("metrics");
        if (!m.is_array()) throw ConfigError("metrics", "must be an array of metric identifiers");
        if (m.empty()) throw ConfigError("metrics", "must name at least one metric");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string where = "metrics[" + std::to_string(i) + "]";
            if (!m[i].is_string() || !is_metric_id(m[i].get<std::string>())) {
                throw ConfigError(where, "unknown metric " + m[i].dump());
            }
            cfg.metrics.push_back(m[i].get<std::string>());
        }
    } else {
        cfg.metrics.assign(std::begin(kMetricIds), std::end(kMetricIds));
    }

    std::optional<AllocationTarget> default_target;
    if (doc.contains("w")) default_target = json_target(doc.at("w"), "w");

    if (!doc.contains("procedures")) throw ConfigError("procedures", "is required");
    const auto& procs = doc.at("procedures");
    if (!procs.is_array() || procs.empty()) throw ConfigError("procedures", "must be a non-empty array");
    for (std::size_t i = 0; i < procs.size(); ++i) {
        const std::string path = "procedures[" + std::to_string(i) + "]";
        const auto& p = procs[i];
        if (!p.is_object()) throw ConfigError(path, "must be an object");
        for (const auto& [key, value] : p.items()) {
            if (key != "kind" && key != "params" && key != "w") throw ConfigError(path + "." + key, "unknown field");
        }
        if (!p.contains("kind") || !p.at("kind").is_string()) throw ConfigError(path + ".kind", "is required");
        const auto kind = parse_kind(p.at("kind").get<std::string>());
        if (!kind) throw ConfigError(path + ".kind", "unknown procedure " + p.at("kind").dump());

        AllocationTarget target;
        if (p.contains("w")) {
            target = json_target(p.at("w"), path + ".w");
        } else if (default_target) {
            target = *default_target;
        } else if (is_two_arm_only(*kind)) {
            target = normalize_target({1.0, 1.0});
        } else {
            throw ConfigError(path + ".w", "is required (or give a top-level \"w\")");
        }

        ProcedureParams params;
        std::map<std::string, bool> given;
        int planned_n = cfg.n;
        if (p.contains("params")) {
            const auto& q = p.at("params");
            if (!q.is_object()) throw ConfigError(path + ".params", "must be an object");
            for (const auto& [raw, value] : q.items()) {
                const std::string name = canonical_param(raw);
                const std::string where = path + ".params." + raw;
                const double v = json_number(value, where);
                if (name == "n" && (*kind == ProcedureKind::RAND || *kind == ProcedureKind::TMD)) {
                    if (v != std::floor(v) || v < 1) throw ConfigError(where, "must be an integer >= 1");
                    planned_n = static_cast<int>(v);
                    continue;
                }
                set_param(*kind, params, name, v, where);
                given[name] = true;
            }
        }
        cfg.procedures.push_back(finish_procedure(*kind, target, params, planned_n, given, path, path + ".params"));
        if (!cfg.procedures.back().caps.empty() && planned_n != cfg.n) {
            throw ConfigError(path + ".params.n", "must equal the run's n = " + std::to_string(cfg.n));
        }
    }

    const auto& first = cfg.procedures.front().target;
    for (std::size_t i = 1; i < cfg.procedures.size(); ++i) {
        if (!(cfg.procedures[i].target == first)) {
            throw ConfigError("procedures[" + std::to_string(i) + "].w",
                              "all procedures in one run must share the same allocation target");
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("", "cannot read config file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace randomkit
