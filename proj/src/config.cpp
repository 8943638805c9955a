#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>

#include "fairmw/csv.hpp"
#include "fairmw/error.hpp"
#include "fairmw/experiment.hpp"

namespace fairmw {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::ConfigError, message); }

double to_double(const std::string& key, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        fail(key + ": expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t to_uint(const std::string& key, std::string_view text) {
    text = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(key + ": expected a nonnegative integer, got '" + std::string(text) + "'");
    }
    return value;
}

bool to_bool(const std::string& key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail(key + ": expected true or false, got '" + std::string(text) + "'");
}

// Comma- or whitespace-separated items.
std::vector<std::string> to_list(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::vector<double> to_numbers(const std::string& key, std::string_view text) {
    std::vector<double> out;
    for (const auto& item : to_list(text)) out.push_back(to_double(key, item));
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    const std::filesystem::path p(value);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

const std::set<std::string>& scalar_keys() {
    static const std::set<std::string> keys{
        "engine", "horizon", "eta", "seed", "trials", "lambda.fpr", "lambda.fnr", "lambda.regret", "b.fpr", "b.fnr",
        "b.regret", "budget.fpr", "budget.fnr", "dirichlet_alpha", "stride", "allow_empty", "epsilon",
        "data.source", "data.p", "data.mu_a", "data.mu_b", "data.preset", "data.path", "data.label_column",
        "data.positive_value", "data.group_column", "data.group_a_value", "data.group_a_min", "data.features",
        "data.exclude", "data.split_ratio", "data.split_seed", "experts.source", "experts.rates", "experts.file",
        "experts.builtin", "experts.include_group", "experts.epochs", "experts.learning_rate",
    };
    return keys;
}

constexpr std::string_view kProfilePrefix = "experts.profile.";

void check_known(const std::string& key) {
    if (scalar_keys().count(key) != 0) return;
    if (key.rfind(kProfilePrefix, 0) == 0 && key.size() > kProfilePrefix.size()) return;
    fail("unknown key '" + key + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

KeyValues KeyValues::parse(std::string_view text, std::string_view origin) {
    KeyValues kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) fail(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
        kv.set(key, std::string(trim(line.substr(eq + 1))));
    }
    return kv;
}

void KeyValues::set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(key, std::move(value));
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::filesystem::path bundled_data_dir() {
#ifdef FAIRMW_DEFAULT_DATA_DIR
    return FAIRMW_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

std::filesystem::path find_preset(const std::string& name, const std::filesystem::path& base_dir) {
    std::vector<std::filesystem::path> candidates;
    const std::string file = name.ends_with(".cfg") ? name : name + ".cfg";
    candidates.push_back(base_dir / file);
    candidates.push_back(base_dir / "presets" / file);
    if (const char* env = std::getenv("FAIRMW_DATA_DIR"); env != nullptr && *env != '\0') {
        candidates.push_back(std::filesystem::path(env) / "presets" / file);
    }
    candidates.push_back(bundled_data_dir() / "presets" / file);
    std::string searched;
    for (const auto& c : candidates) {
        std::error_code ec;
        if (std::filesystem::is_regular_file(c, ec)) return c;
        searched += (searched.empty() ? "" : ", ") + c.string();
    }
    fail("preset '" + name + "' not found (searched " + searched + ")");
}

namespace {

// Preset entries come first; the config's own entries override them. Paths
// are resolved against the file that set them.
KeyValues merge_preset(const KeyValues& source, const std::filesystem::path& base_dir,
                       std::filesystem::path& path_base) {
    KeyValues kv;
    path_base = base_dir;
    if (const auto preset = source.get("data.preset")) {
        const auto preset_path = find_preset(*preset, base_dir);
        const KeyValues preset_kv = KeyValues::parse(read_file(preset_path), preset_path.string());
        for (const auto& [key, value] : preset_kv.entries()) {
            if (key.rfind("data.", 0) != 0 || key == "data.preset") {
                fail(preset_path.string() + ": presets may only set data.* keys, found '" + key + "'");
            }
            check_known(key);
            kv.set(key, value);
        }
        if (!source.contains("data.path")) path_base = preset_path.parent_path();
    }
    for (const auto& [key, value] : source.entries()) kv.set(key, value);
    return kv;
}

DataSpec parse_data(const KeyValues& kv, const std::filesystem::path& path_base) {
    const auto get = [&](const char* key) { return kv.get(key); };
    DataSpec data;
    const std::string data_source = get("data.source").value_or(get("data.preset") || get("data.path") ? "dataset"
                                                                                                       : "synthetic");
    if (data_source == "synthetic") {
        data.source = DataSource::synthetic;
        if (auto v = get("data.p")) data.p = to_double("data.p", *v);
        if (auto v = get("data.mu_a")) data.mu_a = to_double("data.mu_a", *v);
        if (auto v = get("data.mu_b")) data.mu_b = to_double("data.mu_b", *v);
        for (double x : {data.p, data.mu_a, data.mu_b}) {
            if (!(x >= 0.0 && x <= 1.0)) fail("data.p, data.mu_a and data.mu_b must lie in [0, 1]");
        }
    } else if (data_source == "dataset") {
        data.source = DataSource::dataset;
        data.preset = get("data.preset").value_or("");
        const auto path = get("data.path");
        if (!path) fail("dataset runs need data.path (directly or through data.preset)");
        data.path = resolve(path_base, *path);
        DatasetSchema& schema = data.schema;
        schema.label_column = get("data.label_column").value_or("");
        schema.positive_value = get("data.positive_value").value_or("");
        schema.group_column = get("data.group_column").value_or("");
        schema.group_a_value = get("data.group_a_value").value_or("");
        if (auto v = get("data.group_a_min")) schema.group_a_min = to_double("data.group_a_min", *v);
        if (auto v = get("data.features"); v && trim(*v) != "all") schema.feature_columns = to_list(*v);
        if (auto v = get("data.exclude")) schema.excluded_columns = to_list(*v);
        try {
            schema.validate();
        } catch (const Error& e) {
            fail(e.what());
        }
        if (auto v = get("data.split_ratio")) data.split_ratio = to_double("data.split_ratio", *v);
        if (!(data.split_ratio > 0.0 && data.split_ratio < 1.0)) fail("data.split_ratio must lie in (0, 1)");
        if (auto v = get("data.split_seed")) data.split_seed = to_uint("data.split_seed", *v);
    } else {
        fail("data.source must be synthetic or dataset, got '" + data_source + "'");
    }
    return data;
}

}  // namespace

DataSpec parse_data_spec(const KeyValues& source, const std::filesystem::path& base_dir) {
    for (const auto& [key, value] : source.entries()) check_known(key);
    std::filesystem::path path_base;
    return parse_data(merge_preset(source, base_dir, path_base), path_base);
}

ExperimentConfig parse_experiment(const KeyValues& source, const std::filesystem::path& base_dir) {
    for (const auto& [key, value] : source.entries()) check_known(key);
    std::filesystem::path path_base;
    const KeyValues kv = merge_preset(source, base_dir, path_base);

    ExperimentConfig cfg;
    cfg.source = source;
    cfg.base_dir = base_dir;
    RunConfig& run = cfg.run;

    const auto get = [&](const char* key) { return kv.get(key); };

    if (auto v = get("engine")) run.engine = parse_engine(trim(*v));
    if (auto v = get("horizon")) run.horizon = to_uint("horizon", *v);
    if (auto v = get("eta"); v && trim(*v) != "auto") run.eta = to_double("eta", *v);
    if (auto v = get("seed")) run.seed = to_uint("seed", *v);
    if (auto v = get("trials")) run.trials = to_uint("trials", *v);
    const char* lambda_keys[3] = {"lambda.fpr", "lambda.fnr", "lambda.regret"};
    const char* b_keys[3] = {"b.fpr", "b.fnr", "b.regret"};
    for (int i = 0; i < 3; ++i) {
        if (auto v = get(lambda_keys[i])) run.lambda[i] = to_double(lambda_keys[i], *v);
        if (auto v = get(b_keys[i])) run.b_tolerance[i] = to_double(b_keys[i], *v);
    }
    if (auto v = get("budget.fpr")) run.fairness_budget[0] = to_double("budget.fpr", *v);
    if (auto v = get("budget.fnr")) run.fairness_budget[1] = to_double("budget.fnr", *v);
    if (auto v = get("dirichlet_alpha")) run.dirichlet_alpha = to_double("dirichlet_alpha", *v);
    if (auto v = get("stride")) run.q_recompute_stride = to_uint("stride", *v);
    if (auto v = get("allow_empty")) run.allow_empty = to_bool("allow_empty", *v);
    if (auto v = get("epsilon")) {
        cfg.epsilon = to_double("epsilon", *v);
        if (*cfg.epsilon < 0.0) fail("epsilon must be >= 0");
    }
    run.validate();

    cfg.data = parse_data(kv, path_base);
    const DataSpec& data = cfg.data;
    if (data.source == DataSource::synthetic && run.horizon == 0 && !run.allow_empty) {
        fail("synthetic data needs horizon >= 1");
    }

    // experts
    ExpertSpec& experts = cfg.experts;
    const std::string expert_source = get("experts.source").value_or("synthetic");
    if (expert_source == "synthetic") {
        experts.source = ExpertSource::synthetic;
        for (const auto& [key, value] : kv.entries()) {
            if (key.rfind(kProfilePrefix, 0) != 0) continue;
            const auto rates = to_numbers(key, value);
            if (rates.size() != kCells) fail(key + ": expected 4 error rates (A-, A+, B-, B+)");
            ErrorProfile profile{{rates[0], rates[1], rates[2], rates[3]}};
            for (double r : rates) {
                if (!(r >= 0.0 && r <= 1.0)) fail(key + ": error rates must lie in [0, 1]");
            }
            experts.names.push_back(key.substr(kProfilePrefix.size()));
            experts.profiles.push_back(profile);
        }
        if (auto v = get("experts.rates")) {
            if (!experts.profiles.empty()) fail("use either experts.rates or experts.profile.*, not both");
            const auto rates = to_numbers("experts.rates", *v);
            for (std::size_t i = 0; i < rates.size(); ++i) {
                if (!(rates[i] >= 0.0 && rates[i] <= 1.0)) fail("experts.rates: error rates must lie in [0, 1]");
                experts.names.push_back("f" + std::to_string(i + 1));
                experts.profiles.push_back(ErrorProfile::uniform(rates[i]));
            }
        }
        if (experts.profiles.size() < 2) fail("synthetic experts need at least 2 profiles");
        if (!cfg.epsilon) {
            double eps = 0.0;
            for (const auto& p : experts.profiles) eps = std::max(eps, p.max_group_gap());
            cfg.epsilon = eps;
        }
    } else if (expert_source == "file") {
        experts.source = ExpertSource::file;
        const auto file = get("experts.file");
        if (!file) fail("experts.source = file needs experts.file");
        experts.file = resolve(base_dir, *file);
    } else if (expert_source == "builtin") {
        experts.source = ExpertSource::builtin;
        if (data.source != DataSource::dataset) fail("built-in experts need a dataset to train on");
        for (const auto& name : to_list(get("experts.builtin").value_or("logistic,stump"))) {
            if (name == "logistic") {
                experts.builtins.push_back(BuiltinKind::logistic);
            } else if (name == "stump") {
                experts.builtins.push_back(BuiltinKind::stump);
            } else {
                fail("experts.builtin: unknown model '" + name + "'");
            }
        }
        if (experts.builtins.size() < 2) fail("built-in experts need at least 2 models");
        if (auto v = get("experts.include_group")) experts.include_group = to_bool("experts.include_group", *v);
        if (auto v = get("experts.epochs")) experts.epochs = to_uint("experts.epochs", *v);
        if (auto v = get("experts.learning_rate")) experts.learning_rate = to_double("experts.learning_rate", *v);
        if (!(experts.learning_rate > 0.0)) fail("experts.learning_rate must be positive");
    } else {
        fail("experts.source must be synthetic, file or builtin, got '" + expert_source + "'");
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        fail(e.what());
    }
    return parse_experiment(KeyValues::parse(text, path.string()), path.parent_path());
}

ExperimentConfig with_override(const ExperimentConfig& config, const std::string& key, const std::string& value) {
    KeyValues kv = config.source;
    kv.set(key, value);
    return parse_experiment(kv, config.base_dir);
}

std::vector<std::pair<std::string, std::string>> sweep_assignments(std::string_view parameter,
                                                                   std::string_view value) {
    const auto triple = [&](const char* a, const char* b, const char* c) {
        const auto items = to_list(value);
        if (items.size() != 3) {
            fail(std::string(parameter) + " sweep values need 3 comma-separated numbers, got '" +
                 std::string(value) + "'");
        }
        return std::vector<std::pair<std::string, std::string>>{{a, items[0]}, {b, items[1]}, {c, items[2]}};
    };
    if (parameter == "eta") return {{"eta", std::string(trim(value))}};
    if (parameter == "q_recompute_stride" || parameter == "stride") return {{"stride", std::string(trim(value))}};
    if (parameter == "lambda") return triple("lambda.fpr", "lambda.fnr", "lambda.regret");
    if (parameter == "b_tolerance" || parameter == "b") return triple("b.fpr", "b.fnr", "b.regret");
    fail("cannot sweep '" + std::string(parameter) + "' (use eta, lambda, b_tolerance or q_recompute_stride)");
}

}  // namespace fairmw
