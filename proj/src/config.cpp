#include "blindmm/config.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <json.hpp>

#include "blindmm/csv.hpp"
#include "blindmm/scenarios.hpp"

namespace blindmm {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(std::string_view field, std::string_view what) {
    throw Error(ErrorCode::Config, fmt::format("{}: {}", field, what));
}

double number(const json& j, std::string_view field) {
    if (!j.is_number()) fail(field, fmt::format("expected a number, got {}", j.dump()));
    return j.get<double>();
}

Matrix matrix_field(const json& j, std::string_view field, const std::filesystem::path& base) {
    if (j.is_string()) {
        try {
            return read_matrix_csv(base / j.get<std::string>());
        } catch (const Error& e) {
            fail(field, e.what());
        }
    }
    if (!j.is_array() || j.empty()) fail(field, "expected a nonempty array of rows or a CSV path");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) fail(field, "rows must be nonempty arrays");
    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != cols) {
            fail(field, fmt::format("row {} has a different length than row 0", r));
        }
        for (const auto& v : row) data.push_back(number(v, field));
    }
    return Matrix(rows, cols, std::move(data));
}

DirectionPolicy direction(const json& j, const std::filesystem::path& base) {
    using K = DirectionPolicy::Kind;
    constexpr std::string_view field = "directions";
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& e : j) v.push_back(number(e, field));
        if (v.empty()) fail(field, "explicit direction is empty");
        return {K::Explicit, 0, Vector(std::move(v))};
    }
    if (!j.is_string()) fail(field, fmt::format("unrecognised entry {}", j.dump()));
    const auto s = j.get<std::string>();
    if (s == "max-eigenvector" || s == "max-noise") return {K::MaxEigenvector, 0, {}};
    if (s == "min-eigenvector" || s == "min-noise") return {K::MinEigenvector, 0, {}};
    if (s.starts_with("random-sphere:")) {
        std::size_t count = 0;
        const std::string_view n = std::string_view(s).substr(14);
        const auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), count);
        if (ec != std::errc() || ptr != n.data() + n.size() || count == 0) {
            fail(field, fmt::format("bad random-sphere count in '{}'", s));
        }
        return {K::RandomSphere, count, {}};
    }
    if (s.starts_with("file:")) {
        try {
            return {K::Explicit, 0, read_vector_csv(base / s.substr(5))};
        } catch (const Error& e) {
            fail(field, e.what());
        }
    }
    fail(field, fmt::format("unknown direction '{}' (max-eigenvector, min-eigenvector, "
                            "random-sphere:N, file:path or a numeric array)",
                            s));
}

}  // namespace

ConfigFile parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, fmt::format("invalid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw Error(ErrorCode::Config, "top level must be a JSON object");

    static constexpr std::string_view known[] = {"scenario", "estimators", "snr_grid_db",
                                                 "directions", "trials", "seed"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            fail(key, "unknown field");
        }
    }

    ConfigFile out;
    ExperimentConfig& c = out.config;

    if (!doc.contains("scenario")) fail("scenario", "missing");
    const auto& sc = doc["scenario"];
    if (sc.is_string()) {
        c.scenario = sc.get<std::string>();
        if (c.scenario == "inline") fail("scenario", "'inline' needs an object with H and Cw");
    } else if (sc.is_object()) {
        for (const auto& [key, _] : sc.items()) {
            if (key != "H" && key != "Cw") fail("scenario." + key, "unknown field");
        }
        if (!sc.contains("H")) fail("scenario.H", "missing");
        if (!sc.contains("Cw")) fail("scenario.Cw", "missing");
        c.scenario = "inline";
        c.H = matrix_field(sc["H"], "scenario.H", base_dir);
        c.Cw = matrix_field(sc["Cw"], "scenario.Cw", base_dir);
    } else {
        fail("scenario", "expected a name or an object with H and Cw");
    }

    if (!doc.contains("estimators")) fail("estimators", "missing");
    const auto& ests = doc["estimators"];
    if (!ests.is_array() || ests.empty()) fail("estimators", "expected a nonempty array");
    for (const auto& e : ests) {
        if (!e.is_string()) fail("estimators", fmt::format("expected strings, got {}", e.dump()));
        try {
            c.estimators.push_back(parse_estimator_spec(e.get<std::string>(), base_dir));
        } catch (const Error& err) {
            fail("estimators", err.what());
        }
    }

    if (doc.contains("snr_grid_db")) {
        const auto& g = doc["snr_grid_db"];
        if (!g.is_array()) fail("snr_grid_db", "expected an array of numbers");
        for (const auto& v : g) c.snr_grid_db.push_back(number(v, "snr_grid_db"));
    } else {
        c.snr_grid_db = default_snr_grid();
    }

    if (doc.contains("directions")) {
        const auto& d = doc["directions"];
        const bool single_vector = d.is_array() && !d.empty() && d.front().is_number();
        if (d.is_array() && !single_vector) {
            for (const auto& e : d) c.directions.push_back(direction(e, base_dir));
        } else {
            c.directions.push_back(direction(d, base_dir));
        }
    } else {
        using K = DirectionPolicy::Kind;
        c.directions = {{K::MaxEigenvector, 0, {}}, {K::MinEigenvector, 0, {}}};
    }

    c.trials = 10000;
    if (doc.contains("trials")) {
        const auto& t = doc["trials"];
        if (!t.is_number_integer() || t.get<std::int64_t>() < 2) {
            fail("trials", "expected an integer >= 2");
        }
        c.trials = t.get<std::size_t>();
    }

    if (doc.contains("seed")) {
        const auto& s = doc["seed"];
        if (!s.is_number_unsigned()) fail("seed", "expected a non-negative integer");
        out.seed = s.get<std::uint64_t>();
        c.seed = *out.seed;
    }

    validate(c);
    return out;
}

ConfigFile load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return parse_config(text, path.parent_path());
}

Model model_for_config(const ExperimentConfig& config) {
    if (config.scenario == "inline") return build_model(config.H, config.Cw);
    return model_for_scenario(config.scenario);
}

}  // namespace blindmm
