#include "wavekin/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "wavekin/errors.hpp"
#include "wavekin/grid_io.hpp"

namespace wavekin {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            fail(path, "unknown key '" + key + "'");
    }
}

const json& member(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing required key '") + key + "'");
    return *it;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "must be an integer");
    return j.get<int>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "must be a string");
    return j.get<std::string>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "must be an array of 3 numbers");
    return {get_number(j[0], path), get_number(j[1], path), get_number(j[2], path)};
}

Complex get_complex(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "must be [re, im]");
    return {get_number(j[0], path), get_number(j[1], path)};
}

// Natural cubic spline through strictly increasing abscissae. Shared by the
// omega and domega closures handed to DispersionRelation::custom.
struct Spline {
    std::vector<double> x, y, m; // m: second derivatives at the knots

    static Spline build(std::vector<double> xs, std::vector<double> ys) {
        const std::size_t n = xs.size();
        Spline s;
        s.x = std::move(xs);
        s.y = std::move(ys);
        s.m.assign(n, 0.0);
        if (n < 3) return s; // linear segment; m stays zero

        // Thomas algorithm for the tridiagonal system with natural ends.
        std::vector<double> diag(n, 2.0), rhs(n, 0.0), upper(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = s.x[i] - s.x[i - 1];
            const double hr = s.x[i + 1] - s.x[i];
            const double mu = hl / (hl + hr);
            upper[i] = 1.0 - mu;
            rhs[i] = 6.0 / (hl + hr) *
                     ((s.y[i + 1] - s.y[i]) / hr - (s.y[i] - s.y[i - 1]) / hl);
            const double w = mu / diag[i - 1];
            diag[i] -= (i >= 2 ? w * upper[i - 1] : 0.0);
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i)
            s.m[i] = (rhs[i] - upper[i] * s.m[i + 1]) / diag[i];
        return s;
    }

    std::size_t interval(double& t) const {
        const double lo = x.front(), hi = x.back();
        const double slack = 1e-9 * (hi - lo);
        if (t < lo - slack || t > hi + slack) {
            std::ostringstream msg;
            msg << "dispersion table: kappa " << t << " outside tabulated range [" << lo
                << ", " << hi << "]";
            throw DomainError(msg.str());
        }
        t = std::clamp(t, lo, hi);
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = static_cast<std::size_t>(it - x.begin());
        if (i == 0) i = 1;
        if (i == x.size()) i = x.size() - 1;
        return i - 1;
    }

    double eval(double t) const {
        const std::size_t i = interval(t);
        const double h = x[i + 1] - x[i];
        const double a = (x[i + 1] - t) / h;
        const double b = (t - x[i]) / h;
        return a * y[i] + b * y[i + 1] +
               ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    }

    double deriv(double t) const {
        const std::size_t i = interval(t);
        const double h = x[i + 1] - x[i];
        const double a = (x[i + 1] - t) / h;
        const double b = (t - x[i]) / h;
        return (y[i + 1] - y[i]) / h +
               ((3.0 * b * b - 1.0) * m[i + 1] - (3.0 * a * a - 1.0) * m[i]) * h / 6.0;
    }
};

DispersionRelation parse_dispersion(const json& j) {
    const std::string path = "dispersion";
    if (!j.is_object()) fail(path, "must be an object");
    check_keys(j, path, {"kind", "m", "c", "table"});

    const std::string kind = get_string(member(j, path, "kind"), path + ".kind");
    const double c = j.contains("c") ? get_number(j["c"], path + ".c") : 1.0;

    auto reject = [&](const char* key, const char* why) {
        if (j.contains(key)) fail(path + "." + key, std::string("does not apply: ") + why);
    };

    try {
        if (kind == "quadratic") {
            reject("table", "only the custom kind takes a table");
            return DispersionRelation::quadratic(get_number(member(j, path, "m"), path + ".m"), c);
        }
        if (kind == "massive") {
            reject("table", "only the custom kind takes a table");
            return DispersionRelation::relativistic(get_number(member(j, path, "m"), path + ".m"), c);
        }
        if (kind == "massless") {
            reject("m", "massless dispersion has no mass");
            reject("table", "only the custom kind takes a table");
            return DispersionRelation::massless(c);
        }
        if (kind == "custom") {
            reject("m", "the custom kind is defined by its table");
            const json& jt = member(j, path, "table");
            if (!jt.is_array() || jt.size() < 4)
                fail(path + ".table", "must be an array of at least 4 [kappa, omega] pairs");
            std::vector<double> xs, ys;
            xs.reserve(jt.size());
            ys.reserve(jt.size());
            for (const auto& row : jt) {
                if (!row.is_array() || row.size() != 2)
                    fail(path + ".table", "each row must be [kappa, omega]");
                xs.push_back(get_number(row[0], path + ".table"));
                ys.push_back(get_number(row[1], path + ".table"));
            }
            if (!(xs.front() > 0.0)) fail(path + ".table", "kappa values must be > 0");
            for (std::size_t i = 1; i < xs.size(); ++i)
                if (!(xs[i] > xs[i - 1]))
                    fail(path + ".table", "kappa values must be strictly increasing");

            auto spline = std::make_shared<Spline>(Spline::build(std::move(xs), std::move(ys)));
            // Inset the self-consistency sweep so its finite-difference probes
            // stay inside the tabulated range.
            const double lo = spline->x.front() * (1.0 + 1e-5);
            const double hi = spline->x.back() * (1.0 - 1e-5);
            return DispersionRelation::custom(
                [spline](double kappa) { return spline->eval(kappa); },
                [spline](double kappa) { return spline->deriv(kappa); }, lo, hi, c);
        }
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "must be one of quadratic|massive|massless|custom");
}

SpectralField parse_field(const json& j, const std::string& base_dir) {
    const std::string path = "field";
    if (!j.is_object()) fail(path, "must be an object");
    const std::string type = get_string(member(j, path, "type"), path + ".type");

    if (type == "gaussians") {
        check_keys(j, path, {"type", "components"});
        const json& jc = member(j, path, "components");
        if (!jc.is_array() || jc.empty()) fail(path + ".components", "must be a non-empty array");
        std::vector<GaussianComponent> components;
        components.reserve(jc.size());
        int idx = 0;
        for (const auto& row : jc) {
            const std::string p = path + ".components[" + std::to_string(idx++) + "]";
            if (!row.is_object()) fail(p, "must be an object");
            check_keys(row, p, {"A", "k0", "delta", "r0"});
            GaussianComponent comp;
            comp.amplitude = get_complex(member(row, p, "A"), p + ".A");
            comp.center = get_vec3(member(row, p, "k0"), p + ".k0");
            comp.width = get_number(member(row, p, "delta"), p + ".delta");
            comp.offset = row.contains("r0") ? get_vec3(row["r0"], p + ".r0") : Vec3{0.0, 0.0, 0.0};
            components.push_back(comp);
        }
        try {
            return SpectralField::gaussians(std::move(components));
        } catch (const DomainError& e) {
            fail(path, e.what());
        }
    }
    if (type == "grid") {
        check_keys(j, path, {"type", "file"});
        std::filesystem::path file(get_string(member(j, path, "file"), path + ".file"));
        if (file.is_relative() && !base_dir.empty()) file = std::filesystem::path(base_dir) / file;
        return load_grid_field(file.string());
    }
    fail(path + ".type", "must be 'gaussians' or 'grid'");
}

GridControls parse_grid(const json& j) {
    const std::string path = "grid";
    GridControls g;
    if (!j.is_object()) fail(path, "must be an object");
    check_keys(j, path, {"points_per_axis", "margin", "tol", "max_n"});
    if (j.contains("points_per_axis")) {
        g.points_per_axis = get_int(j["points_per_axis"], path + ".points_per_axis");
        if (g.points_per_axis < 8) fail(path + ".points_per_axis", "must be >= 8");
    }
    if (j.contains("margin")) {
        g.margin = get_number(j["margin"], path + ".margin");
        if (!(g.margin >= 4.0)) fail(path + ".margin", "must be >= 4");
    }
    if (j.contains("tol")) {
        g.tol = get_number(j["tol"], path + ".tol");
        if (!(g.tol > 0.0)) fail(path + ".tol", "must be > 0");
    }
    if (j.contains("max_n")) {
        g.max_n = get_int(j["max_n"], path + ".max_n");
        if (g.max_n < g.points_per_axis) fail(path + ".max_n", "must be >= points_per_axis");
    }
    return g;
}

TimeControls parse_time(const json& j) {
    const std::string path = "time";
    TimeControls t;
    if (!j.is_object()) fail(path, "must be an object");
    check_keys(j, path, {"t0", "t1", "steps"});
    if (j.contains("t0")) t.t0 = get_number(j["t0"], path + ".t0");
    if (j.contains("t1")) t.t1 = get_number(j["t1"], path + ".t1");
    if (j.contains("steps")) t.steps = get_int(j["steps"], path + ".steps");
    if (!(t.t1 > t.t0)) fail(path, "t1 must be > t0");
    if (t.steps < 2) fail(path + ".steps", "steps must be >= 2");
    return t;
}

OutputControls parse_output(const json& j) {
    const std::string path = "output";
    OutputControls o;
    if (!j.is_object()) fail(path, "must be an object");
    check_keys(j, path, {"format", "path"});
    if (j.contains("format")) {
        o.format = get_string(j["format"], path + ".format");
        if (o.format != "csv" && o.format != "json")
            fail(path + ".format", "must be 'csv' or 'json'");
    }
    if (j.contains("path")) o.path = get_string(j["path"], path + ".path");
    return o;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source_name,
                           const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is the 1-based offset of the failure; report it as line:column.
        std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        byte = std::min(byte, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << source_name << ":" << line << ":" << col << ": JSON parse error";
        throw ConfigError(msg.str());
    }

    if (!j.is_object()) throw ConfigError(source_name + ": top level must be an object");
    check_keys(j, "config", {"dispersion", "field", "grid", "time", "output"});

    DispersionRelation disp = parse_dispersion(member(j, "config", "dispersion"));
    SpectralField field = parse_field(member(j, "config", "field"), base_dir);
    GridControls grid = j.contains("grid") ? parse_grid(j["grid"]) : GridControls{};
    TimeControls time = j.contains("time") ? parse_time(j["time"]) : TimeControls{};
    OutputControls output = j.contains("output") ? parse_output(j["output"]) : OutputControls{};

    return RunConfig{std::move(disp), std::move(field), grid, time, output};
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text, path, std::filesystem::path(path).parent_path().string());
}

} // namespace wavekin
