#include "wavekin/grid_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "wavekin/errors.hpp"

namespace wavekin {

namespace {

constexpr char kMagic[8] = {'W', 'K', 'G', 'R', 'I', 'D', '1', '\0'};

void require_little_endian() {
    if constexpr (std::endian::native != std::endian::little)
        throw UsageError("binary grid files are little-endian; this platform is not");
}

Vec3 vec_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number())
        throw ConfigError(std::string("grid file: '") + name + "' must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

SpectralField load_json(const std::string& path, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("grid file " + path + ": " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "wavekin-grid-v1")
        throw ConfigError("grid file " + path + ": missing format tag 'wavekin-grid-v1'");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "format" && it.key() != "kmin" && it.key() != "kmax" &&
            it.key() != "n" && it.key() != "samples")
            throw ConfigError("grid file " + path + ": unknown key '" + it.key() + "'");
    if (!j.contains("kmin") || !j.contains("kmax") || !j.contains("n") || !j.contains("samples"))
        throw ConfigError("grid file " + path + ": needs kmin, kmax, n, samples");

    const Vec3 kmin = vec_from_json(j["kmin"], "kmin");
    const Vec3 kmax = vec_from_json(j["kmax"], "kmax");
    const auto& jn = j["n"];
    if (!jn.is_array() || jn.size() != 3)
        throw ConfigError("grid file " + path + ": 'n' must be an array of 3 integers");
    std::array<int, 3> n{};
    for (int a = 0; a < 3; ++a) {
        if (!jn[a].is_number_integer())
            throw ConfigError("grid file " + path + ": 'n' must be an array of 3 integers");
        n[a] = jn[a].get<int>();
    }

    std::vector<Complex> samples;
    const auto& js = j["samples"];
    if (!js.is_array()) throw ConfigError("grid file " + path + ": 'samples' must be an array");
    samples.reserve(js.size());
    for (const auto& pair : js) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw ConfigError("grid file " + path + ": each sample must be [re, im]");
        samples.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }

    try {
        return SpectralField::grid(GridSpec(kmin, kmax, n), std::move(samples));
    } catch (const Error& e) {
        throw ConfigError("grid file " + path + ": " + e.what());
    }
}

SpectralField load_binary(const std::string& path, std::ifstream& in) {
    require_little_endian();
    in.seekg(8);
    std::int64_t n64[3];
    in.read(reinterpret_cast<char*>(n64), sizeof(n64));
    double corners[6];
    in.read(reinterpret_cast<char*>(corners), sizeof(corners));
    if (!in) throw ConfigError("grid file " + path + ": truncated header");
    for (auto v : n64)
        if (v < 8 || v > (1 << 20)) throw ConfigError("grid file " + path + ": implausible axis size");

    const std::array<int, 3> n = {static_cast<int>(n64[0]), static_cast<int>(n64[1]),
                                  static_cast<int>(n64[2])};
    const Vec3 kmin{corners[0], corners[1], corners[2]};
    const Vec3 kmax{corners[3], corners[4], corners[5]};

    const std::int64_t count = n64[0] * n64[1] * n64[2];
    std::vector<Complex> samples(static_cast<std::size_t>(count));
    static_assert(sizeof(Complex) == 2 * sizeof(double));
    in.read(reinterpret_cast<char*>(samples.data()),
            static_cast<std::streamsize>(count * sizeof(Complex)));
    if (!in) throw ConfigError("grid file " + path + ": truncated samples");

    try {
        return SpectralField::grid(GridSpec(kmin, kmax, n), std::move(samples));
    } catch (const Error& e) {
        throw ConfigError("grid file " + path + ": " + e.what());
    }
}

} // namespace

SpectralField load_grid_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open grid file " + path);

    char head[8] = {};
    in.read(head, sizeof(head));
    if (in.gcount() == 8 && std::memcmp(head, kMagic, 8) == 0) return load_binary(path, in);

    in.clear();
    in.seekg(0);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_json(path, text);
}

void save_grid_field_json(const SpectralField& field, const std::string& path) {
    const GridSpec& spec = field.grid_spec();
    nlohmann::json j;
    j["format"] = "wavekin-grid-v1";
    j["kmin"] = {spec.kmin.x, spec.kmin.y, spec.kmin.z};
    j["kmax"] = {spec.kmax.x, spec.kmax.y, spec.kmax.z};
    j["n"] = {spec.n[0], spec.n[1], spec.n[2]};
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : field.samples()) samples.push_back({s.real(), s.imag()});
    j["samples"] = std::move(samples);

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write grid file " + path);
    out << j.dump();
    if (!out) throw ConfigError("failed writing grid file " + path);
}

void save_grid_field_binary(const SpectralField& field, const std::string& path) {
    require_little_endian();
    const GridSpec& spec = field.grid_spec();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write grid file " + path);

    out.write(kMagic, sizeof(kMagic));
    const std::int64_t n64[3] = {spec.n[0], spec.n[1], spec.n[2]};
    out.write(reinterpret_cast<const char*>(n64), sizeof(n64));
    const double corners[6] = {spec.kmin.x, spec.kmin.y, spec.kmin.z,
                               spec.kmax.x, spec.kmax.y, spec.kmax.z};
    out.write(reinterpret_cast<const char*>(corners), sizeof(corners));
    out.write(reinterpret_cast<const char*>(field.samples().data()),
              static_cast<std::streamsize>(field.samples().size() * sizeof(Complex)));
    if (!out) throw ConfigError("failed writing grid file " + path);
}

} // namespace wavekin
