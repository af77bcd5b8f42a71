#pragma once

#include <string>

#include "wavekin/dispersion.hpp"
#include "wavekin/field.hpp"

namespace wavekin {

// Defaults applied when the corresponding config sections are omitted.
struct GridControls {
    int points_per_axis = 96;
    double margin = 6.0;
    double tol = 1e-8;
    int max_n = 257;
};

struct TimeControls {
    double t0 = 0.0;
    double t1 = 10.0;
    int steps = 11;
};

struct OutputControls {
    std::string format = "csv"; // "csv" or "json"
    std::string path;           // empty = stdout
};

struct RunConfig {
    DispersionRelation dispersion;
    SpectralField field;
    GridControls grid;
    TimeControls time;
    OutputControls output;
};

// Strict JSON schema; unknown keys anywhere are ConfigError, as are keys that
// do not apply to the selected kind/type (e.g. "m" for massless dispersion).
//
//   {
//     "dispersion": {"kind": "quadratic"|"massive"|"massless"|"custom",
//                    "m": number,           (quadratic/massive only; required)
//                    "c": number,           (optional, default 1.0)
//                    "table": [[kappa, omega], ...]},  (custom only; required)
//     "field": {"type": "gaussians",
//               "components": [{"A": [re, im], "k0": [x, y, z],
//                               "delta": d, "r0": [x, y, z]}, ...]}
//            | {"type": "grid", "file": "path"},
//     "grid":   {"points_per_axis": int, "margin": r, "tol": r, "max_n": int},
//     "time":   {"t0": r, "t1": r, "steps": int},
//     "output": {"format": "csv"|"json", "path": "..."}
//   }
//
// "dispersion" and "field" are required; the rest default as above. A custom
// table is interpolated with a natural cubic spline; evaluating outside the
// tabulated kappa range raises DomainError. Relative grid-file paths resolve
// against base_dir. Syntax errors carry line/column positions computed from
// the source text; source_name labels them.
RunConfig parse_run_config(const std::string& text, const std::string& source_name,
                           const std::string& base_dir);

// Reads the file and parses it; relative grid-file paths resolve against the
// config file's directory.
RunConfig load_run_config(const std::string& path);

} // namespace wavekin
