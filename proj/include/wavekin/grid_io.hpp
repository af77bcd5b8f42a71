#pragma once

#include <string>

#include "wavekin/field.hpp"

namespace wavekin {

// Sampled-field file formats (layout documented in the README):
//
// JSON: {"format": "wavekin-grid-v1", "kmin": [x,y,z], "kmax": [x,y,z],
//        "n": [nx,ny,nz], "samples": [[re,im], ...]} with samples flat in
//        node order, z index fastest.
//
// Binary: 8-byte magic "WKGRID1\0", then little-endian int64 nx, ny, nz,
//         double kmin[3], double kmax[3], followed by nx*ny*nz (re, im)
//         double pairs in the same node order.
//
// load sniffs the magic bytes to pick the format.
SpectralField load_grid_field(const std::string& path);
void save_grid_field_json(const SpectralField& field, const std::string& path);
void save_grid_field_binary(const SpectralField& field, const std::string& path);

} // namespace wavekin
