#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "mt3/autodiff/parameters.hpp"

// Checkpoint layout (a directory):
//
//   manifest.txt   text, one record per line
//       mt3-checkpoint 1
//       dtype float64-le
//       meta <key> <value...>          free-form metadata, value runs to EOL
//       param <name> <offset> <rank> <dim0> ... <dimN-1>
//   params.bin     all parameter values concatenated in manifest order as
//                  IEEE-754 binary64, little-endian. <offset> counts doubles
//                  from the start of the file.
//
// Values are copied bit-for-bit, so save/load round-trips exactly.
namespace mt3::ad {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Metadata = std::map<std::string, std::string>;

void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& params, const Metadata& meta = {});

struct Checkpoint {
    ParameterStore params;
    Metadata meta;
};

Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mt3::ad
