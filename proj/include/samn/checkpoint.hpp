// Versioned JSON checkpoints. Doubles are emitted with shortest-round-trip
// formatting, so save/load round-trips are bit-exact for finite values.
#pragma once

#include <string>
#include <vector>

#include "samn/dataio.hpp"
#include "samn/model.hpp"
#include "samn/svm.hpp"

namespace samn {

struct SamnCheckpoint {
    SamnConfig config;
    SamnParams params;
    PrototypeState state;
    StandardizationParams standardization;
    std::vector<std::string> label_names;
    std::string dataset;
};

void save_checkpoint(const std::string& path, const SamnCheckpoint& ckpt);
SamnCheckpoint load_samn_checkpoint(const std::string& path);

struct SvmCheckpoint {
    SvmModel model;
    StandardizationParams standardization;
    std::vector<std::string> label_names;  // [negative, positive]
    std::string dataset;
};

void save_checkpoint(const std::string& path, const SvmCheckpoint& ckpt);
SvmCheckpoint load_svm_checkpoint(const std::string& path);

// "samn" or "svm"; throws DataError for anything unreadable.
std::string checkpoint_kind(const std::string& path);

}  // namespace samn
