#pragma once

#include <map>
#include <string>
#include <vector>

#include "oomcraft/core.hpp"

namespace oomcraft {

enum class ObsKind { Discrete, Continuous };

/// A batch of independent trajectories, all discrete symbols or all
/// d-dimensional points, plus provenance metadata carried through files.
struct TrajectoryDataset {
    ObsKind kind = ObsKind::Continuous;
    int dim = 1;            // d for continuous observations
    int alphabet_size = 0;  // K for discrete observations

    std::vector<std::vector<int>> discrete;
    std::vector<Matrix> continuous;  // each T_i x d

    long aborted = 0;  // trajectories dropped after a non-finite state
    std::map<std::string, std::string> meta;

    std::size_t num_trajectories() const {
        return kind == ObsKind::Discrete ? discrete.size() : continuous.size();
    }

    long trajectory_length(std::size_t i) const {
        return kind == ObsKind::Discrete ? static_cast<long>(discrete[i].size())
                                         : static_cast<long>(continuous[i].rows());
    }

    long total_observations() const {
        long n = 0;
        for (std::size_t i = 0; i < num_trajectories(); ++i) n += trajectory_length(i);
        return n;
    }
};

} // namespace oomcraft
