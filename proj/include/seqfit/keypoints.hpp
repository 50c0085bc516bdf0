#pragma once

#include "seqfit/geometry.hpp"

#include <vector>

namespace seqfit {

/// Detected 2D joints for one image. Entry k corresponds to model joint
/// joint_map[k]; confidences are in [0, 1] and a confidence of zero marks
/// a missing detection.
struct KeypointFrame {
    std::vector<Vec2> points;
    std::vector<double> confidence;
    std::vector<int> joint_map; // keypoint index -> model joint index

    int size() const { return static_cast<int>(points.size()); }

    double mean_confidence() const {
        if (points.empty()) return 0.0;
        double total = 0.0;
        for (double c : confidence) total += c;
        return total / static_cast<double>(confidence.size());
    }
};

/// Per-joint optimization weights (gamma in the reprojection term).
struct JointWeights {
    std::vector<double> gamma;

    static JointWeights ones(int joint_count) {
        JointWeights w;
        w.gamma.assign(joint_count, 1.0);
        return w;
    }
};

} // namespace seqfit
