#pragma once

#include "seqfit/geometry.hpp"

#include <string>
#include <vector>

namespace seqfit {

/// Flat parameter vector with a named block layout. Segments are disjoint,
/// cover the vector, and may be frozen: frozen entries receive zero
/// gradients and never move during a solve.
struct ParamBlock {
    enum class Kind { Shape, RootRotation, JointRotations, CameraTranslation };

    struct Segment {
        std::string name;
        Kind kind;
        int frame = -1; // -1 for the shared shape segment
        int offset = 0;
        int size = 0;
        bool frozen = false;
    };

    VecX values;
    std::vector<Segment> segments;
    VecX lower_bounds; // empty or per-entry; -inf where unbounded
    VecX upper_bounds;

    int size() const { return static_cast<int>(values.size()); }

    Segment& add_segment(const std::string& name, Kind kind, int frame, int size);
    const Segment* find(Kind kind, int frame) const;

    Eigen::VectorBlock<VecX> segment_values(const Segment& seg) {
        return values.segment(seg.offset, seg.size);
    }
    Eigen::VectorBlock<const VecX> segment_values(const Segment& seg) const {
        return values.segment(seg.offset, seg.size);
    }

    bool has_bounds() const { return lower_bounds.size() == values.size(); }
    void set_bounds(const Segment& seg, double lo, double hi);

    /// Zeroes the entries of frozen segments in a gradient vector.
    void apply_freeze(VecX& gradient) const;

    /// Clamps values into the bounds; returns true when anything moved.
    bool project_to_bounds();

    /// Checks that segments are disjoint and cover the vector.
    void validate() const;
};

} // namespace seqfit
