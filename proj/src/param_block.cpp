#include "seqfit/param_block.hpp"

#include "seqfit/errors.hpp"

#include <limits>

namespace seqfit {

ParamBlock::Segment& ParamBlock::add_segment(const std::string& name, Kind kind, int frame,
                                             int size) {
    Segment seg;
    seg.name = name;
    seg.kind = kind;
    seg.frame = frame;
    seg.offset = static_cast<int>(values.size());
    seg.size = size;
    values.conservativeResize(seg.offset + size);
    values.tail(size).setZero();
    if (lower_bounds.size() > 0) {
        lower_bounds.conservativeResize(seg.offset + size);
        lower_bounds.tail(size).setConstant(-std::numeric_limits<double>::infinity());
        upper_bounds.conservativeResize(seg.offset + size);
        upper_bounds.tail(size).setConstant(std::numeric_limits<double>::infinity());
    }
    segments.push_back(seg);
    return segments.back();
}

const ParamBlock::Segment* ParamBlock::find(Kind kind, int frame) const {
    for (const auto& seg : segments)
        if (seg.kind == kind && seg.frame == frame) return &seg;
    return nullptr;
}

void ParamBlock::set_bounds(const Segment& seg, double lo, double hi) {
    if (lower_bounds.size() != values.size()) {
        lower_bounds = VecX::Constant(values.size(), -std::numeric_limits<double>::infinity());
        upper_bounds = VecX::Constant(values.size(), std::numeric_limits<double>::infinity());
    }
    lower_bounds.segment(seg.offset, seg.size).setConstant(lo);
    upper_bounds.segment(seg.offset, seg.size).setConstant(hi);
}

void ParamBlock::apply_freeze(VecX& gradient) const {
    for (const auto& seg : segments)
        if (seg.frozen) gradient.segment(seg.offset, seg.size).setZero();
}

bool ParamBlock::project_to_bounds() {
    if (!has_bounds()) return false;
    bool moved = false;
    for (int i = 0; i < values.size(); ++i) {
        const double clamped = std::min(std::max(values[i], lower_bounds[i]), upper_bounds[i]);
        if (clamped != values[i]) {
            values[i] = clamped;
            moved = true;
        }
    }
    return moved;
}

void ParamBlock::validate() const {
    int covered = 0;
    for (const auto& seg : segments) {
        if (seg.offset != covered) throw ValidationError("param block segments must be contiguous");
        covered += seg.size;
    }
    if (covered != size()) throw ValidationError("param block segments must cover the vector");
}

} // namespace seqfit
