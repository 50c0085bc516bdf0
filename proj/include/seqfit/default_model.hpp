#pragma once

#include "seqfit/body_model.hpp"

namespace seqfit {

/// The bundled humanoid: 24 body joints (SMPL layout and naming), capsule
/// limbs forming a closed low-poly surface, and a 10-dimensional shape
/// basis. With `with_hands_and_jaw` the skeleton gains 15 joints per hand
/// and one jaw joint so the hand/jaw priors and keypoint groups can be
/// exercised.
///
/// The shape basis is built from smooth in-plane deformation fields
/// evaluated at both joints and vertices, then orthogonalized against
/// rigid motions and uniform scaling of the skeleton: every component
/// changes joint proportions observably, none can be absorbed by the
/// camera or the global rotation.
BodyModelSpec default_model(bool with_hands_and_jaw = false);

} // namespace seqfit
