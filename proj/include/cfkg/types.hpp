#pragma once

#include <Eigen/Core>

namespace cfkg {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Soft masks, logits and gradients share this layout: one entry per node
/// (or per edge) in graph index order.
using MaskVector = Vector<double>;

/// Binary keep/remove flags, aligned like MaskVector.
using KeepMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

} // namespace cfkg
