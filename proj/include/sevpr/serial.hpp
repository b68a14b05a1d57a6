#pragma once

#include "sevpr/match.hpp"
#include "sevpr/select.hpp"

namespace sevpr::serial {

/// Single-threaded reference implementations of the OpenMP kernels. Kept for
/// equivalence tests and the kernel benchmark; results must match the
/// parallel versions exactly (all per-entry computations are self-contained).
VarianceMap variance_map(const FrameSeries& frames, const PixelMask& mask);
DistanceMatrix distance_matrix(const std::vector<SparseDescriptor>& queries,
                               const std::vector<SparseDescriptor>& refs);
DistanceMatrix dense_sad_matrix(const FrameSeries& query_frames,
                                const FrameSeries& ref_frames);
DistanceMatrix sequence_convolve(const DistanceMatrix& d, std::uint32_t seq_len,
                                 SeqAlign align = SeqAlign::centered);

}  // namespace sevpr::serial
