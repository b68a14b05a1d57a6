#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sevpr/common.hpp"
#include "sevpr/frames.hpp"
#include "sevpr/select.hpp"

namespace sevpr {

/// Event counts read at the selected pixels of one frame, in pixel-set order.
struct SparseDescriptor {
    std::vector<std::uint32_t> counts;
    std::size_t frame_idx = 0;
};

struct DistanceMatrix {
    enum class Kind : std::uint8_t { raw, sequence };

    std::size_t num_queries = 0;
    std::size_t num_refs = 0;
    Kind kind = Kind::raw;
    std::uint32_t seq_len = 0;  // set when kind == sequence
    std::vector<double> d;      // row-major, row = query

    double at(std::size_t j, std::size_t k) const { return d[j * num_refs + k]; }
    double& at(std::size_t j, std::size_t k) { return d[j * num_refs + k]; }
};

enum class SeqAlign : std::uint8_t { centered, trailing };

SparseDescriptor sparse_descriptor(const EventFrame& frame, const PixelSet& pixels);
std::vector<SparseDescriptor> sparse_descriptors(const FrameSeries& series,
                                                 const PixelSet& pixels);

/// Sum of absolute count differences; exact in 64-bit integers.
std::uint64_t sad_distance(const SparseDescriptor& a, const SparseDescriptor& b);
std::uint64_t sad_counts(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// D(j,k) = SAD(queries[j], refs[k]). Parallel over query rows.
DistanceMatrix distance_matrix(const std::vector<SparseDescriptor>& queries,
                               const std::vector<SparseDescriptor>& refs);

/// Baseline: SAD over all width*height pixels of each frame pair.
DistanceMatrix dense_sad_matrix(const FrameSeries& query_frames,
                                const FrameSeries& ref_frames);

/// Averages D along the slope-one diagonal through each entry over a window of
/// L frames (L odd). Entries near the border average over the in-bounds terms
/// only, so a constant matrix stays constant. The centered window spans
/// [-(L-1)/2, (L-1)/2]; the trailing variant spans [-(L-1), 0].
DistanceMatrix sequence_convolve(const DistanceMatrix& d, std::uint32_t seq_len,
                                 SeqAlign align = SeqAlign::centered);

struct Match {
    std::size_t ref_idx = 0;
    double score = 0.0;
};

/// Argmin over row j; the lowest reference index wins ties.
Match best_match(const DistanceMatrix& d, std::size_t query_idx);

/// Row-per-query CSV of the raw values.
void save_distance_matrix_csv(const DistanceMatrix& d, std::ostream& out);

/// Binary dump: magic "DMAT", u32 num_queries, u32 num_refs, float64 row-major.
void save_distance_matrix(const DistanceMatrix& d, std::ostream& out);
DistanceMatrix load_distance_matrix(std::istream& in);

}  // namespace sevpr
