#include "sevpr/match.hpp"

#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "sevpr/serial.hpp"

namespace sevpr {

namespace {

void check_descriptor_lengths(const std::vector<SparseDescriptor>& queries,
                              const std::vector<SparseDescriptor>& refs) {
    std::size_t len = std::numeric_limits<std::size_t>::max();
    for (const auto* side : {&queries, &refs})
        for (const SparseDescriptor& d : *side) {
            if (len == std::numeric_limits<std::size_t>::max()) len = d.counts.size();
            if (d.counts.size() != len)
                throw Error(ErrorCode::length_mismatch, "descriptor lengths differ");
        }
}

void check_geometry(const FrameSeries& a, const FrameSeries& b) {
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorCode::geometry_mismatch, "frame series geometries differ");
}

void check_seq_args(const DistanceMatrix& d, std::uint32_t seq_len) {
    if (seq_len == 0 || seq_len % 2 == 0)
        throw Error(ErrorCode::bad_sequence_length, "sequence length must be odd and positive");
    if (d.kind != DistanceMatrix::Kind::raw)
        throw Error(ErrorCode::invalid_argument, "sequence aggregation expects a raw matrix");
}

// One output entry of the diagonal-window aggregation; self-contained so the
// parallel and serial drivers produce bit-identical results.
double seq_entry(const DistanceMatrix& d, std::size_t j, std::size_t k, int lo, int hi) {
    double sum = 0.0;
    int terms = 0;
    for (int i = lo; i <= hi; ++i) {
        const auto jj = static_cast<std::int64_t>(j) + i;
        const auto kk = static_cast<std::int64_t>(k) + i;
        if (jj < 0 || kk < 0 || jj >= static_cast<std::int64_t>(d.num_queries) ||
            kk >= static_cast<std::int64_t>(d.num_refs))
            continue;
        sum += d.at(static_cast<std::size_t>(jj), static_cast<std::size_t>(kk));
        ++terms;
    }
    return sum / terms;  // the i=0 term is always in bounds
}

std::uint64_t dense_sad(const EventFrame& a, const EventFrame& b) {
    return sad_counts(a.counts, b.counts);
}

}  // namespace

SparseDescriptor sparse_descriptor(const EventFrame& frame, const PixelSet& pixels) {
    SparseDescriptor out;
    out.counts.reserve(pixels.size());
    for (const Pixel& p : pixels.pixels) {
        if (p.u >= frame.width || p.v >= frame.height)
            throw Error(ErrorCode::out_of_bounds, "selected pixel outside frame bounds");
        out.counts.push_back(frame.at(p.u, p.v));
    }
    return out;
}

std::vector<SparseDescriptor> sparse_descriptors(const FrameSeries& series,
                                                 const PixelSet& pixels) {
    std::vector<SparseDescriptor> out;
    out.reserve(series.frames.size());
    for (std::size_t k = 0; k < series.frames.size(); ++k) {
        out.push_back(sparse_descriptor(series.frames[k], pixels));
        out.back().frame_idx = k;
    }
    return out;
}

std::uint64_t sad_counts(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::uint32_t x = a[i], y = b[i];
        sum += x > y ? x - y : y - x;
    }
    return sum;
}

std::uint64_t sad_distance(const SparseDescriptor& a, const SparseDescriptor& b) {
    if (a.counts.size() != b.counts.size())
        throw Error(ErrorCode::length_mismatch, "descriptor lengths differ");
    return sad_counts(a.counts, b.counts);
}

DistanceMatrix distance_matrix(const std::vector<SparseDescriptor>& queries,
                               const std::vector<SparseDescriptor>& refs) {
    check_descriptor_lengths(queries, refs);
    DistanceMatrix d;
    d.num_queries = queries.size();
    d.num_refs = refs.size();
    d.d.resize(d.num_queries * d.num_refs);
    const auto q = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < q; ++j)
        for (std::size_t k = 0; k < refs.size(); ++k)
            d.d[j * refs.size() + k] =
                double(sad_counts(queries[j].counts, refs[k].counts));
    return d;
}

DistanceMatrix dense_sad_matrix(const FrameSeries& query_frames, const FrameSeries& ref_frames) {
    check_geometry(query_frames, ref_frames);
    DistanceMatrix d;
    d.num_queries = query_frames.frames.size();
    d.num_refs = ref_frames.frames.size();
    d.d.resize(d.num_queries * d.num_refs);
    const auto q = static_cast<std::int64_t>(d.num_queries);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < q; ++j)
        for (std::size_t k = 0; k < d.num_refs; ++k)
            d.d[j * d.num_refs + k] =
                double(dense_sad(query_frames.frames[j], ref_frames.frames[k]));
    return d;
}

DistanceMatrix sequence_convolve(const DistanceMatrix& d, std::uint32_t seq_len, SeqAlign align) {
    check_seq_args(d, seq_len);
    const int half = int(seq_len - 1) / 2;
    const int lo = align == SeqAlign::centered ? -half : -int(seq_len - 1);
    const int hi = align == SeqAlign::centered ? half : 0;

    DistanceMatrix out;
    out.num_queries = d.num_queries;
    out.num_refs = d.num_refs;
    out.kind = DistanceMatrix::Kind::sequence;
    out.seq_len = seq_len;
    out.d.resize(d.d.size());
    const auto q = static_cast<std::int64_t>(d.num_queries);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < q; ++j)
        for (std::size_t k = 0; k < d.num_refs; ++k)
            out.d[j * d.num_refs + k] = seq_entry(d, static_cast<std::size_t>(j), k, lo, hi);
    return out;
}

Match best_match(const DistanceMatrix& d, std::size_t query_idx) {
    if (query_idx >= d.num_queries)
        throw Error(ErrorCode::out_of_bounds, "query index out of range");
    if (d.num_refs == 0) throw Error(ErrorCode::invalid_argument, "empty reference side");
    Match best{0, d.at(query_idx, 0)};
    for (std::size_t k = 1; k < d.num_refs; ++k) {
        const double score = d.at(query_idx, k);
        if (score < best.score) best = {k, score};  // lowest index wins ties
    }
    return best;
}

void save_distance_matrix_csv(const DistanceMatrix& d, std::ostream& out) {
    for (std::size_t j = 0; j < d.num_queries; ++j) {
        for (std::size_t k = 0; k < d.num_refs; ++k) {
            if (k) out << ',';
            out << d.at(j, k);
        }
        out << '\n';
    }
}

void save_distance_matrix(const DistanceMatrix& d, std::ostream& out) {
    char magic[4] = {'D', 'M', 'A', 'T'};
    out.write(magic, 4);
    const auto q = static_cast<std::uint32_t>(d.num_queries);
    const auto r = static_cast<std::uint32_t>(d.num_refs);
    out.write(reinterpret_cast<const char*>(&q), 4);
    out.write(reinterpret_cast<const char*>(&r), 4);
    out.write(reinterpret_cast<const char*>(d.d.data()),
              static_cast<std::streamsize>(d.d.size() * sizeof(double)));
}

DistanceMatrix load_distance_matrix(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "DMAT", 4) != 0)
        throw Error(ErrorCode::malformed_record, "missing DMAT header");
    std::uint32_t q = 0, r = 0;
    in.read(reinterpret_cast<char*>(&q), 4);
    in.read(reinterpret_cast<char*>(&r), 4);
    if (!in) throw Error(ErrorCode::malformed_record, "truncated DMAT header");
    DistanceMatrix d;
    d.num_queries = q;
    d.num_refs = r;
    d.d.resize(std::size_t(q) * r);
    in.read(reinterpret_cast<char*>(d.d.data()),
            static_cast<std::streamsize>(d.d.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != d.d.size() * sizeof(double))
        throw Error(ErrorCode::malformed_record, "truncated DMAT payload");
    return d;
}

namespace serial {

DistanceMatrix distance_matrix(const std::vector<SparseDescriptor>& queries,
                               const std::vector<SparseDescriptor>& refs) {
    check_descriptor_lengths(queries, refs);
    DistanceMatrix d;
    d.num_queries = queries.size();
    d.num_refs = refs.size();
    d.d.resize(d.num_queries * d.num_refs);
    for (std::size_t j = 0; j < queries.size(); ++j)
        for (std::size_t k = 0; k < refs.size(); ++k)
            d.d[j * refs.size() + k] = double(sad_counts(queries[j].counts, refs[k].counts));
    return d;
}

DistanceMatrix dense_sad_matrix(const FrameSeries& query_frames, const FrameSeries& ref_frames) {
    check_geometry(query_frames, ref_frames);
    DistanceMatrix d;
    d.num_queries = query_frames.frames.size();
    d.num_refs = ref_frames.frames.size();
    d.d.resize(d.num_queries * d.num_refs);
    for (std::size_t j = 0; j < d.num_queries; ++j)
        for (std::size_t k = 0; k < d.num_refs; ++k)
            d.d[j * d.num_refs + k] =
                double(dense_sad(query_frames.frames[j], ref_frames.frames[k]));
    return d;
}

DistanceMatrix sequence_convolve(const DistanceMatrix& d, std::uint32_t seq_len, SeqAlign align) {
    check_seq_args(d, seq_len);
    const int half = int(seq_len - 1) / 2;
    const int lo = align == SeqAlign::centered ? -half : -int(seq_len - 1);
    const int hi = align == SeqAlign::centered ? half : 0;

    DistanceMatrix out;
    out.num_queries = d.num_queries;
    out.num_refs = d.num_refs;
    out.kind = DistanceMatrix::Kind::sequence;
    out.seq_len = seq_len;
    out.d.resize(d.d.size());
    for (std::size_t j = 0; j < d.num_queries; ++j)
        for (std::size_t k = 0; k < d.num_refs; ++k)
            out.d[j * d.num_refs + k] = seq_entry(d, j, k, lo, hi);
    return out;
}

}  // namespace serial

}  // namespace sevpr
