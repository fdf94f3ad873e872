#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flashchan/bits.hpp"
#include "flashchan/channels.hpp"
#include "flashchan/errors.hpp"
#include "flashchan/rng.hpp"

namespace flashchan {

// One observed bit error. dir 0 means a written 0 read as 1, dir 1 the
// opposite.
struct ErrorEvent {
    std::uint32_t pos = 0;
    std::uint8_t dir = 0;
};

// Errors of one page read after a given amount of program/erase cycling.
// `frame_length` is the page payload in bits; positions index into it.
struct ErrorRecord {
    std::uint64_t pe = 0;
    std::uint32_t block = 0;
    std::uint32_t page = 0;
    PageKind kind = PageKind::lower;
    std::uint32_t frame_length = 0;
    std::vector<ErrorEvent> errors;
};

struct ErrorDataset {
    std::vector<ErrorRecord> records;
    std::uint32_t frame_length = 0;  // shared by all records
    std::string vendor;
    std::string chip;
};

enum class LoadMode { strict, lenient };

struct LoadReport {
    ErrorDataset dataset;
    std::size_t skipped_lines = 0;
};

namespace detail {

inline ErrorRecord parse_record(const nlohmann::json& j) {
    ErrorRecord r;
    r.pe = j.at("pe").get<std::uint64_t>();
    r.block = j.at("block").get<std::uint32_t>();
    r.page = j.at("page").get<std::uint32_t>();
    r.kind = page_kind_from_string(j.at("kind").get<std::string>());
    r.frame_length = j.at("n").get<std::uint32_t>();
    if (r.frame_length == 0) throw FormatError("record frame length is zero");
    const auto& err = j.at("err");
    if (!err.is_array()) throw FormatError("err must be an array");
    r.errors.reserve(err.size());
    std::int64_t prev = -1;
    for (const auto& e : err) {
        if (!e.is_array() || e.size() != 2) throw FormatError("err entry must be [pos, dir]");
        std::int64_t pos = e[0].get<std::int64_t>();
        std::int64_t dir = e[1].get<std::int64_t>();
        if (pos <= prev) throw FormatError("error positions must be strictly increasing");
        if (pos >= static_cast<std::int64_t>(r.frame_length))
            throw FormatError("error position beyond frame length");
        if (dir != 0 && dir != 1) throw FormatError("error direction must be 0 or 1");
        r.errors.push_back({static_cast<std::uint32_t>(pos), static_cast<std::uint8_t>(dir)});
        prev = pos;
    }
    return r;
}

}  // namespace detail

inline LoadReport load_jsonl(std::istream& in, LoadMode mode) {
    LoadReport rep;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ErrorRecord rec;
        try {
            rec = detail::parse_record(nlohmann::json::parse(line));
        } catch (const std::exception& e) {
            if (mode == LoadMode::strict)
                throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
            ++rep.skipped_lines;
            continue;
        }
        if (rep.dataset.records.empty()) {
            rep.dataset.frame_length = rec.frame_length;
        } else if (rec.frame_length != rep.dataset.frame_length) {
            // Mixed frame lengths make re-framing ambiguous; never skip this.
            throw FormatError("line " + std::to_string(lineno) +
                              ": frame length differs from earlier records");
        }
        rep.dataset.records.push_back(std::move(rec));
    }
    return rep;
}

inline LoadReport load_jsonl(const std::string& path, LoadMode mode) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return load_jsonl(in, mode);
}

inline void save_jsonl(const ErrorDataset& ds, std::ostream& out) {
    for (const auto& r : ds.records) {
        nlohmann::json err = nlohmann::json::array();
        for (const auto& e : r.errors)
            err.push_back({static_cast<std::int64_t>(e.pos), static_cast<int>(e.dir)});
        nlohmann::json j{{"pe", r.pe},
                         {"block", r.block},
                         {"page", r.page},
                         {"kind", to_string(r.kind)},
                         {"n", r.frame_length},
                         {"err", std::move(err)}};
        out << j.dump() << '\n';
    }
}

inline void save_jsonl(const ErrorDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    save_jsonl(ds, out);
}

// ---------------------------------------------------------------------------
// Re-framing and moments.
// ---------------------------------------------------------------------------

struct FrameCounts {
    std::vector<std::uint32_t> k;   // total errors per frame
    std::vector<std::uint32_t> k0;  // 0->1 errors per frame
    std::vector<std::uint32_t> k1;  // 1->0 errors per frame
    std::uint64_t frame_length = 0;
};

// Concatenates the selected records in dataset order into one bit stream,
// splits it into disjoint frames of `n` bits, and counts errors per frame.
// A trailing partial frame is discarded.
inline FrameCounts frame_error_counts(const ErrorDataset& ds, PageKind kind,
                                      std::uint64_t pe, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("frame_error_counts: frame length must be > 0");
    std::uint64_t total_bits = 0;
    for (const auto& r : ds.records)
        if (r.kind == kind && r.pe == pe) total_bits += r.frame_length;
    std::uint64_t n_frames = total_bits / n;
    if (n_frames == 0)
        throw EmptySampleError("frame_error_counts: no complete frame for this selection");
    FrameCounts fc;
    fc.frame_length = n;
    fc.k.assign(n_frames, 0);
    fc.k0.assign(n_frames, 0);
    fc.k1.assign(n_frames, 0);
    std::uint64_t offset = 0;
    for (const auto& r : ds.records) {
        if (r.kind != kind || r.pe != pe) continue;
        for (const auto& e : r.errors) {
            std::uint64_t f = (offset + e.pos) / n;
            if (f >= n_frames) continue;
            ++fc.k[f];
            if (e.dir == 0)
                ++fc.k0[f];
            else
                ++fc.k1[f];
        }
        offset += r.frame_length;
    }
    return fc;
}

// Same re-framing as frame_error_counts but keeping the in-frame error
// positions, for replaying recorded error vectors through a decoder.
inline std::vector<std::vector<std::uint32_t>> frame_error_positions(const ErrorDataset& ds,
                                                                     PageKind kind,
                                                                     std::uint64_t pe,
                                                                     std::uint64_t n) {
    if (n == 0)
        throw std::invalid_argument("frame_error_positions: frame length must be > 0");
    std::uint64_t total_bits = 0;
    for (const auto& r : ds.records)
        if (r.kind == kind && r.pe == pe) total_bits += r.frame_length;
    std::uint64_t n_frames = total_bits / n;
    if (n_frames == 0)
        throw EmptySampleError("frame_error_positions: no complete frame for this selection");
    std::vector<std::vector<std::uint32_t>> frames(n_frames);
    std::uint64_t offset = 0;
    for (const auto& r : ds.records) {
        if (r.kind != kind || r.pe != pe) continue;
        for (const auto& e : r.errors) {
            std::uint64_t gpos = offset + e.pos;
            std::uint64_t f = gpos / n;
            if (f < n_frames) frames[f].push_back(static_cast<std::uint32_t>(gpos % n));
        }
        offset += r.frame_length;
    }
    return frames;
}

inline MomentEstimates sample_moments(const FrameCounts& fc) {
    if (fc.k.empty()) throw EmptySampleError("sample_moments: no frames");
    MomentEstimates m;
    m.n_frames = fc.k.size();
    m.frame_length = fc.frame_length;
    double nf = static_cast<double>(m.n_frames);
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0, sk = 0, skk = 0;
    for (std::size_t i = 0; i < fc.k.size(); ++i) {
        double a = fc.k0[i], b = fc.k1[i], k = fc.k[i];
        s1 += a;
        s2 += a * a;
        s3 += b;
        s4 += b * b;
        sk += k;
        skk += k * k;
    }
    m.mu1 = s1 / nf;
    m.mu2 = s2 / nf;
    m.mu3 = s3 / nf;
    m.mu4 = s4 / nf;
    m.mean_k = sk / nf;
    m.var_k = m.n_frames >= 2 ? (skk - sk * sk / nf) / (nf - 1.0) : 0.0;
    return m;
}

inline double average_rber(const ErrorDataset& ds, PageKind kind, std::uint64_t pe,
                           std::uint64_t n) {
    FrameCounts fc = frame_error_counts(ds, kind, pe, n);
    MomentEstimates m = sample_moments(fc);
    return m.mean_k / static_cast<double>(n);
}

// Unbiased frame-count variance over mean; 1 for Poisson-like data, above 1
// for overdispersed data.
inline double dispersion_ratio(const MomentEstimates& m) {
    if (m.n_frames < 2) throw EmptySampleError("dispersion_ratio: need at least 2 frames");
    if (m.mean_k <= 0.0) throw EmptySampleError("dispersion_ratio: zero mean error count");
    return m.var_k / m.mean_k;
}

// ---------------------------------------------------------------------------
// Error map: per-page, per-frame error counts of one block at one cycle
// count. Rows are the block's pages in (page index, kind) order; -1 marks
// frames a short row does not cover.
// ---------------------------------------------------------------------------

struct ErrorMapRow {
    std::uint32_t page = 0;
    PageKind kind = PageKind::lower;
    std::vector<std::int64_t> counts;
};

struct ErrorMap {
    std::vector<ErrorMapRow> rows;
    std::uint64_t frame_length = 0;

    std::size_t max_frames() const {
        std::size_t w = 0;
        for (const auto& r : rows) w = std::max(w, r.counts.size());
        return w;
    }
};

inline ErrorMap error_map(const ErrorDataset& ds, std::uint32_t block, std::uint64_t pe,
                          std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("error_map: frame length must be > 0");
    std::map<std::pair<std::uint32_t, std::uint8_t>, std::vector<const ErrorRecord*>> pages;
    for (const auto& r : ds.records)
        if (r.block == block && r.pe == pe)
            pages[{r.page, static_cast<std::uint8_t>(r.kind)}].push_back(&r);
    if (pages.empty()) throw EmptySampleError("error_map: no records for this block and cycle");
    ErrorMap map;
    map.frame_length = n;
    for (const auto& [key, recs] : pages) {
        ErrorMapRow row;
        row.page = key.first;
        row.kind = static_cast<PageKind>(key.second);
        std::uint64_t total_bits = 0;
        for (const auto* r : recs) total_bits += r->frame_length;
        std::uint64_t n_frames = total_bits / n;
        row.counts.assign(n_frames, 0);
        std::uint64_t offset = 0;
        for (const auto* r : recs) {
            for (const auto& e : r->errors) {
                std::uint64_t f = (offset + e.pos) / n;
                if (f < n_frames) ++row.counts[f];
            }
            offset += r->frame_length;
        }
        map.rows.push_back(std::move(row));
    }
    std::size_t width = map.max_frames();
    for (auto& row : map.rows) row.counts.resize(width, -1);
    return map;
}

// ---------------------------------------------------------------------------
// Cell-level statistics.
// ---------------------------------------------------------------------------

struct CellTransitionCounts {
    std::array<std::array<std::uint64_t, 4>, 4> counts{};
    std::uint64_t total = 0;

    std::uint64_t errors() const {
        std::uint64_t e = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) e += counts[i][j];
        return e;
    }

    // Off-diagonal share of all erroneous cells, in percent.
    double error_share_percent(int from, int to) const {
        std::uint64_t e = errors();
        if (e == 0) return 0.0;
        return 100.0 * static_cast<double>(counts[from][to]) / static_cast<double>(e);
    }

    double cell_error_probability() const {
        if (total == 0) return 0.0;
        return static_cast<double>(errors()) / static_cast<double>(total);
    }
};

inline CellTransitionCounts cell_error_frequencies(const std::vector<std::uint8_t>& written,
                                                   const std::vector<std::uint8_t>& read) {
    if (written.size() != read.size())
        throw std::invalid_argument("cell_error_frequencies: length mismatch");
    if (written.empty()) throw EmptySampleError("cell_error_frequencies: no cells");
    CellTransitionCounts c;
    for (std::size_t i = 0; i < written.size(); ++i) {
        if (written[i] > 3 || read[i] > 3)
            throw std::invalid_argument("cell_error_frequencies: level outside 0..3");
        ++c.counts[written[i]][read[i]];
    }
    c.total = written.size();
    return c;
}

// ---------------------------------------------------------------------------
// Synthesis.
// ---------------------------------------------------------------------------

// Generates `n_pages` records per page kind. Each record is one page of
// `frames_per_page * model.frame_length` bits; every frame inside it is an
// independent draw of the per-page channel (the beta-binomial model redraws
// its crossover pair per frame). Deterministic in (model, sizes, seed).
inline ErrorDataset synthesize_dataset(const TwoPageModel& model, std::uint32_t n_pages,
                                       std::uint32_t frames_per_page, std::uint64_t seed,
                                       std::uint32_t block = 0) {
    if (model.frame_length == 0)
        throw std::invalid_argument("synthesize_dataset: model frame length must be > 0");
    if (n_pages == 0 || frames_per_page == 0)
        throw std::invalid_argument("synthesize_dataset: empty synthesis request");
    validate(model.lower);
    validate(model.upper);
    const std::uint64_t n = model.frame_length;
    ErrorDataset ds;
    ds.vendor = "synthetic";
    ds.frame_length = static_cast<std::uint32_t>(n * frames_per_page);
    for (PageKind kind : {PageKind::lower, PageKind::upper}) {
        const PageChannel& ch = model.page(kind);
        std::uint64_t kind_seed = mix_seed({seed, static_cast<std::uint64_t>(kind)});
        for (std::uint32_t page = 0; page < n_pages; ++page) {
            ErrorRecord rec;
            rec.pe = model.pe_cycles;
            rec.block = block;
            rec.page = page;
            rec.kind = kind;
            rec.frame_length = ds.frame_length;
            for (std::uint32_t f = 0; f < frames_per_page; ++f) {
                Rng rng = Rng::stream(kind_seed, page, f);
                BitVec x = random_bits(rng, n);
                BitVec y = transmit(x, ch, rng);
                std::uint32_t base = f * static_cast<std::uint32_t>(n);
                for (std::uint32_t i = 0; i < n; ++i) {
                    if (x[i] == y[i]) continue;
                    rec.errors.push_back({base + i, static_cast<std::uint8_t>(x[i] ? 1 : 0)});
                }
            }
            ds.records.push_back(std::move(rec));
        }
    }
    return ds;
}

struct LevelLog {
    std::vector<std::uint8_t> written;
    std::vector<std::uint8_t> read;
};

inline LevelLog synthesize_dmc4_levels(const Dmc4Params& m, std::uint64_t n_cells,
                                       std::uint64_t seed) {
    validate(m);
    if (n_cells == 0) throw std::invalid_argument("synthesize_dmc4_levels: no cells requested");
    LevelLog log;
    log.written.resize(n_cells);
    Rng rng = Rng::stream(seed, 0);
    for (auto& w : log.written) w = static_cast<std::uint8_t>(rng.uniform_below(4));
    log.read = dmc4_transmit(log.written, m, rng);
    return log;
}

// Projects a cell-level log onto the two pages through the Gray map and
// emits one record per page kind.
inline ErrorDataset levels_to_records(const LevelLog& log, std::uint64_t pe,
                                      std::uint32_t block = 0, std::uint32_t page = 0) {
    if (log.written.size() != log.read.size() || log.written.empty())
        throw std::invalid_argument("levels_to_records: bad level log");
    ErrorDataset ds;
    ds.vendor = "synthetic";
    ds.frame_length = static_cast<std::uint32_t>(log.written.size());
    for (PageKind kind : {PageKind::lower, PageKind::upper}) {
        ErrorRecord rec;
        rec.pe = pe;
        rec.block = block;
        rec.page = page;
        rec.kind = kind;
        rec.frame_length = ds.frame_length;
        for (std::uint32_t i = 0; i < log.written.size(); ++i) {
            std::uint8_t wb = kind == PageKind::lower ? level_lower_bit(log.written[i])
                                                      : level_upper_bit(log.written[i]);
            std::uint8_t rb = kind == PageKind::lower ? level_lower_bit(log.read[i])
                                                      : level_upper_bit(log.read[i]);
            if (wb == rb) continue;
            rec.errors.push_back({i, static_cast<std::uint8_t>(wb ? 1 : 0)});
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace flashchan
