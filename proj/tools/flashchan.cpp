// flashchan: synthesize flash error datasets, characterize and fit channel
// models, compare distributions, and run frame-error-rate campaigns.
//
// Every subcommand reads an optional JSON config (--config); command-line
// flags override config values, config values override defaults. Config keys
// are the long flag names with dashes turned into underscores, either at the
// document root (shared across subcommands) or inside a per-subcommand
// section. Randomized subcommands require an explicit seed.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flashchan/flashchan.hpp"

using nlohmann::json;

namespace fc = flashchan;

namespace {

// ---------------------------------------------------------------------------
// Error reporting: machine-readable JSON on stderr.
// ---------------------------------------------------------------------------

struct Violation {
    std::string field;
    std::string message;
};

struct ConfigError {
    std::vector<Violation> violations;
};

int emit_config_error(const std::vector<Violation>& violations) {
    json j;
    j["error"] = "config";
    j["violations"] = json::array();
    for (const auto& v : violations)
        j["violations"].push_back({{"field", v.field}, {"message", v.message}});
    std::cerr << j.dump() << '\n';
    return 2;
}

int emit_runtime_error(const std::string& message) {
    json j;
    j["error"] = "runtime";
    j["message"] = message;
    std::cerr << j.dump() << '\n';
    return 1;
}

// ---------------------------------------------------------------------------
// Provenance: input digests and result metadata.
// ---------------------------------------------------------------------------

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fc::FormatError("cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char out[32];
    std::snprintf(out, sizeof out, "fnv1a-64:%016llx", static_cast<unsigned long long>(h));
    return out;
}

using InputList = std::vector<std::pair<std::string, std::string>>;  // path -> digest

json meta_json(const std::optional<std::uint64_t>& seed, const InputList& inputs) {
    json meta;
    meta["tool"] = "flashchan";
    meta["version"] = fc::version();
    if (seed)
        meta["seed"] = *seed;
    else
        meta["seed"] = nullptr;
    meta["inputs"] = json::object();
    for (const auto& [path, digest] : inputs) meta["inputs"][path] = digest;
    return meta;
}

void write_csv_meta(std::ostream& out, const std::optional<std::uint64_t>& seed,
                    const InputList& inputs) {
    out << "# flashchan " << fc::version() << '\n';
    if (seed)
        out << "# seed " << *seed << '\n';
    else
        out << "# seed none\n";
    for (const auto& [path, digest] : inputs) out << "# input " << path << ' ' << digest << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw fc::FormatError("cannot open " + path + " for writing");
    return out;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Config resolution: CLI flag > config section > config root > default.
// ---------------------------------------------------------------------------

const std::map<std::string, std::set<std::string>>& config_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"synth",
         {"model_file", "out", "seed", "pages", "frames_per_page", "block", "pe", "n",
          "levels_out"}},
        {"characterize",
         {"in", "out", "format", "page", "n", "lenient", "map_out", "map_block", "map_pe",
          "levels", "cell_out"}},
        {"fit", {"in", "out", "model", "page", "pe", "n", "lenient"}},
        {"ks",
         {"in", "model_file", "out", "format", "page", "pe", "n", "sim_frames", "seed",
          "lenient"}},
        {"fer",
         {"model_file", "in", "out", "format", "page", "pe", "model", "decoder", "n", "k", "t",
          "code_file", "profile", "code_out", "code_seed", "llr_mode", "max_iter",
          "no_early_term", "seed", "workers", "min_frame_errors", "max_frames", "lenient"}},
        {"curve",
         {"model_files", "out", "format", "page", "model", "decoder", "n", "k", "t",
          "code_file", "profile", "code_out", "code_seed", "llr_mode", "max_iter",
          "no_early_term", "seed", "workers", "min_frame_errors", "max_frames"}},
    };
    return keys;
}

json load_config(const std::string& path, const std::string& section,
                 std::vector<Violation>& violations) {
    std::ifstream in(path);
    if (!in) throw fc::FormatError("cannot open config " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw fc::FormatError("config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) {
        violations.push_back({"config", "document root must be a JSON object"});
        return json::object();
    }
    const auto& table = config_keys();
    std::set<std::string> root_allowed;
    for (const auto& [name, keys] : table) {
        root_allowed.insert(name);
        root_allowed.insert(keys.begin(), keys.end());
    }
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!root_allowed.count(it.key()))
            violations.push_back({it.key(), "unknown config key"});
        else if (table.count(it.key()) && !it.value().is_object())
            violations.push_back({it.key(), "subcommand section must be a JSON object"});
    }
    if (cfg.contains(section))
        for (auto it = cfg[section].begin(); it != cfg[section].end(); ++it)
            if (!table.at(section).count(it.key()))
                violations.push_back({section + "." + it.key(), "unknown config key"});
    return cfg;
}

class ArgSource {
  public:
    ArgSource(std::string section) : section_(std::move(section)) {}

    void attach_config(json cfg) { cfg_ = std::move(cfg); }
    std::vector<Violation>& violations() { return violations_; }

    void check() const {
        if (!violations_.empty()) throw ConfigError{violations_};
    }

    template <class T>
    std::optional<T> get(const CLI::Option* opt, const T& cli_value, const std::string& key) {
        if (opt->count() > 0) return cli_value;
        if (const json* v = find(key)) {
            try {
                return v->get<T>();
            } catch (const std::exception&) {
                violations_.push_back({key, "wrong type in config"});
            }
        }
        return std::nullopt;
    }

    template <class T>
    T get_or(const CLI::Option* opt, const T& cli_value, const std::string& key, T fallback) {
        auto v = get(opt, cli_value, key);
        return v ? *v : fallback;
    }

    template <class T>
    T require(const CLI::Option* opt, const T& cli_value, const std::string& key) {
        auto v = get(opt, cli_value, key);
        if (!v) {
            violations_.push_back({key, "required"});
            return T{};
        }
        return *v;
    }

    bool flag(const CLI::Option* opt, const std::string& key) {
        if (opt->count() > 0) return true;
        if (const json* v = find(key)) {
            if (v->is_boolean()) return v->get<bool>();
            violations_.push_back({key, "wrong type in config"});
        }
        return false;
    }

    const json* find(const std::string& key) const {
        if (!cfg_.is_object()) return nullptr;
        if (auto sec = cfg_.find(section_); sec != cfg_.end() && sec->is_object())
            if (auto it = sec->find(key); it != sec->end()) return &*it;
        if (auto it = cfg_.find(key); it != cfg_.end() && !it->is_object()) return &*it;
        return nullptr;
    }

  private:
    std::string section_;
    json cfg_ = json::object();
    std::vector<Violation> violations_;
};

// ---------------------------------------------------------------------------
// Shared pieces.
// ---------------------------------------------------------------------------

fc::ErrorDataset load_dataset(const std::string& path, bool lenient, std::size_t* skipped) {
    fc::LoadReport report =
        fc::load_jsonl(path, lenient ? fc::LoadMode::lenient : fc::LoadMode::strict);
    if (skipped) *skipped = report.skipped_lines;
    return std::move(report.dataset);
}

std::string channel_family(const fc::ModelFile& model) {
    if (const auto* two = std::get_if<fc::TwoPageModel>(&model))
        return fc::model_family(two->lower);
    return "dmc4";
}

// The soft decoder always runs on fixed crossover probabilities; for the
// mixture models it uses the mean rates, which is the usual mismatched
// setup when the instantaneous state is unobservable.
fc::BacParams decoding_bac(const fc::PageChannel& ch, std::uint64_t frame_n) {
    if (const auto* b = std::get_if<fc::BacParams>(&ch)) return *b;
    if (const auto* m = std::get_if<fc::BbmParams>(&ch))
        return {m->a / (m->a + m->b), m->c / (m->c + m->d)};
    double half = static_cast<double>(frame_n) / 2.0;
    if (const auto* m = std::get_if<fc::NaBacParams>(&ch))
        return {m->mean0 / half, m->mean1 / half};
    const auto& m = std::get<fc::PaBacParams>(ch);
    return {m.mean0 / half, m.mean1 / half};
}

struct DecoderBundle {
    fc::Decoder decoder;
    std::unique_ptr<fc::ParityCheckMatrix> h;
    json snapshot;
    InputList inputs;
};

struct DecoderFlags {
    std::string decoder;
    std::uint64_t n = 0, k = 0, t = 0;
    std::string code_file, profile, code_out, llr_mode;
    std::uint64_t code_seed = 0;
    std::uint32_t max_iter = 50;
    bool no_early_term = false;

    CLI::Option *o_decoder, *o_n, *o_k, *o_t, *o_code_file, *o_profile, *o_code_out,
        *o_code_seed, *o_llr_mode, *o_max_iter, *o_no_early_term;

    void attach(CLI::App* cmd) {
        o_decoder = cmd->add_option("--decoder", decoder, "decoder kind")
                        ->check(CLI::IsMember({"bd", "ldpc"}));
        o_n = cmd->add_option("--n", n, "bd code length in bits");
        o_k = cmd->add_option("--k", k, "bd information length in bits");
        o_t = cmd->add_option("--t", t, "bd correction radius");
        o_code_file = cmd->add_option("--code-file", code_file, "quasi-cyclic code JSON");
        o_profile = cmd->add_option("--profile", profile,
                                    "construct a code from 'z,dv,dc,n' instead of a file");
        o_code_out = cmd->add_option("--code-out", code_out, "save the constructed code here");
        o_code_seed = cmd->add_option("--code-seed", code_seed, "construction seed (default 0)");
        o_llr_mode = cmd->add_option("--llr-mode", llr_mode, "channel LLR mode")
                         ->check(CLI::IsMember({"asymmetric", "symmetric"}));
        o_max_iter = cmd->add_option("--max-iter", max_iter, "decoding iteration cap");
        o_no_early_term =
            cmd->add_flag("--no-early-term", no_early_term, "disable early termination");
    }
};

DecoderBundle build_decoder(DecoderFlags& f, ArgSource& args, const fc::PageChannel& channel) {
    DecoderBundle out;
    std::string kind = args.require(f.o_decoder, f.decoder, "decoder");
    if (kind == "bd") {
        std::uint64_t n = args.require(f.o_n, f.n, "n");
        std::uint64_t k = args.require(f.o_k, f.k, "k");
        std::uint64_t t = args.require(f.o_t, f.t, "t");
        args.check();
        fc::BoundedDistanceCode code{n, k, t};
        fc::validate(code);
        out.decoder = fc::BdDecoder{code};
        out.snapshot = {{"decoder", "bd"}, {"n", n}, {"k", k}, {"t", t}};
        return out;
    }
    if (kind != "ldpc") throw ConfigError{{{"decoder", "must be bd or ldpc"}}};

    auto code_file = args.get(f.o_code_file, f.code_file, "code_file");
    auto profile_str = args.get(f.o_profile, f.profile, "profile");
    if (!code_file == !profile_str) {
        args.violations().push_back(
            {"code_file", "ldpc decoding needs exactly one of code_file or profile"});
        args.check();
    }
    fc::QcLdpcCode code;
    json source;
    if (code_file) {
        code = fc::load_code_json(*code_file);
        out.inputs.emplace_back(*code_file, file_digest(*code_file));
        source = {{"code_file", *code_file}};
    } else {
        unsigned z = 0, dv = 0, dc = 0, n = 0;
        char comma = 0;
        std::istringstream in(*profile_str);
        if (!(in >> z >> comma >> dv >> comma >> dc >> comma >> n) || in.rdbuf()->in_avail()) {
            args.violations().push_back({"profile", "expected 'z,dv,dc,n'"});
            args.check();
        }
        fc::QcProfile profile{z, dv, dc, n};
        fc::validate(profile);
        std::uint64_t code_seed = args.get_or<std::uint64_t>(f.o_code_seed, f.code_seed,
                                                             "code_seed", 0);
        code = fc::peg_construct_qc(profile, code_seed);
        source = {{"profile", *profile_str}, {"code_seed", code_seed}};
        if (auto code_out = args.get(f.o_code_out, f.code_out, "code_out")) {
            fc::save_code_json(code, *code_out);
            source["code_out"] = *code_out;
        }
    }
    out.h = std::make_unique<fc::ParityCheckMatrix>(fc::expand(code));

    std::string mode_str = args.get_or<std::string>(f.o_llr_mode, f.llr_mode, "llr_mode",
                                                    "asymmetric");
    fc::LlrMode mode =
        mode_str == "symmetric" ? fc::LlrMode::symmetric : fc::LlrMode::asymmetric;
    fc::BacParams eff = decoding_bac(channel, out.h->n_bits);
    fc::ChannelLlr llr = fc::channel_llr(eff, mode);
    std::uint32_t max_iter = args.get_or<std::uint32_t>(f.o_max_iter, f.max_iter, "max_iter", 50);
    bool no_early = args.flag(f.o_no_early_term, "no_early_term");
    args.check();
    out.decoder = fc::SpaDecoder{out.h.get(), llr, max_iter, !no_early};
    out.snapshot = {{"decoder", "ldpc"},
                    {"n", out.h->n_bits},
                    {"checks", out.h->n_checks},
                    {"llr_mode", mode_str},
                    {"effective_p", eff.p},
                    {"effective_q", eff.q},
                    {"llr0", llr.llr0},
                    {"llr1", llr.llr1},
                    {"max_iter", max_iter},
                    {"early_term", !no_early},
                    {"source", source}};
    return out;
}

std::uint64_t pick_pe(const fc::ErrorDataset& ds, std::optional<std::uint64_t> requested) {
    if (requested) return *requested;
    std::set<std::uint64_t> seen;
    for (const auto& r : ds.records) seen.insert(r.pe);
    if (seen.size() == 1) return *seen.begin();
    std::string list;
    for (auto pe : seen) list += (list.empty() ? "" : ", ") + std::to_string(pe);
    throw fc::FormatError("dataset holds several cycle counts (" + list +
                          "); pick one with --pe");
}

std::vector<fc::PageKind> pages_from(const std::string& page) {
    if (page == "lower") return {fc::PageKind::lower};
    if (page == "upper") return {fc::PageKind::upper};
    return {fc::PageKind::lower, fc::PageKind::upper};
}

// The flag parser restricts choices on the command line; values arriving
// through a config file still need the same check. A missing value was
// already recorded by require(), and the caller's check() does the throwing
// so every violated field is reported together.
std::string checked_page(ArgSource& args, const std::string& page, bool allow_both) {
    if (!page.empty() && page != "lower" && page != "upper" &&
        !(allow_both && page == "both"))
        args.violations().push_back(
            {"page", allow_both ? "must be lower, upper or both" : "must be lower or upper"});
    return page;
}

json fer_result_json(const fc::FerEstimate& est, std::uint64_t pe, const std::string& page) {
    json j;
    j["pe"] = pe;
    j["model"] = est.model;
    j["code"] = est.code;
    j["page"] = page;
    j["frames"] = est.frames;
    j["errors"] = est.errors;
    j["fer"] = est.fer;
    j["ci_lo"] = est.ci_lo;
    j["ci_hi"] = est.ci_hi;
    j["reason"] = fc::to_string(est.reason);
    j["workers"] = est.workers;
    return j;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthCmd {
    CLI::App* cmd = nullptr;
    std::string config, model_file, out_path, levels_out;
    std::uint64_t seed = 0, pe = 0;
    std::uint32_t pages = 0, frames_per_page = 0, block = 0, n = 0;
    CLI::Option *o_model_file, *o_out, *o_seed, *o_pages, *o_fpp, *o_block, *o_pe, *o_n,
        *o_levels_out;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("synth", "synthesize an error dataset from a model file");
        cmd->add_option("--config", config, "JSON config file");
        o_model_file = cmd->add_option("--model-file", model_file, "channel model JSON");
        o_out = cmd->add_option("--out", out_path, "output dataset (JSON lines)");
        o_seed = cmd->add_option("--seed", seed, "random seed (required)");
        o_pages = cmd->add_option("--pages", pages, "pages to synthesize (default 1)");
        o_fpp = cmd->add_option("--frames-per-page", frames_per_page,
                                "records per page (default 1)");
        o_block = cmd->add_option("--block", block, "block id stamped on records (default 0)");
        o_pe = cmd->add_option("--pe", pe, "override the model's cycle-count label");
        o_n = cmd->add_option("--n", n, "override the model's frame length");
        o_levels_out = cmd->add_option("--levels-out", levels_out,
                                       "write the cell-level log (dmc4 models only)");
    }

    int run(ArgSource& args) {
        std::string model_path = args.require(o_model_file, model_file, "model_file");
        std::string out = args.require(o_out, out_path, "out");
        std::uint64_t seed_v = args.require(o_seed, seed, "seed");
        std::uint32_t pages_v = args.get_or<std::uint32_t>(o_pages, pages, "pages", 1);
        std::uint32_t fpp_v =
            args.get_or<std::uint32_t>(o_fpp, frames_per_page, "frames_per_page", 1);
        std::uint32_t block_v = args.get_or<std::uint32_t>(o_block, block, "block", 0);
        auto pe_v = args.get<std::uint64_t>(o_pe, pe, "pe");
        auto n_v = args.get<std::uint32_t>(o_n, n, "n");
        auto levels_path = args.get(o_levels_out, levels_out, "levels_out");
        args.check();

        fc::ModelFile model = fc::load_model_json(model_path);
        InputList inputs{{model_path, file_digest(model_path)}};
        fc::ErrorDataset ds;
        if (auto* two = std::get_if<fc::TwoPageModel>(&model)) {
            if (levels_path)
                throw ConfigError{
                    {{"levels_out", "cell levels exist only for dmc4 models"}}};
            if (n_v) two->frame_length = *n_v;
            if (pe_v) two->pe_cycles = *pe_v;
            ds = fc::synthesize_dataset(*two, pages_v, fpp_v, seed_v, block_v);
        } else {
            const auto& dmc = std::get<fc::Dmc4Model>(model);
            std::uint32_t cells = n_v ? *n_v : dmc.frame_length;
            if (cells == 0)
                throw ConfigError{{{"n", "model carries no frame length; pass --n"}}};
            std::uint64_t label = pe_v ? *pe_v : dmc.pe_cycles;
            ds.frame_length = cells;
            ds.vendor = "synthetic";
            std::ofstream levels;
            if (levels_path) {
                levels = open_out(*levels_path);
                write_csv_meta(levels, seed_v, inputs);
                levels << "written,read\n";
            }
            for (std::uint32_t p = 0; p < pages_v; ++p)
                for (std::uint32_t f = 0; f < fpp_v; ++f) {
                    fc::LevelLog log = fc::synthesize_dmc4_levels(
                        dmc.params, cells, fc::mix_seed({seed_v, p, f}));
                    fc::ErrorDataset part = fc::levels_to_records(log, label, block_v, p);
                    for (auto& rec : part.records) ds.records.push_back(std::move(rec));
                    if (levels_path)
                        for (std::size_t i = 0; i < log.written.size(); ++i)
                            levels << unsigned(log.written[i]) << ',' << unsigned(log.read[i])
                                   << '\n';
                }
        }

        fc::save_jsonl(ds, out);
        json meta = meta_json(seed_v, inputs);
        meta["records"] = ds.records.size();
        meta["frame_length"] = ds.frame_length;
        meta["pages"] = pages_v;
        meta["frames_per_page"] = fpp_v;
        write_json_file(out + ".meta.json", meta);
        std::cout << "wrote " << ds.records.size() << " records (frame length "
                  << ds.frame_length << ") to " << out << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------------------
// characterize
// ---------------------------------------------------------------------------

struct CharacterizeCmd {
    CLI::App* cmd = nullptr;
    std::string config, in_path, out_path, format, page, map_out, levels, cell_out;
    std::uint64_t map_pe = 0;
    std::uint32_t n = 0, map_block = 0;
    bool lenient = false;
    CLI::Option *o_in, *o_out, *o_format, *o_page, *o_n, *o_lenient, *o_map_out, *o_map_block,
        *o_map_pe, *o_levels, *o_cell_out;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand(
            "characterize", "summarize a dataset: moments, error maps, cell frequencies");
        cmd->add_option("--config", config, "JSON config file");
        o_in = cmd->add_option("--in", in_path, "input dataset (JSON lines)");
        o_out = cmd->add_option("--out", out_path, "moment table output");
        o_format = cmd->add_option("--format", format, "output format (default csv)")
                       ->check(CLI::IsMember({"csv", "json"}));
        o_page = cmd->add_option("--page", page, "page selection (default both)")
                     ->check(CLI::IsMember({"lower", "upper", "both"}));
        o_n = cmd->add_option("--n", n, "frame length for re-framing (default: record length)");
        o_lenient = cmd->add_flag("--lenient", lenient, "skip malformed input lines");
        o_map_out = cmd->add_option("--map-out", map_out, "write a per-block error-count grid");
        o_map_block = cmd->add_option("--map-block", map_block, "block for --map-out (default 0)");
        o_map_pe = cmd->add_option("--map-pe", map_pe, "cycle count for --map-out");
        o_levels = cmd->add_option("--levels", levels, "cell-level log for --cell-out");
        o_cell_out = cmd->add_option("--cell-out", cell_out, "write the cell-transition table");
    }

    static fc::LevelLog load_levels(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw fc::FormatError("cannot open " + path);
        fc::LevelLog log;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#' || line == "written,read") continue;
            unsigned w = 0, r = 0;
            char comma = 0;
            std::istringstream row(line);
            if (!(row >> w >> comma >> r) || comma != ',' || w > 3 || r > 3)
                throw fc::FormatError(path + ":" + std::to_string(lineno) +
                                      ": expected 'written,read' levels in 0..3");
            log.written.push_back(static_cast<std::uint8_t>(w));
            log.read.push_back(static_cast<std::uint8_t>(r));
        }
        return log;
    }

    int run(ArgSource& args) {
        std::string in = args.require(o_in, in_path, "in");
        std::string out = args.require(o_out, out_path, "out");
        std::string fmt = args.get_or<std::string>(o_format, format, "format", "csv");
        std::string page_v =
            checked_page(args, args.get_or<std::string>(o_page, page, "page", "both"), true);
        auto n_v = args.get<std::uint32_t>(o_n, n, "n");
        bool lenient_v = args.flag(o_lenient, "lenient");
        auto map_out_v = args.get(o_map_out, map_out, "map_out");
        auto map_pe_v = args.get<std::uint64_t>(o_map_pe, map_pe, "map_pe");
        std::uint32_t map_block_v =
            args.get_or<std::uint32_t>(o_map_block, map_block, "map_block", 0);
        auto levels_v = args.get(o_levels, levels, "levels");
        auto cell_out_v = args.get(o_cell_out, cell_out, "cell_out");
        if (map_out_v && !map_pe_v)
            args.violations().push_back({"map_pe", "required with map_out"});
        if (!levels_v != !cell_out_v)
            args.violations().push_back(
                {"cell_out", "levels and cell_out must be given together"});
        args.check();

        std::size_t skipped = 0;
        fc::ErrorDataset ds = load_dataset(in, lenient_v, &skipped);
        InputList inputs{{in, file_digest(in)}};
        std::uint64_t frame_n = n_v ? *n_v : ds.frame_length;

        std::set<std::uint64_t> cycles;
        for (const auto& r : ds.records) cycles.insert(r.pe);

        struct Row {
            std::uint64_t pe;
            fc::PageKind kind;
            fc::MomentEstimates m;
        };
        std::vector<Row> rows;
        for (std::uint64_t pe : cycles)
            for (fc::PageKind kind : pages_from(page_v)) {
                try {
                    fc::FrameCounts fcnt = fc::frame_error_counts(ds, kind, pe, frame_n);
                    rows.push_back({pe, kind, fc::sample_moments(fcnt)});
                } catch (const fc::EmptySampleError&) {
                }
            }
        if (rows.empty())
            throw fc::EmptySampleError("no complete frames matched the page selection");

        if (fmt == "csv") {
            std::ofstream os = open_out(out);
            write_csv_meta(os, std::nullopt, inputs);
            if (skipped) os << "# skipped " << skipped << " malformed lines\n";
            os << "pe,page,mean,var,mu1,mu2,mu3,mu4,n_frames\n";
            os << std::setprecision(12);
            for (const auto& r : rows)
                os << r.pe << ',' << fc::to_string(r.kind) << ',' << r.m.mean_k << ','
                   << r.m.var_k << ',' << r.m.mu1 << ',' << r.m.mu2 << ',' << r.m.mu3 << ','
                   << r.m.mu4 << ',' << r.m.n_frames << '\n';
        } else {
            json doc;
            doc["meta"] = meta_json(std::nullopt, inputs);
            if (skipped) doc["meta"]["skipped_lines"] = skipped;
            doc["frame_length"] = frame_n;
            doc["rows"] = json::array();
            for (const auto& r : rows)
                doc["rows"].push_back({{"pe", r.pe},
                                       {"page", fc::to_string(r.kind)},
                                       {"mean", r.m.mean_k},
                                       {"var", r.m.var_k},
                                       {"mu1", r.m.mu1},
                                       {"mu2", r.m.mu2},
                                       {"mu3", r.m.mu3},
                                       {"mu4", r.m.mu4},
                                       {"n_frames", r.m.n_frames}});
            write_json_file(out, doc);
        }

        if (map_out_v) {
            fc::ErrorMap map = fc::error_map(ds, map_block_v, *map_pe_v, frame_n);
            std::ofstream os = open_out(*map_out_v);
            write_csv_meta(os, std::nullopt, inputs);
            os << "# block " << map_block_v << " pe " << *map_pe_v << " frame_length "
               << frame_n << " (-1 marks a missing frame)\n";
            os << "page,kind";
            for (std::size_t f = 0; f < map.max_frames(); ++f) os << ",f" << f;
            os << '\n';
            for (const auto& row : map.rows) {
                os << row.page << ',' << fc::to_string(row.kind);
                for (auto c : row.counts) os << ',' << c;
                os << '\n';
            }
        }

        if (levels_v) {
            fc::LevelLog log = load_levels(*levels_v);
            fc::CellTransitionCounts cells = fc::cell_error_frequencies(log.written, log.read);
            InputList cell_inputs{{*levels_v, file_digest(*levels_v)}};
            if (fmt == "csv") {
                std::ofstream os = open_out(*cell_out_v);
                write_csv_meta(os, std::nullopt, cell_inputs);
                os << "# error shares in percent of all erroneous cells; diagonal entries "
                      "excluded\n";
                os << "written,read0,read1,read2,read3\n";
                os << std::setprecision(12);
                for (int w = 0; w < 4; ++w) {
                    os << w;
                    for (int r = 0; r < 4; ++r)
                        os << ',' << (w == r ? 0.0 : cells.error_share_percent(w, r));
                    os << '\n';
                }
                os << "# cells " << cells.total << " errors " << cells.errors()
                   << " cell_error_probability " << cells.cell_error_probability() << '\n';
            } else {
                json doc;
                doc["meta"] = meta_json(std::nullopt, cell_inputs);
                doc["cells"] = cells.total;
                doc["errors"] = cells.errors();
                doc["cell_error_probability"] = cells.cell_error_probability();
                doc["counts"] = cells.counts;
                auto shares = json::array();
                for (int w = 0; w < 4; ++w) {
                    auto row = json::array();
                    for (int r = 0; r < 4; ++r)
                        row.push_back(w == r ? 0.0 : cells.error_share_percent(w, r));
                    shares.push_back(row);
                }
                doc["error_share_percent"] = shares;
                write_json_file(*cell_out_v, doc);
            }
        }

        std::cout << "wrote " << rows.size() << " moment rows to " << out;
        if (map_out_v) std::cout << ", error map to " << *map_out_v;
        if (cell_out_v) std::cout << ", cell table to " << *cell_out_v;
        std::cout << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitCmd {
    CLI::App* cmd = nullptr;
    std::string config, in_path, out_path, model, page;
    std::uint64_t pe = 0;
    std::uint32_t n = 0;
    bool lenient = false;
    CLI::Option *o_in, *o_out, *o_model, *o_page, *o_pe, *o_n, *o_lenient;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("fit", "fit channel model parameters from a dataset");
        cmd->add_option("--config", config, "JSON config file");
        o_in = cmd->add_option("--in", in_path, "input dataset (JSON lines)");
        o_out = cmd->add_option("--out", out_path, "output model JSON");
        o_model = cmd->add_option("--model", model, "model family")
                      ->check(CLI::IsMember({"bac", "bbm", "nabac", "pabac", "dmc4"}));
        o_page = cmd->add_option("--page", page, "pages to fit (default both)")
                     ->check(CLI::IsMember({"lower", "upper", "both"}));
        o_pe = cmd->add_option("--pe", pe, "cycle count to fit (default: the only one present)");
        o_n = cmd->add_option("--n", n, "frame length for re-framing (default: record length)");
        o_lenient = cmd->add_flag("--lenient", lenient, "skip malformed input lines");
    }

    static fc::PageChannel fit_one(const std::string& family, const fc::MomentEstimates& m) {
        if (family == "bac") return fc::fit_bac(m);
        if (family == "bbm") return fc::fit_bbm(m);
        if (family == "nabac") return fc::fit_na_bac(m);
        return fc::fit_pa_bac(m);
    }

    int run(ArgSource& args) {
        std::string in = args.require(o_in, in_path, "in");
        std::string out = args.require(o_out, out_path, "out");
        std::string family = args.require(o_model, model, "model");
        std::string page_v =
            checked_page(args, args.get_or<std::string>(o_page, page, "page", "both"), true);
        auto pe_v = args.get<std::uint64_t>(o_pe, pe, "pe");
        auto n_v = args.get<std::uint32_t>(o_n, n, "n");
        bool lenient_v = args.flag(o_lenient, "lenient");
        if (family == "dmc4")
            args.violations().push_back(
                {"model", "dmc4 needs cell-level data; fit supports bac, bbm, nabac, pabac"});
        args.check();

        std::size_t skipped = 0;
        fc::ErrorDataset ds = load_dataset(in, lenient_v, &skipped);
        InputList inputs{{in, file_digest(in)}};
        std::uint64_t pe_used = pick_pe(ds, pe_v);
        std::uint64_t frame_n = n_v ? *n_v : ds.frame_length;

        json stats;
        std::map<std::string, fc::PageChannel> fitted;
        for (fc::PageKind kind : pages_from(page_v)) {
            fc::FrameCounts fcnt = fc::frame_error_counts(ds, kind, pe_used, frame_n);
            fc::MomentEstimates m = fc::sample_moments(fcnt);
            fitted[fc::to_string(kind)] = fit_one(family, m);
            stats[fc::to_string(kind)] = {{"mean", m.mean_k},
                                          {"var", m.var_k},
                                          {"n_frames", m.n_frames},
                                          {"rber", m.mean_k / static_cast<double>(frame_n)}};
        }

        // The model file always carries both pages; a single-page fit is
        // mirrored and labeled so downstream tools stay composable.
        fc::TwoPageModel model_out;
        model_out.lower = fitted.count("lower") ? fitted["lower"] : fitted["upper"];
        model_out.upper = fitted.count("upper") ? fitted["upper"] : fitted["lower"];
        model_out.frame_length = static_cast<std::uint32_t>(frame_n);
        model_out.pe_cycles = pe_used;

        json extra;
        extra["meta"] = meta_json(std::nullopt, inputs);
        if (skipped) extra["meta"]["skipped_lines"] = skipped;
        extra["fitted_pages"] = page_v;
        extra["source_stats"] = stats;
        fc::save_model_json(model_out, out, extra);
        std::cout << "fitted " << family << " model at " << pe_used << " cycles from "
                  << in << " -> " << out << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------------------
// ks
// ---------------------------------------------------------------------------

struct KsCmd {
    CLI::App* cmd = nullptr;
    std::string config, in_path, model_file, out_path, format, page;
    std::uint64_t pe = 0, seed = 0;
    std::uint32_t n = 0, sim_frames = 0;
    bool lenient = false;
    CLI::Option *o_in, *o_model_file, *o_out, *o_format, *o_page, *o_pe, *o_n, *o_sim_frames,
        *o_seed, *o_lenient;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand(
            "ks", "two-sample test of dataset error counts against a model's counts");
        cmd->add_option("--config", config, "JSON config file");
        o_in = cmd->add_option("--in", in_path, "input dataset (JSON lines)");
        o_model_file = cmd->add_option("--model-file", model_file, "channel model JSON");
        o_out = cmd->add_option("--out", out_path, "result output");
        o_format = cmd->add_option("--format", format, "output format (default json)")
                       ->check(CLI::IsMember({"csv", "json"}));
        o_page = cmd->add_option("--page", page, "page to compare")
                     ->check(CLI::IsMember({"lower", "upper"}));
        o_pe = cmd->add_option("--pe", pe, "cycle count (default: the only one present)");
        o_n = cmd->add_option("--n", n, "frame length for re-framing (default: record length)");
        o_sim_frames =
            cmd->add_option("--sim-frames", sim_frames, "simulated sample size (default 10000)");
        o_seed = cmd->add_option("--seed", seed, "random seed (required)");
        o_lenient = cmd->add_flag("--lenient", lenient, "skip malformed input lines");
    }

    int run(ArgSource& args) {
        std::string in = args.require(o_in, in_path, "in");
        std::string model_path = args.require(o_model_file, model_file, "model_file");
        std::string out = args.require(o_out, out_path, "out");
        std::string fmt = args.get_or<std::string>(o_format, format, "format", "json");
        std::string page_v =
            checked_page(args, args.require<std::string>(o_page, page, "page"), false);
        std::uint64_t seed_v = args.require(o_seed, seed, "seed");
        auto pe_v = args.get<std::uint64_t>(o_pe, pe, "pe");
        auto n_v = args.get<std::uint32_t>(o_n, n, "n");
        std::uint32_t sim =
            args.get_or<std::uint32_t>(o_sim_frames, sim_frames, "sim_frames", 10000);
        bool lenient_v = args.flag(o_lenient, "lenient");
        args.check();

        std::size_t skipped = 0;
        fc::ErrorDataset ds = load_dataset(in, lenient_v, &skipped);
        fc::ModelFile model = fc::load_model_json(model_path);
        InputList inputs{{in, file_digest(in)}, {model_path, file_digest(model_path)}};
        std::uint64_t pe_used = pick_pe(ds, pe_v);
        fc::PageKind kind = fc::page_kind_from_string(page_v);
        std::uint64_t frame_n = n_v ? *n_v : ds.frame_length;

        std::vector<std::uint32_t> empirical =
            fc::frame_error_counts(ds, kind, pe_used, frame_n).k;

        std::vector<std::uint32_t> simulated(sim);
        if (const auto* two = std::get_if<fc::TwoPageModel>(&model)) {
            const fc::PageChannel& ch = two->page(kind);
            fc::Rng rng = fc::Rng::stream(seed_v, 0);
            for (auto& v : simulated)
                v = static_cast<std::uint32_t>(fc::draw_error_counts(ch, frame_n, rng).k());
        } else {
            const auto& dmc = std::get<fc::Dmc4Model>(model);
            for (std::uint32_t f = 0; f < sim; ++f) {
                fc::LevelLog log = fc::synthesize_dmc4_levels(dmc.params, frame_n,
                                                              fc::mix_seed({seed_v, f}));
                std::uint32_t count = 0;
                for (std::size_t i = 0; i < log.written.size(); ++i) {
                    std::uint8_t wb = kind == fc::PageKind::lower
                                          ? fc::level_lower_bit(log.written[i])
                                          : fc::level_upper_bit(log.written[i]);
                    std::uint8_t rb = kind == fc::PageKind::lower
                                          ? fc::level_lower_bit(log.read[i])
                                          : fc::level_upper_bit(log.read[i]);
                    if (wb != rb) ++count;
                }
                simulated[f] = count;
            }
        }

        fc::KsResult res = fc::ks_two_sample_counts(empirical, simulated);
        if (fmt == "json") {
            json doc;
            doc["meta"] = meta_json(seed_v, inputs);
            if (skipped) doc["meta"]["skipped_lines"] = skipped;
            doc["page"] = page_v;
            doc["pe"] = pe_used;
            doc["frame_length"] = frame_n;
            doc["statistic"] = res.statistic;
            doc["p_value"] = res.p_value;
            doc["n_empirical"] = res.n1;
            doc["n_simulated"] = res.n2;
            write_json_file(out, doc);
        } else {
            std::ofstream os = open_out(out);
            write_csv_meta(os, seed_v, inputs);
            os << "pe,page,statistic,p_value,n_empirical,n_simulated\n";
            os << std::setprecision(12) << pe_used << ',' << page_v << ',' << res.statistic
               << ',' << res.p_value << ',' << res.n1 << ',' << res.n2 << '\n';
        }
        std::cout << "ks statistic " << res.statistic << " (p " << res.p_value << ", "
                  << res.n1 << " vs " << res.n2 << " frames) -> " << out << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------------------
// fer
// ---------------------------------------------------------------------------

struct FerCmd {
    CLI::App* cmd = nullptr;
    DecoderFlags dec;
    std::string config, model_file, in_path, out_path, format, page, model;
    std::uint64_t pe = 0, seed = 0, min_frame_errors = 0, max_frames = 0;
    std::uint32_t workers = 0;
    bool lenient = false;
    CLI::Option *o_model_file, *o_in, *o_out, *o_format, *o_page, *o_pe, *o_model, *o_seed,
        *o_workers, *o_min_fe, *o_max_frames, *o_lenient;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand(
            "fer", "estimate the frame error rate of a decoder over a channel or a dataset");
        cmd->add_option("--config", config, "JSON config file");
        o_model_file = cmd->add_option("--model-file", model_file,
                                       "channel model JSON (simulation mode)");
        o_in = cmd->add_option("--in", in_path, "recorded dataset (replay mode)");
        o_out = cmd->add_option("--out", out_path, "result output");
        o_format = cmd->add_option("--format", format, "output format (default json)")
                       ->check(CLI::IsMember({"csv", "json"}));
        o_page = cmd->add_option("--page", page, "page to run")
                     ->check(CLI::IsMember({"lower", "upper"}));
        o_pe = cmd->add_option("--pe", pe, "cycle-count label (replay: selection)");
        o_model = cmd->add_option("--model", model, "expected model family (cross-check)")
                      ->check(CLI::IsMember({"bac", "bbm", "nabac", "pabac", "dmc4"}));
        o_seed = cmd->add_option("--seed", seed, "random seed (required for simulation)");
        o_workers = cmd->add_option("--workers", workers, "parallel workers (default 1)");
        o_min_fe = cmd->add_option("--min-frame-errors", min_frame_errors,
                                   "stop after this many frame errors (default 400)");
        o_max_frames = cmd->add_option("--max-frames", max_frames,
                                       "hard frame cap (default 100000000)");
        o_lenient = cmd->add_flag("--lenient", lenient, "skip malformed input lines");
        dec.attach(cmd);
    }

    int run(ArgSource& args) {
        auto model_path = args.get(o_model_file, model_file, "model_file");
        auto in = args.get(o_in, in_path, "in");
        std::string out = args.require(o_out, out_path, "out");
        std::string fmt = args.get_or<std::string>(o_format, format, "format", "json");
        std::string page_v =
            checked_page(args, args.require<std::string>(o_page, page, "page"), false);
        auto family = args.get(o_model, model, "model");
        auto pe_v = args.get<std::uint64_t>(o_pe, pe, "pe");
        bool lenient_v = args.flag(o_lenient, "lenient");
        if (!model_path == !in)
            args.violations().push_back(
                {"model_file", "exactly one of model_file (simulate) or in (replay)"});
        args.check();
        fc::PageKind kind = fc::page_kind_from_string(page_v);

        if (model_path) {
            std::uint64_t seed_v = args.require(o_seed, seed, "seed");
            std::uint32_t workers_v = args.get_or<std::uint32_t>(o_workers, workers,
                                                                 "workers", 1);
            fc::StopRule stop;
            stop.min_frame_errors = args.get_or<std::uint64_t>(
                o_min_fe, min_frame_errors, "min_frame_errors", stop.min_frame_errors);
            stop.max_frames = args.get_or<std::uint64_t>(o_max_frames, max_frames,
                                                         "max_frames", stop.max_frames);
            args.check();

            fc::ModelFile mf = fc::load_model_json(*model_path);
            if (family && *family != channel_family(mf))
                throw ConfigError{{{"model", "model file is '" + channel_family(mf) +
                                                 "' but config expects '" + *family + "'"}}};
            const auto* two = std::get_if<fc::TwoPageModel>(&mf);
            if (!two)
                throw ConfigError{
                    {{"model_file", "fer simulation needs a page-level model, not dmc4"}}};
            const fc::PageChannel& channel = two->page(kind);
            DecoderBundle bundle = build_decoder(dec, args, channel);
            bundle.inputs.emplace_back(*model_path, file_digest(*model_path));

            fc::FerEstimate est =
                fc::estimate_fer(channel, bundle.decoder, stop, seed_v, workers_v);
            std::uint64_t pe_label = pe_v ? *pe_v : two->pe_cycles;
            write_result(out, fmt, est, pe_label, page_v, bundle, seed_v, stop, two->frame_length);
            std::cout << "fer " << est.fer << " [" << est.ci_lo << ", " << est.ci_hi << "] ("
                      << est.errors << " errors / " << est.frames << " frames, "
                      << fc::to_string(est.reason) << ") -> " << out << '\n';
            return 0;
        }

        std::size_t skipped = 0;
        fc::ErrorDataset ds = load_dataset(*in, lenient_v, &skipped);
        std::uint64_t pe_used = pick_pe(ds, pe_v);
        // Replay decodes against the stored frames; the decoder's channel
        // parameters come from the dataset's own fitted rates.
        fc::FrameCounts counts = fc::frame_error_counts(
            ds, kind, pe_used, ds.frame_length);
        fc::MomentEstimates m = fc::sample_moments(counts);
        fc::PageChannel channel = fc::fit_bac(m);
        DecoderBundle bundle = build_decoder(dec, args, channel);
        bundle.inputs.emplace_back(*in, file_digest(*in));
        std::uint64_t n_dec = fc::decoder_frame_length(bundle.decoder);
        fc::FerEstimate est = fc::replay_fer(ds, kind, pe_used, n_dec, bundle.decoder);
        auto seed_opt = args.get<std::uint64_t>(o_seed, seed, "seed");
        fc::StopRule stop{0, 0};
        write_result(out, fmt, est, pe_used, page_v, bundle,
                     seed_opt ? std::optional<std::uint64_t>(*seed_opt) : std::nullopt, stop,
                     ds.frame_length);
        std::cout << "replay fer " << est.fer << " [" << est.ci_lo << ", " << est.ci_hi
                  << "] (" << est.errors << " errors / " << est.frames << " frames) -> " << out
                  << '\n';
        return 0;
    }

    static void write_result(const std::string& out, const std::string& fmt,
                             const fc::FerEstimate& est, std::uint64_t pe_label,
                             const std::string& page_v, const DecoderBundle& bundle,
                             std::optional<std::uint64_t> seed_v, const fc::StopRule& stop,
                             std::uint32_t model_n) {
        if (fmt == "json") {
            json doc;
            doc["meta"] = meta_json(seed_v, bundle.inputs);
            doc["result"] = fer_result_json(est, pe_label, page_v);
            doc["decoder"] = bundle.snapshot;
            if (stop.max_frames) {
                doc["stop"] = {{"min_frame_errors", stop.min_frame_errors},
                               {"max_frames", stop.max_frames}};
            }
            if (model_n) doc["model_frame_length"] = model_n;
            write_json_file(out, doc);
        } else {
            fc::FerCurve curve;
            curve.push_back({pe_label, est.model, est.code, page_v, est});
            std::ofstream os = open_out(out);
            write_csv_meta(os, seed_v, bundle.inputs);
            os << std::setprecision(12);
            fc::write_fer_csv(curve, os);
        }
    }
};

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

struct CurveCmd {
    CLI::App* cmd = nullptr;
    DecoderFlags dec;
    std::string config, out_path, format, page, model;
    std::vector<std::string> model_files;
    std::uint64_t seed = 0, min_frame_errors = 0, max_frames = 0;
    std::uint32_t workers = 0;
    CLI::Option *o_model_files, *o_out, *o_format, *o_page, *o_model, *o_seed, *o_workers,
        *o_min_fe, *o_max_frames;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("curve",
                                 "frame error rate across cycle counts (one model file each)");
        cmd->add_option("--config", config, "JSON config file");
        o_model_files = cmd->add_option("--model-file", model_files,
                                        "channel model JSON (repeat per cycle count)");
        o_out = cmd->add_option("--out", out_path, "curve output");
        o_format = cmd->add_option("--format", format, "output format (default csv)")
                       ->check(CLI::IsMember({"csv", "json"}));
        o_page = cmd->add_option("--page", page, "page to run")
                     ->check(CLI::IsMember({"lower", "upper"}));
        o_model = cmd->add_option("--model", model, "expected model family (cross-check)")
                      ->check(CLI::IsMember({"bac", "bbm", "nabac", "pabac", "dmc4"}));
        o_seed = cmd->add_option("--seed", seed, "random seed (required)");
        o_workers = cmd->add_option("--workers", workers, "parallel workers (default 1)");
        o_min_fe = cmd->add_option("--min-frame-errors", min_frame_errors,
                                   "stop after this many frame errors per point (default 400)");
        o_max_frames = cmd->add_option("--max-frames", max_frames,
                                       "hard frame cap per point (default 100000000)");
        dec.attach(cmd);
    }

    int run(ArgSource& args) {
        std::vector<std::string> files =
            args.get_or(o_model_files, model_files, "model_files", std::vector<std::string>{});
        std::string out = args.require(o_out, out_path, "out");
        std::string fmt = args.get_or<std::string>(o_format, format, "format", "csv");
        std::string page_v =
            checked_page(args, args.require<std::string>(o_page, page, "page"), false);
        auto family = args.get(o_model, model, "model");
        std::uint64_t seed_v = args.require(o_seed, seed, "seed");
        std::uint32_t workers_v = args.get_or<std::uint32_t>(o_workers, workers, "workers", 1);
        fc::StopRule stop;
        stop.min_frame_errors = args.get_or<std::uint64_t>(
            o_min_fe, min_frame_errors, "min_frame_errors", stop.min_frame_errors);
        stop.max_frames = args.get_or<std::uint64_t>(o_max_frames, max_frames, "max_frames",
                                                     stop.max_frames);
        if (files.empty()) args.violations().push_back({"model_files", "required"});
        args.check();
        fc::PageKind kind = fc::page_kind_from_string(page_v);

        struct Point {
            std::string path;
            fc::TwoPageModel model;
        };
        std::vector<Point> points;
        InputList inputs;
        for (const auto& path : files) {
            fc::ModelFile mf = fc::load_model_json(path);
            if (family && *family != channel_family(mf))
                throw ConfigError{{{"model", path + " is '" + channel_family(mf) +
                                                 "' but config expects '" + *family + "'"}}};
            const auto* two = std::get_if<fc::TwoPageModel>(&mf);
            if (!two)
                throw ConfigError{
                    {{"model_files", path + ": curves need page-level models, not dmc4"}}};
            points.push_back({path, *two});
            inputs.emplace_back(path, file_digest(path));
        }
        std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
            return a.model.pe_cycles < b.model.pe_cycles;
        });
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].model.pe_cycles == points[i - 1].model.pe_cycles)
                throw ConfigError{{{"model_files",
                                    points[i].path + " repeats cycle count " +
                                        std::to_string(points[i].model.pe_cycles)}}};

        std::vector<fc::CurveSpec> specs;
        for (const auto& p : points) specs.push_back({p.model.pe_cycles, p.model.page(kind)});

        // For soft decoding the LLRs stay fixed across the sweep, anchored at
        // the first (least-cycled) point; the snapshot records them.
        DecoderBundle bundle = build_decoder(dec, args, specs.front().channel);
        for (auto& [path, digest] : bundle.inputs) inputs.emplace_back(path, digest);

        fc::FerCurve curve =
            fc::fer_curve(specs, bundle.decoder, stop, seed_v, workers_v, "", page_v);

        if (fmt == "csv") {
            std::ofstream os = open_out(out);
            write_csv_meta(os, seed_v, inputs);
            os << std::setprecision(12);
            fc::write_fer_csv(curve, os);
        } else {
            json doc;
            doc["meta"] = meta_json(seed_v, inputs);
            doc["decoder"] = bundle.snapshot;
            doc["stop"] = {{"min_frame_errors", stop.min_frame_errors},
                           {"max_frames", stop.max_frames}};
            doc["points"] = json::array();
            for (const auto& p : curve) doc["points"].push_back(fer_result_json(p.est, p.pe, p.page));
            write_json_file(out, doc);
        }
        std::cout << "wrote " << curve.size() << " curve points to " << out << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------------------

template <class Cmd>
int dispatch(Cmd& c, const std::string& section) {
    ArgSource args(section);
    try {
        if (!c.config.empty())
            args.attach_config(load_config(c.config, section, args.violations()));
        return c.run(args);
    } catch (const ConfigError& e) {
        auto all = args.violations();
        all.insert(all.end(), e.violations.begin(), e.violations.end());
        std::sort(all.begin(), all.end(),
                  [](const Violation& a, const Violation& b) { return a.field < b.field; });
        all.erase(std::unique(all.begin(), all.end(),
                              [](const Violation& a, const Violation& b) {
                                  return a.field == b.field && a.message == b.message;
                              }),
                  all.end());
        return emit_config_error(all);
    } catch (const std::exception& e) {
        return emit_runtime_error(e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flash channel model toolkit"};
    app.set_version_flag("--version", FLASHCHAN_VERSION);
    app.require_subcommand(0, 1);

    SynthCmd synth;
    CharacterizeCmd characterize;
    FitCmd fit;
    KsCmd ks;
    FerCmd fer;
    CurveCmd curve;
    synth.attach(app);
    characterize.attach(app);
    fit.attach(app);
    ks.attach(app);
    fer.attach(app);
    curve.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_config_error({{"argv", e.what()}});
    }

    if (synth.cmd->parsed()) return dispatch(synth, "synth");
    if (characterize.cmd->parsed()) return dispatch(characterize, "characterize");
    if (fit.cmd->parsed()) return dispatch(fit, "fit");
    if (ks.cmd->parsed()) return dispatch(ks, "ks");
    if (fer.cmd->parsed()) return dispatch(fer, "fer");
    if (curve.cmd->parsed()) return dispatch(curve, "curve");
    std::cerr << app.help();
    return 2;
}
