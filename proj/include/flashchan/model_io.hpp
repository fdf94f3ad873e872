#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "flashchan/channels.hpp"
#include "flashchan/errors.hpp"

namespace flashchan {

struct Dmc4Model {
    Dmc4Params params;
    std::uint32_t frame_length = 0;
    std::uint64_t pe_cycles = 0;
};

using ModelFile = std::variant<TwoPageModel, Dmc4Model>;

namespace detail {

inline nlohmann::json page_to_json(const PageChannel& ch) {
    nlohmann::json j;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BacParams>) {
                j["p"] = m.p;
                j["q"] = m.q;
            } else if constexpr (std::is_same_v<T, BbmParams>) {
                j["a"] = m.a;
                j["b"] = m.b;
                j["c"] = m.c;
                j["d"] = m.d;
            } else {
                j["mean0"] = m.mean0;
                j["var0"] = m.var0;
                j["mean1"] = m.mean1;
                j["var1"] = m.var1;
            }
        },
        ch);
    return j;
}

inline PageChannel page_from_json(const std::string& family, const nlohmann::json& j) {
    if (family == "bac") return BacParams{j.at("p").get<double>(), j.at("q").get<double>()};
    if (family == "bbm")
        return BbmParams{j.at("a").get<double>(), j.at("b").get<double>(),
                         j.at("c").get<double>(), j.at("d").get<double>()};
    if (family == "nabac")
        return NaBacParams{j.at("mean0").get<double>(), j.at("var0").get<double>(),
                           j.at("mean1").get<double>(), j.at("var1").get<double>()};
    if (family == "pabac")
        return PaBacParams{j.at("mean0").get<double>(), j.at("var0").get<double>(),
                           j.at("mean1").get<double>(), j.at("var1").get<double>()};
    throw FormatError("unknown model family: " + family);
}

}  // namespace detail

inline nlohmann::json model_to_json(const ModelFile& model) {
    nlohmann::json j;
    if (const auto* two = std::get_if<TwoPageModel>(&model)) {
        std::string family = model_family(two->lower);
        if (family != model_family(two->upper))
            throw std::invalid_argument("model file: pages must share one model family");
        j["model"] = family;
        j["pages"]["lower"] = detail::page_to_json(two->lower);
        j["pages"]["upper"] = detail::page_to_json(two->upper);
        j["n"] = two->frame_length;
        j["pe"] = two->pe_cycles;
    } else {
        const auto& dmc = std::get<Dmc4Model>(model);
        j["model"] = "dmc4";
        j["transition"] = dmc.params.t;
        j["n"] = dmc.frame_length;
        j["pe"] = dmc.pe_cycles;
    }
    return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
    std::string family = j.at("model").get<std::string>();
    if (family == "dmc4") {
        Dmc4Model m;
        m.params.t = j.at("transition").get<std::array<std::array<double, 4>, 4>>();
        m.frame_length = j.value("n", 0u);
        m.pe_cycles = j.value("pe", 0ull);
        validate(m.params);
        return m;
    }
    TwoPageModel m;
    m.lower = detail::page_from_json(family, j.at("pages").at("lower"));
    m.upper = detail::page_from_json(family, j.at("pages").at("upper"));
    m.frame_length = j.at("n").get<std::uint32_t>();
    m.pe_cycles = j.value("pe", 0ull);
    validate(m.lower);
    validate(m.upper);
    return m;
}

inline void save_model_json(const ModelFile& model, const std::string& path,
                            const nlohmann::json& extra = {}) {
    nlohmann::json j = model_to_json(model);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

inline ModelFile load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw FormatError("model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace flashchan
