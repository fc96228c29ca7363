#include "fdrsel/errors.hpp"
#include "fdrsel/scenario.hpp"

#include <yaml-cpp/yaml.h>

namespace fdrsel {

namespace {

ScenarioSpec from_node(const YAML::Node& node, int index)
{
    if (!node.IsMap()) throw Error(ErrorCode::invalid_argument, "scenario document " + std::to_string(index) + " is not a mapping");
    ScenarioSpec s;
    if (node["builtin"]) s = builtin_scenario(node["builtin"].as<std::string>());
    if (s.name.empty()) s.name = "scenario-" + std::to_string(index);

    for (const auto& entry : node) {
        const auto key = entry.first.as<std::string>();
        const YAML::Node& v = entry.second;
        if (key == "builtin") continue;
        if (key == "name") s.name = v.as<std::string>();
        else if (key == "n") s.n = v.as<Index>();
        else if (key == "p") s.p = parse_size_rule(v.as<std::string>());
        else if (key == "k") s.k = parse_size_rule(v.as<std::string>());
        else if (key == "effect") s.effect = parse_effect_rule(v.as<std::string>());
        else if (key == "design") {
            const bool scale = s.design.scale_rows;
            s.design = parse_design(v.as<std::string>());
            s.design.scale_rows = scale;
        }
        else if (key == "scale_rows") s.design.scale_rows = v.as<bool>();
        else if (key == "noise_sd") s.noise_sd = v.as<double>();
        else if (key == "replicates") s.replicates = v.as<int>();
        else if (key == "seed") s.seed = v.as<std::uint64_t>();
        else if (key == "methods") {
            s.methods.clear();
            if (v.IsSequence())
                for (const auto& m : v) s.methods.push_back(m.as<std::string>());
            else
                s.methods.push_back(v.as<std::string>());
        }
        else throw Error(ErrorCode::invalid_argument, "unknown scenario key '" + key + "'");
    }
    s.validate();
    return s;
}

} // namespace

std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& path)
{
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAllFromFile(path.string());
    } catch (const YAML::BadFile&) {
        throw Error(ErrorCode::io, "cannot read " + path.string());
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
    }
    std::vector<ScenarioSpec> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].IsNull()) continue;
        if (docs[i].IsSequence()) {
            for (const auto& item : docs[i]) out.push_back(from_node(item, static_cast<int>(out.size())));
        } else {
            try {
                out.push_back(from_node(docs[i], static_cast<int>(out.size())));
            } catch (const YAML::Exception& e) {
                throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
            }
        }
    }
    if (out.empty()) throw Error(ErrorCode::invalid_argument, path.string() + " holds no scenarios");
    return out;
}

} // namespace fdrsel
