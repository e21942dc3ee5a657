#include "odernn/checkpoint.hpp"

#include <fstream>

namespace odernn {

using nlohmann::json;

json checkpoint_to_json(const Model& model, const json& run_config, double final_loss) {
    json j;
    j["format_version"] = kCheckpointVersion;
    j["model"] = model_kind_name(model.kind);
    j["d_obs"] = model.d_obs();
    j["d_h"] = model.d_h();
    j["field_variant"] = gru_variant_name(model.variant);
    j["peepholes"] =
        is_lstm(model.kind) ? std::get<LstmParams>(model.params).peepholes : false;
    j["final_loss"] = final_loss;
    j["config"] = run_config;
    json params = json::object();
    for (const auto& [name, t] : model.named_params()) {
        params[name] = {{"shape", t->shape}, {"data", t->data}};
    }
    j["params"] = params;
    return j;
}

void save_checkpoint(const Model& model, const json& run_config, double final_loss,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << checkpoint_to_json(model, run_config, final_loss).dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    if (j.value("format_version", -1) != kCheckpointVersion) {
        throw FormatError(path + ": unsupported checkpoint version");
    }
    LoadedCheckpoint out;
    const ModelKind kind = parse_model_kind(j.at("model").get<std::string>());
    const auto d_obs = j.at("d_obs").get<std::int64_t>();
    const auto d_h = j.at("d_h").get<std::int64_t>();
    const bool peepholes = j.value("peepholes", false);
    out.model = make_model(kind, d_obs, d_h, 0,
                           parse_gru_variant(j.at("field_variant").get<std::string>()), peepholes);
    out.final_loss = j.value("final_loss", 0.0);
    out.run_config = j.value("config", json::object());
    const json& params = j.at("params");
    for (auto& [name, t] : out.model.named_params()) {
        if (!params.contains(name)) throw FormatError(path + ": missing parameter " + name);
        const json& pj = params.at(name);
        Tensor loaded(pj.at("shape").get<std::vector<std::int64_t>>(),
                      pj.at("data").get<std::vector<double>>());
        if (!loaded.same_shape(*t)) {
            throw FormatError(path + ": shape mismatch for parameter " + name);
        }
        *t = std::move(loaded);
    }
    return out;
}

}  // namespace odernn
