#include "samn/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace samn {

namespace {

using nlohmann::json;

json to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

json to_json(const std::vector<Matrix>& ms) {
    json arr = json::array();
    for (const Matrix& m : ms) arr.push_back(to_json(m));
    return arr;
}

std::vector<Matrix> matrices_from(const json& j) {
    std::vector<Matrix> out;
    for (const json& m : j) out.push_back(matrix_from(m));
    return out;
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid checkpoint: " + e.what());
    }
    return j;
}

void write_file(const std::string& path, const json& j) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write " + tmp);
        out << j.dump(1) << '\n';
        if (!out) throw DataError("failed writing " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw DataError("cannot move " + tmp + " to " + path);
    }
}

json standardization_to_json(const StandardizationParams& p) {
    return json{{"mean", p.mean}, {"stddev", p.stddev}};
}

StandardizationParams standardization_from(const json& j) {
    StandardizationParams p;
    p.mean = j.at("mean").get<std::vector<double>>();
    p.stddev = j.at("stddev").get<std::vector<double>>();
    return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const SamnCheckpoint& ckpt) {
    json j;
    j["format"] = "samn-checkpoint";
    j["version"] = 1;
    j["kind"] = "samn";
    j["dataset"] = ckpt.dataset;
    j["label_names"] = ckpt.label_names;
    j["config"] = {
        {"total_layers", ckpt.config.total_layers},
        {"pre_attention_layers", ckpt.config.pre_attention_layers},
        {"blocknum", ckpt.config.blocknum},
        {"hidden_width", ckpt.config.hidden_width},
        {"activation", to_string(ckpt.config.activation)},
        {"variant", to_string(ckpt.config.variant)},
        {"learned_projections", ckpt.config.learned_projections},
        {"eps", ckpt.config.eps},
    };
    j["params"] = {
        {"weights", to_json(ckpt.params.weights)},
        {"biases", to_json(ckpt.params.biases)},
        {"w_hidden", to_json(ckpt.params.w_hidden)},
        {"b_hidden", to_json(ckpt.params.b_hidden)},
        {"w_input", to_json(ckpt.params.w_input)},
        {"b_input", to_json(ckpt.params.b_input)},
        {"w_output", to_json(ckpt.params.w_output)},
        {"b_output", to_json(ckpt.params.b_output)},
        {"w_query", to_json(ckpt.params.w_query)},
        {"w_key", to_json(ckpt.params.w_key)},
        {"w_value", to_json(ckpt.params.w_value)},
    };
    j["state"] = {
        {"hidden", to_json(ckpt.state.hidden)},
        {"prototype", to_json(ckpt.state.prototype)},
        {"seen", ckpt.state.seen},
        {"last_update", ckpt.state.last_update},
        {"batches_seen", ckpt.state.batches_seen},
    };
    j["standardization"] = standardization_to_json(ckpt.standardization);
    write_file(path, j);
}

SamnCheckpoint load_samn_checkpoint(const std::string& path) {
    const json j = load_file(path);
    try {
        if (j.at("kind") != "samn") {
            throw DataError(path + ": not a samn checkpoint");
        }
        SamnCheckpoint ckpt;
        ckpt.dataset = j.value("dataset", "");
        ckpt.label_names = j.at("label_names").get<std::vector<std::string>>();
        const json& c = j.at("config");
        ckpt.config.total_layers = c.at("total_layers").get<int>();
        ckpt.config.pre_attention_layers = c.at("pre_attention_layers").get<int>();
        ckpt.config.blocknum = c.at("blocknum").get<int>();
        ckpt.config.hidden_width = c.at("hidden_width").get<std::size_t>();
        ckpt.config.activation =
            activation_from_string(c.at("activation").get<std::string>());
        ckpt.config.variant =
            variant_from_string(c.at("variant").get<std::string>());
        ckpt.config.learned_projections = c.at("learned_projections").get<bool>();
        ckpt.config.eps = c.at("eps").get<double>();
        const json& p = j.at("params");
        ckpt.params.weights = matrices_from(p.at("weights"));
        ckpt.params.biases = matrices_from(p.at("biases"));
        ckpt.params.w_hidden = matrix_from(p.at("w_hidden"));
        ckpt.params.b_hidden = matrix_from(p.at("b_hidden"));
        ckpt.params.w_input = matrix_from(p.at("w_input"));
        ckpt.params.b_input = matrix_from(p.at("b_input"));
        ckpt.params.w_output = matrix_from(p.at("w_output"));
        ckpt.params.b_output = matrix_from(p.at("b_output"));
        ckpt.params.w_query = matrices_from(p.at("w_query"));
        ckpt.params.w_key = matrices_from(p.at("w_key"));
        ckpt.params.w_value = matrices_from(p.at("w_value"));
        const json& s = j.at("state");
        ckpt.state.hidden = matrices_from(s.at("hidden"));
        ckpt.state.prototype = matrices_from(s.at("prototype"));
        ckpt.state.seen = s.at("seen").get<std::vector<bool>>();
        ckpt.state.last_update = s.at("last_update").get<std::vector<long>>();
        ckpt.state.batches_seen = s.at("batches_seen").get<long>();
        ckpt.standardization = standardization_from(j.at("standardization"));
        return ckpt;
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid checkpoint: " + e.what());
    }
}

void save_checkpoint(const std::string& path, const SvmCheckpoint& ckpt) {
    json j;
    j["format"] = "samn-checkpoint";
    j["version"] = 1;
    j["kind"] = "svm";
    j["dataset"] = ckpt.dataset;
    j["label_names"] = ckpt.label_names;
    j["model"] = {
        {"kernel", ckpt.model.kernel.kind == KernelKind::Rbf ? "rbf" : "linear"},
        {"gamma", ckpt.model.kernel.gamma},
        {"c_box", ckpt.model.c_box},
        {"bias", ckpt.model.bias},
        {"support_vectors", to_json(ckpt.model.support_vectors)},
        {"alpha", ckpt.model.alpha},
        {"sv_labels", ckpt.model.sv_labels},
    };
    j["standardization"] = standardization_to_json(ckpt.standardization);
    write_file(path, j);
}

SvmCheckpoint load_svm_checkpoint(const std::string& path) {
    const json j = load_file(path);
    try {
        if (j.at("kind") != "svm") {
            throw DataError(path + ": not an svm checkpoint");
        }
        SvmCheckpoint ckpt;
        ckpt.dataset = j.value("dataset", "");
        ckpt.label_names = j.at("label_names").get<std::vector<std::string>>();
        const json& m = j.at("model");
        ckpt.model.kernel.kind = m.at("kernel").get<std::string>() == "rbf"
                                     ? KernelKind::Rbf
                                     : KernelKind::Linear;
        ckpt.model.kernel.gamma = m.at("gamma").get<double>();
        ckpt.model.c_box = m.at("c_box").get<double>();
        ckpt.model.bias = m.at("bias").get<double>();
        ckpt.model.support_vectors = matrix_from(m.at("support_vectors"));
        ckpt.model.alpha = m.at("alpha").get<std::vector<double>>();
        ckpt.model.sv_labels = m.at("sv_labels").get<std::vector<double>>();
        ckpt.standardization = standardization_from(j.at("standardization"));
        return ckpt;
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid checkpoint: " + e.what());
    }
}

std::string checkpoint_kind(const std::string& path) {
    const json j = load_file(path);
    if (!j.contains("kind")) throw DataError(path + ": missing checkpoint kind");
    return j.at("kind").get<std::string>();
}

}  // namespace samn
