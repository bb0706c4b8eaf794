#include "satenq/serialize.hpp"

#include "satenq/errors.hpp"

namespace satenq {

using nlohmann::json;

namespace {

const char* activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw IoError("unknown activation: " + s);
}

}  // namespace

json mlp_to_json(const MlpParams& p) {
    json j;
    j["schema_version"] = 1;
    j["layer_sizes"] = p.layer_sizes;
    json acts = json::array();
    for (auto a : p.activations) acts.push_back(activation_name(a));
    j["activations"] = acts;
    j["weights"] = p.weights;  // row-major per layer
    j["biases"] = p.biases;
    return j;
}

MlpParams mlp_from_json(const json& j) {
    if (!j.contains("layer_sizes")) throw IoError("mlp checkpoint: missing layer_sizes");
    MlpParams p;
    p.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    p.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    p.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    for (const auto& a : j.at("activations")) p.activations.push_back(activation_from_name(a.get<std::string>()));
    const auto n_layers = p.layer_sizes.size() - 1;
    if (p.weights.size() != n_layers || p.biases.size() != n_layers ||
        p.activations.size() != n_layers)
        throw IoError("mlp checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto expect_w =
            static_cast<std::size_t>(p.layer_sizes[l]) * static_cast<std::size_t>(p.layer_sizes[l + 1]);
        if (p.weights[l].size() != expect_w ||
            p.biases[l].size() != static_cast<std::size_t>(p.layer_sizes[l + 1]))
            throw IoError("mlp checkpoint: weight/bias shape mismatch");
    }
    return p;
}

json adam_to_json(const AdamState& s) {
    json j;
    j["lr"] = s.cfg.lr;
    j["beta1"] = s.cfg.beta1;
    j["beta2"] = s.cfg.beta2;
    j["eps"] = s.cfg.eps;
    j["step"] = s.step;
    j["m_weights"] = s.m.weights;
    j["m_biases"] = s.m.biases;
    j["v_weights"] = s.v.weights;
    j["v_biases"] = s.v.biases;
    return j;
}

AdamState adam_from_json(const json& j, const MlpParams& shaped_like) {
    AdamState s = make_adam(shaped_like);
    s.cfg.lr = j.at("lr").get<double>();
    s.cfg.beta1 = j.at("beta1").get<double>();
    s.cfg.beta2 = j.at("beta2").get<double>();
    s.cfg.eps = j.at("eps").get<double>();
    s.step = j.at("step").get<long long>();
    auto load = [&](const char* key, const std::vector<std::vector<double>>& want) {
        auto v = j.at(key).get<std::vector<std::vector<double>>>();
        if (v.size() != want.size()) throw ShapeError("adam checkpoint: layer count mismatch");
        for (std::size_t l = 0; l < v.size(); ++l)
            if (v[l].size() != want[l].size())
                throw ShapeError("adam checkpoint: moment shape mismatch");
        return v;
    };
    s.m.weights = load("m_weights", s.m.weights);
    s.m.biases = load("m_biases", s.m.biases);
    s.v.weights = load("v_weights", s.v.weights);
    s.v.biases = load("v_biases", s.v.biases);
    return s;
}

json transition_to_json(const Transition& t) {
    json j;
    j["state"] = t.state;
    j["next_state"] = t.next_state;
    j["action"] = t.action;
    j["reward"] = t.reward;
    j["done"] = t.done;
    return j;
}

Transition transition_from_json(const json& j) {
    Transition t;
    t.state = j.at("state").get<std::vector<double>>();
    t.next_state = j.at("next_state").get<std::vector<double>>();
    t.action = j.at("action").get<int>();
    t.reward = j.at("reward").get<double>();
    t.done = j.at("done").get<bool>();
    return t;
}

json buffer_to_json(const ReplayBuffer& b) {
    json arr = json::array();
    for (std::size_t i = 0; i < b.size(); ++i) arr.push_back(transition_to_json(b.at(i)));
    return arr;
}

}  // namespace satenq
