#include "cfcal/cf_models.hpp"

#include <algorithm>
#include <cmath>

namespace cfcal {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Linear: return "linear";
        case ModelKind::FVD: return "fvd";
        case ModelKind::IDM: return "idm";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear") return ModelKind::Linear;
    if (s == "fvd") return ModelKind::FVD;
    if (s == "idm") return ModelKind::IDM;
    throw std::runtime_error("unknown model kind '" + s + "' (expected linear|fvd|idm)");
}

const CFParams& ModelSpec::for_class(VehicleClass c) const {
    auto it = params.find(c);
    if (it == params.end())
        throw std::runtime_error("model spec lacks parameters for class " + to_string(c));
    return it->second;
}

ModelSpec ModelSpec::from_config(const Config& cfg, const std::string& model,
                                 const std::string& method) {
    ModelSpec spec;
    spec.kind = model_kind_from_string(model);
    for (VehicleClass c : {VehicleClass::Small, VehicleClass::Large}) {
        std::string section = model + " " + to_string(c);
        if (!method.empty()) section += " " + method;
        const auto& kv = cfg.section(section);
        auto need = [&](const char* key) {
            auto it = kv.find(key);
            if (it == kv.end())
                throw std::runtime_error("missing key '" + std::string(key) + "' in [" + section + "]");
            return std::stod(it->second);
        };
        switch (spec.kind) {
            case ModelKind::Linear:
                spec.params[c] = LinearParams{need("k1"), need("k2"), need("k3")};
                break;
            case ModelKind::FVD:
                spec.params[c] = FVDParams{need("k"), need("lambda"), need("V0"), need("b"),
                                           need("beta")};
                break;
            case ModelKind::IDM:
                spec.params[c] = IDMParams{need("v_f"), need("a_max"), need("b_comf"), need("S0"),
                                           need("t0")};
                break;
        }
    }
    return spec;
}

double linear_accel(const CFState& s, const LinearParams& p) {
    const double dx_signed = -s.gap;  // ego - leader
    return p.k1 * dx_signed + p.k2 * s.dv + p.k3;
}

double optimal_velocity(double gap, double leader_length, const FVDParams& p) {
    return 0.5 * p.V0 * (std::tanh((gap - leader_length) / p.b - p.beta) - std::tanh(-p.beta));
}

double fvd_accel(const CFState& s, const FVDParams& p) {
    return p.k * (optimal_velocity(s.gap, s.leader_length, p) - s.v_ego) + p.lambda * s.dv;
}

double idm_desired_gap(double v, double dv, const IDMParams& p) {
    // protected sqrt survives degenerate optimizer probes at a_max -> 0
    const double denom = 2.0 * std::sqrt(std::max(p.a_max * p.b_comf, 1e-12));
    return p.S0 + p.t0 * v - v * dv / denom;
}

double idm_accel(const CFState& s, const IDMParams& p) {
    if (s.gap <= 0.0) throw std::domain_error("idm_accel: non-positive gap");
    const double free_term = std::pow(s.v_ego / p.v_f, 4);
    const double sdes = idm_desired_gap(s.v_ego, s.dv, p);
    const double interaction = sdes / s.gap;
    return p.a_max * (1.0 - free_term - interaction * interaction);
}

double cf_accel(const CFState& s, const CFParams& p) {
    return std::visit(
        [&s](const auto& pp) -> double {
            using T = std::decay_t<decltype(pp)>;
            if constexpr (std::is_same_v<T, LinearParams>) return linear_accel(s, pp);
            if constexpr (std::is_same_v<T, FVDParams>) return fvd_accel(s, pp);
            if constexpr (std::is_same_v<T, IDMParams>) return idm_accel(s, pp);
        },
        p);
}

std::vector<double> to_vector(const CFParams& p) {
    return std::visit(
        [](const auto& pp) -> std::vector<double> {
            using T = std::decay_t<decltype(pp)>;
            if constexpr (std::is_same_v<T, LinearParams>) return {pp.k1, pp.k2, pp.k3};
            if constexpr (std::is_same_v<T, FVDParams>)
                return {pp.k, pp.lambda, pp.V0, pp.b, pp.beta};
            if constexpr (std::is_same_v<T, IDMParams>)
                return {pp.v_f, pp.a_max, pp.b_comf, pp.S0, pp.t0};
        },
        p);
}

CFParams from_vector(ModelKind kind, const std::vector<double>& v) {
    if (v.size() != param_count(kind))
        throw std::runtime_error("parameter vector size mismatch for model " + to_string(kind));
    switch (kind) {
        case ModelKind::Linear: return LinearParams{v[0], v[1], v[2]};
        case ModelKind::FVD: return FVDParams{v[0], v[1], v[2], v[3], v[4]};
        case ModelKind::IDM: return IDMParams{v[0], v[1], v[2], v[3], v[4]};
    }
    throw std::logic_error("unreachable");
}

std::size_t param_count(ModelKind kind) {
    return kind == ModelKind::Linear ? 3 : 5;
}

std::vector<std::string> param_names(ModelKind kind) {
    switch (kind) {
        case ModelKind::Linear: return {"k1", "k2", "k3"};
        case ModelKind::FVD: return {"k", "lambda", "V0", "b", "beta"};
        case ModelKind::IDM: return {"v_f", "a_max", "b_comf", "S0", "t0"};
    }
    return {};
}

}  // namespace cfcal
