#include "semiwig/serialize.hpp"

namespace semiwig {

classical::Potential potential_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.value("dimension", 1);
    if (kind == "isotropic") return classical::Potential::isotropic(dim);
    if (kind == "anisotropic")
        return classical::Potential::anisotropic(j.at("omega").get<std::vector<double>>());
    if (kind == "cosine_perturbed")
        return classical::Potential::cosine_perturbed(dim, j.at("lambda").get<double>());
    if (kind == "user_polynomial_bounded") {
        std::vector<std::array<double, 3>> coeffs;
        for (const auto& row : j.at("coefficients")) {
            const auto v = row.get<std::vector<double>>();
            if (v.size() > 3)
                throw input_error("potential: polynomial degree above 2 has an unbounded "
                                  "Hessian and is rejected");
            std::array<double, 3> c{0.0, 0.0, 0.0};
            for (size_t i = 0; i < v.size(); ++i) c[i] = v[i];
            coeffs.push_back(c);
        }
        return classical::Potential::polynomial_bounded(coeffs);
    }
    throw input_error("potential: unknown kind '" + kind + "'");
}

nlohmann::ordered_json potential_to_json(const classical::Potential& pot,
                                         const nlohmann::json& original_spec) {
    nlohmann::ordered_json j = original_spec;
    j["description"] = pot.describe();
    return j;
}

airy::Convention convention_from_json(const nlohmann::json& j) {
    airy::Convention c;
    c.id = j.value("id", c.id);
    c.kappa = j.value("kappa", c.kappa);
    c.calibrated = j.value("calibrated", c.calibrated);
    c.airy_arg_max = j.value("airy_arg_max", c.airy_arg_max);
    c.fold_fit_threshold = j.value("fold_fit_threshold", c.fold_fit_threshold);
    return c;
}

nlohmann::ordered_json convention_to_json(const airy::Convention& conv) {
    nlohmann::ordered_json j;
    j["id"] = conv.id;
    j["kappa"] = conv.kappa;
    j["calibrated"] = conv.calibrated;
    j["airy_arg_max"] = conv.airy_arg_max;
    j["fold_fit_threshold"] = conv.fold_fit_threshold;
    j["rho_source"] = "cfu-critical-values-3/4-gap";
    j["u00_placement"] = "|dt/dE|^{1/2} |det(1+M)|^{-1/2}";
    return j;
}

}  // namespace semiwig
