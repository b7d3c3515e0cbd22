#include "mctl/state.hpp"

#include "mctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mctl {

std::optional<Variant> parse_variant(const std::string& text) {
    if (text == "mctl")
        return Variant::Mctl;
    if (text == "mctl-s" || text == "mctl_s")
        return Variant::MctlS;
    return std::nullopt;
}

std::string to_string(Variant variant) {
    return variant == Variant::Mctl ? "mctl" : "mctl-s";
}

std::string Ablation::label() const {
    if (!any())
        return "full";
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on)
            return;
        out += out.empty() ? "drop-" : "+drop-";
        out += name;
    };
    add(drop_lgdm, "lgdm");
    add(drop_ggdm, "ggdm");
    add(drop_lrc, "lrc");
    return out;
}

std::optional<Ablation> parse_ablation(const std::string& text) {
    Ablation out;
    if (text.empty() || text == "none" || text == "full")
        return out;
    std::string list = text;
    std::replace(list.begin(), list.end(), '+', ',');
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.rfind("drop-", 0) == 0)
            item.erase(0, 5);
        if (item == "lgdm")
            out.drop_lgdm = true;
        else if (item == "ggdm")
            out.drop_ggdm = true;
        else if (item == "lrc")
            out.drop_lrc = true;
        else
            return std::nullopt;
    }
    return out;
}

void MctlConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok)
            throw ConfigError(msg);
    };
    require(tau >= 0.0 && std::isfinite(tau), "tau must be finite and >= 0");
    require(lambda1 >= 0.0 && std::isfinite(lambda1), "lambda1 must be finite and >= 0");
    require(k_neighbors >= 1, "k must be >= 1");
    require(!subspace_dim || *subspace_dim >= 1, "subspace dimension must be >= 1");
    kernel.validate();
    require(step_alpha > 0.0 && std::isfinite(step_alpha), "step size alpha must be > 0");
    require(inner_z_steps >= 1, "inner_z_steps must be >= 1");
    require(mu0 > 0.0 && std::isfinite(mu0), "mu0 must be > 0");
    require(mu_max >= mu0, "mu_max must be >= mu0");
    require(mu_growth > 1.0 && std::isfinite(mu_growth), "mu_growth must be > 1");
    require(max_outer_iters >= 0, "max_outer_iters must be >= 0");
    require(tol_rel > 0.0, "tol_rel must be > 0");
    require(!eig_ridge || (*eig_ridge >= 0.0 && std::isfinite(*eig_ridge)), "eig ridge must be >= 0");
}

Index MctlConfig::resolve_dim(Index n) const {
    const Index d = subspace_dim ? *subspace_dim : n;
    if (d < 1 || d > n)
        throw ConfigError("subspace dimension " + std::to_string(d) + " outside [1, " +
                          std::to_string(n) + "]");
    return d;
}

double MctlConfig::resolve_ridge(const Matrix& K) const {
    if (eig_ridge)
        return *eig_ridge;
    return K.rows() > 0 ? 1e-6 * K.trace() / static_cast<double>(K.rows()) : 0.0;
}

} // namespace mctl
