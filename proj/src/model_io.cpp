#include "homotrack/model_io.hpp"

#include "homotrack/errors.hpp"

#include <fstream>

namespace homotrack {

nlohmann::json gmm_to_json(const HomotopicGmm& gmm) {
    nlohmann::json j;
    j["horizon"] = gmm.horizon;
    j["components"] = nlohmann::json::array();
    for (const auto& c : gmm.components) {
        const auto n = c.mean.size();
        std::vector<double> mean(c.mean.data(), c.mean.data() + n);
        std::vector<double> cov;
        cov.reserve(static_cast<std::size_t>(n * n));
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index k = 0; k < n; ++k) cov.push_back(c.cov(r, k));
        j["components"].push_back({{"class", c.label.signature.str()},
                                   {"submode", c.label.submode},
                                   {"weight", c.weight},
                                   {"mean", mean},
                                   {"cov", cov}});
    }
    return j;
}

HomotopicGmm gmm_from_json(const nlohmann::json& j) {
    HomotopicGmm gmm;
    gmm.horizon = j.at("horizon").get<int>();
    const Eigen::Index n = 2 * gmm.horizon;
    for (const auto& c : j.at("components")) {
        GmmComponent comp;
        comp.label = {HWord::parse(c.at("class").get<std::string>()), c.at("submode").get<int>()};
        comp.weight = c.at("weight").get<double>();
        const auto mean = c.at("mean").get<std::vector<double>>();
        const auto cov = c.at("cov").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(mean.size()) != n || static_cast<Eigen::Index>(cov.size()) != n * n) {
            throw Error("component dimensions do not match the horizon");
        }
        comp.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
        comp.cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            cov.data(), n, n);
        gmm.components.push_back(std::move(comp));
    }
    return gmm;
}

void save_model(const SavedModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["fit"] = {{"components_per_class", model.fit.components_per_class},
                {"jitter", model.fit.jitter},
                {"seed", model.fit.seed}};
    j["target_speed"] = model.target_speed;
    j["gmm"] = gmm_to_json(model.gmm);
    j["vomp"] = model.vomp.to_json();
    write_json(j, path);
}

SavedModel load_model(const std::filesystem::path& path) {
    const nlohmann::json j = read_json(path);
    SavedModel m;
    try {
        m.fit.components_per_class = j.at("fit").at("components_per_class").get<int>();
        m.fit.jitter = j.at("fit").at("jitter").get<double>();
        m.fit.seed = j.at("fit").at("seed").get<std::uint64_t>();
        m.target_speed = j.at("target_speed").get<double>();
        m.gmm = gmm_from_json(j.at("gmm"));
        m.vomp = VompModel::from_json(j.at("vomp"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return m;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

} // namespace homotrack
