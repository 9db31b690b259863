#include "homotrack/vomp.hpp"

#include "homotrack/errors.hpp"

#include <algorithm>
#include <set>

namespace homotrack {

double HomotopicBelief::prob(const HWord& h) const {
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i] == h) return probabilities[i];
    }
    return 0.0;
}

bool HomotopicBelief::is_point_mass(double tol) const {
    int nonzero = 0;
    for (double p : probabilities) {
        if (p > tol) ++nonzero;
    }
    return nonzero == 1;
}

double HomotopicBelief::total() const {
    double s = 0.0;
    for (double p : probabilities) s += p;
    return s;
}

VompModel VompModel::fit(const std::vector<HWord>& words, const VompConfig& config) {
    std::map<HWord, double> mult;
    for (const auto& w : words) mult[w] += 1.0;
    return fit(std::vector<std::pair<HWord, double>>(mult.begin(), mult.end()), config);
}

VompModel VompModel::fit(const std::vector<std::pair<HWord, double>>& corpus, const VompConfig& config) {
    if (corpus.empty()) throw Error("VOMP corpus is empty");
    if (config.max_order < 0 || config.alpha < 0.0) throw ConfigError("VOMP order and alpha must be non-negative");

    VompModel m;
    m.config_ = config;
    std::map<HWord, double> support;
    std::set<int> alphabet{kTerminal};
    for (const auto& [word, count] : corpus) {
        if (count <= 0.0) continue;
        support[word] += count;
        std::vector<int> seq = word.letters;
        seq.push_back(kTerminal);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            alphabet.insert(seq[i]);
            const std::size_t max_k = std::min<std::size_t>(config.max_order, i);
            for (std::size_t k = 0; k <= max_k; ++k) {
                std::vector<int> ctx(seq.begin() + static_cast<long>(i - k), seq.begin() + static_cast<long>(i));
                if (k == i) ctx.insert(ctx.begin(), kStart);
                m.counts_[ctx][seq[i]] += count;
            }
        }
    }
    if (support.empty()) throw Error("VOMP corpus has no positive multiplicities");
    m.alphabet_.assign(alphabet.begin(), alphabet.end());
    m.support_.assign(support.begin(), support.end());
    return m;
}

double VompModel::conditional(const std::vector<int>& history, int letter) const {
    const std::size_t k = std::min<std::size_t>(config_.max_order, history.size());
    std::vector<int> ctx(history.end() - static_cast<long>(k), history.end());
    if (k == history.size()) ctx.insert(ctx.begin(), kStart);
    const double alpha = config_.alpha;
    const double n_symbols = static_cast<double>(alphabet_.size());
    double n_ctx = 0.0;
    double n_letter = 0.0;
    if (auto it = counts_.find(ctx); it != counts_.end()) {
        for (const auto& [sym, c] : it->second) n_ctx += c;
        if (auto jt = it->second.find(letter); jt != it->second.end()) n_letter = jt->second;
    }
    const double denom = n_ctx + alpha * n_symbols;
    if (denom <= 0.0) return 0.0;
    return (n_letter + alpha) / denom;
}

double VompModel::sequence_prob(const HWord& w) const {
    const bool in_support = std::any_of(support_.begin(), support_.end(),
                                        [&](const auto& s) { return s.first == w; });
    if (!in_support) return 0.0;
    std::vector<int> history;
    history.reserve(w.size());
    double p = 1.0;
    for (int l : w.letters) {
        p *= conditional(history, l);
        history.push_back(l);
    }
    return p * conditional(history, kTerminal);
}

nlohmann::json VompModel::to_json() const {
    nlohmann::json j;
    j["max_order"] = config_.max_order;
    j["alpha"] = config_.alpha;
    j["alphabet"] = alphabet_;
    j["contexts"] = nlohmann::json::array();
    for (const auto& [ctx, next] : counts_) {
        nlohmann::json c;
        c["context"] = ctx;
        c["counts"] = nlohmann::json::array();
        for (const auto& [sym, n] : next) c["counts"].push_back({sym, n});
        j["contexts"].push_back(c);
    }
    j["support"] = nlohmann::json::array();
    for (const auto& [word, n] : support_) j["support"].push_back({{"word", word.str()}, {"count", n}});
    return j;
}

VompModel VompModel::from_json(const nlohmann::json& j) {
    VompModel m;
    m.config_.max_order = j.at("max_order").get<int>();
    m.config_.alpha = j.at("alpha").get<double>();
    m.alphabet_ = j.at("alphabet").get<std::vector<int>>();
    for (const auto& c : j.at("contexts")) {
        auto& next = m.counts_[c.at("context").get<std::vector<int>>()];
        for (const auto& pair : c.at("counts")) next[pair[0].get<int>()] = pair[1].get<double>();
    }
    for (const auto& s : j.at("support")) {
        m.support_.emplace_back(HWord::parse(s.at("word").get<std::string>()), s.at("count").get<double>());
    }
    return m;
}

namespace {

HomotopicBelief normalized(HomotopicBelief b) {
    const double total = b.total();
    if (total <= 0.0) return {};
    for (double& p : b.probabilities) p /= total;
    return b;
}

} // namespace

HomotopicBelief homotopic_belief(const VompModel& model, const HWord& partial) {
    HomotopicBelief b;
    for (const auto& [word, count] : model.support()) {
        if (is_compatible(word, partial)) {
            b.support.push_back(word);
            b.probabilities.push_back(model.sequence_prob(word));
        }
    }
    b = normalized(std::move(b));
    if (!b.support.empty()) return b;

    for (const auto& [word, count] : model.support()) {
        b.support.push_back(word);
        b.probabilities.push_back(model.sequence_prob(word));
    }
    return normalized(std::move(b));
}

HomotopicBelief restrict_belief(const HomotopicBelief& belief, const HWord& partial) {
    HomotopicBelief b;
    for (std::size_t i = 0; i < belief.support.size(); ++i) {
        if (belief.probabilities[i] > 0.0 && is_compatible(belief.support[i], partial)) {
            b.support.push_back(belief.support[i]);
            b.probabilities.push_back(belief.probabilities[i]);
        }
    }
    return normalized(std::move(b));
}

} // namespace homotrack
