#include "homotrack/info_gain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace homotrack {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Gauss-Legendre half-rules (6, 12 and 20 points) for the Genz bivariate normal.
constexpr std::array<std::array<double, 10>, 3> kW = {{
    {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
    {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659, 0.2334925365383547,
     0.2491470458134029},
    {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475, 0.1019301198172404,
     0.1181945319615184, 0.1316886384491766, 0.1420961093183821, 0.1491729864726037, 0.1527533871307259},
}};
constexpr std::array<std::array<double, 10>, 3> kX = {{
    {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
    {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050, -0.5873179542866171, -0.3678314989981802,
     -0.1252334085114692},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188, -0.7463319064601508,
     -0.6360536807265150, -0.5108670019508271, -0.3737060887154196, -0.2277858511416451, -0.07652652113349733},
}};

} // namespace

double bivariate_normal_upper(double h, double k, double r) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    int ng = 2;
    int lg = 10;
    if (std::abs(r) < 0.3) {
        ng = 0;
        lg = 3;
    } else if (std::abs(r) < 0.75) {
        ng = 1;
        lg = 6;
    }
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (int i = 0; i < lg; ++i) {
            double sn = std::sin(asr * (kX[ng][i] + 1.0) / 2.0);
            bvn += kW[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (-kX[ng][i] + 1.0) / 2.0);
            bvn += kW[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * two_pi) + normal_cdf(-h) * normal_cdf(-k);
    }
    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-(bs / as + hk) / 2.0) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * normal_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (int i = 0; i < lg; ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double xs = std::pow(a * (sgn * kX[ng][i] + 1.0), 2);
                const double rs = std::sqrt(1.0 - xs);
                bvn += a * kW[ng][i] *
                       (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
                        std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / two_pi;
    }
    if (r > 0.0) return bvn + normal_cdf(-std::max(h, k));
    return -bvn + std::max(0.0, normal_cdf(-h) - normal_cdf(-k));
}

double homotopic_kl(const HomotopicBelief& b_prev, const HomotopicBelief& b_next) {
    double kl = 0.0;
    for (std::size_t i = 0; i < b_next.support.size(); ++i) {
        const double q = b_next.probabilities[i];
        if (q <= 0.0) continue;
        const double p = b_prev.prob(b_next.support[i]);
        kl += p > 0.0 ? q * std::log(q / p) : q * kKlCap;
    }
    return std::max(kl, 0.0);
}

namespace {

// N(mean, sd^2) mass on [lo, hi]; sd may be zero.
double normal_interval(double mean, double sd, double lo, double hi) {
    if (sd <= 1e-300) return (mean >= lo && mean <= hi) ? 1.0 : 0.0;
    return normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd);
}

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// E[v+ 1{lo <= a <= hi}] for a bivariate normal (v, a).
double positive_part_on_interval(double mv, double ma, double vv, double va, double cva, double lo, double hi) {
    constexpr double tiny = 1e-18;
    vv = std::max(vv, tiny);
    va = std::max(va, tiny);
    const double sv = std::sqrt(vv), sa = std::sqrt(va);
    const double r = std::clamp(cva / (sv * sa), -1.0, 1.0);
    const double upper_lo = bivariate_normal_upper(-mv / sv, (lo - ma) / sa, r);
    const double upper_hi = bivariate_normal_upper(-mv / sv, (hi - ma) / sa, r);
    double e = mv * (upper_lo - upper_hi);
    // Stein's lemma: the remaining terms come from the indicator edges
    const double a_given_v0_sd = std::sqrt(std::max(va - cva * cva / vv, 0.0));
    e += vv * normal_pdf(0.0, mv, sv) * normal_interval(ma - cva / vv * mv, a_given_v0_sd, lo, hi);
    const double v_given_a_sd = std::sqrt(std::max(vv - cva * cva / va, 0.0));
    auto v_pos = [&](double a) { return normal_interval(mv + cva / va * (a - ma), v_given_a_sd, 0.0, HUGE_VAL); };
    e += cva * (normal_pdf(lo, ma, sa) * v_pos(lo) - normal_pdf(hi, ma, sa) * v_pos(hi));
    return std::max(e, 0.0);
}

constexpr std::array<double, 4> kGlX = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                        0.9602898564975363};
constexpr std::array<double, 4> kGlW = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                        0.1012285362903763};

} // namespace

CrossingProb crossing_prob(const GmmComponent& comp, const Ray& ray, int t) {
    const int T = comp.horizon();
    if (t < 0 || t + 1 >= T) throw std::out_of_range("crossing_prob needs 0 <= t < T - 1");

    const Point dir = ray.direction();
    const Point normal(-dir.y(), dir.x()); // signed distance = normal . (p - origin)
    const Eigen::Vector4d mean = comp.mean.segment<4>(2 * t);
    const Eigen::Matrix4d S = comp.cov.block<4, 4>(2 * t, 2 * t);
    const double m0 = normal.dot(comp.mean_at(t) - ray.origin);
    const double m1 = normal.dot(comp.mean_at(t + 1) - ray.origin);
    const double s0 = std::sqrt(std::max(normal.dot(S.topLeftCorner<2, 2>() * normal), 0.0));
    const double s1 = std::sqrt(std::max(normal.dot(S.bottomRightCorner<2, 2>() * normal), 0.0));
    const double smax = std::max({s0, s1, 1e-9});

    // crossing fractions where the mean signed distance is within reach of zero
    constexpr double reach = 8.0;
    double l0 = 0.0, l1 = 1.0;
    if (std::abs(m1 - m0) > 1e-12) {
        const double a = (reach * smax - m0) / (m1 - m0), b = (-reach * smax - m0) / (m1 - m0);
        l0 = std::max(0.0, std::min(a, b));
        l1 = std::min(1.0, std::max(a, b));
    } else if (std::abs(m0) > reach * smax) {
        l1 = 0.0;
    }
    CrossingProb out;
    if (l1 <= l0) return out;

    // P(cross at fraction in dl, along-ray point on the ray) = f_d(l)(0) E[|v| 1{a in [0, L]} | d(l) = 0] dl,
    // v = d(t+1) - d(t)
    Eigen::Vector4d cvv;
    cvv << -normal, normal;
    const double o_n = normal.dot(ray.origin), o_a = dir.dot(ray.origin);
    const double L = ray.length();
    auto integrand = [&](double l, double& pos, double& neg) {
        Eigen::Vector4d cd, ca;
        cd << (1 - l) * normal, l * normal;
        ca << (1 - l) * dir, l * dir;
        const double md = cd.dot(mean) - o_n, ma = ca.dot(mean) - o_a, mv = cvv.dot(mean);
        const Eigen::Vector4d Sd = S * cd;
        const double vd = cd.dot(Sd);
        if (vd <= 1e-300) {
            pos = neg = 0.0;
            return;
        }
        const double fd = normal_pdf(0.0, md, std::sqrt(vd));
        const Eigen::Vector4d Sv = S * cvv, Sa = S * ca;
        const double cvd = cvv.dot(Sd), cad = ca.dot(Sd);
        const double mv_c = mv - cvd / vd * md, ma_c = ma - cad / vd * md;
        const double vv_c = cvv.dot(Sv) - cvd * cvd / vd;
        const double va_c = ca.dot(Sa) - cad * cad / vd;
        const double cva_c = cvv.dot(Sa) - cvd * cad / vd;
        pos = fd * positive_part_on_interval(mv_c, ma_c, vv_c, va_c, cva_c, 0.0, L);
        neg = fd * positive_part_on_interval(-mv_c, ma_c, vv_c, va_c, -cva_c, 0.0, L);
    };
    constexpr int panels = 6;
    const double h = (l1 - l0) / panels;
    for (int k = 0; k < panels; ++k) {
        const double c = l0 + (k + 0.5) * h;
        for (std::size_t i = 0; i < kGlX.size(); ++i)
            for (double sgn : {-1.0, 1.0}) {
                double p, n;
                integrand(c + sgn * 0.5 * h * kGlX[i], p, n);
                out.positive += 0.5 * h * kGlW[i] * p;
                out.negative += 0.5 * h * kGlW[i] * n;
            }
    }
    out.positive = std::clamp(out.positive, 0.0, 1.0);
    out.negative = std::clamp(out.negative, 0.0, 1.0);
    return out;
}

double expected_belief_divergence(const HomotopicBelief& belief, const HWord& rho,
                                  std::span<const CrossingEvent> events) {
    const HomotopicBelief base = restrict_belief(belief, rho);
    if (base.support.empty()) return 0.0;
    double k = 0.0;
    for (const auto& e : events) {
        if (e.probability <= 0.0) continue;
        const HomotopicBelief next = restrict_belief(base, rho.extended(e.letter));
        if (next.support.empty()) continue;
        k += e.probability * homotopic_kl(base, next);
    }
    return k;
}

namespace {

detail::DetectionCache make_cache(const GmmComponent& comp, int t, const SensorModel& sensor) {
    const TimeMarginal m = marginal_at_time(comp, t);
    const double r2 = sensor.radius * sensor.radius;
    detail::DetectionCache c;
    c.mean = m.mean;
    c.cov = m.cov;
    c.spread_inv = (m.cov + r2 * Eigen::Matrix2d::Identity()).inverse();
    c.beta = sensor.peak / std::sqrt((m.cov / r2 + Eigen::Matrix2d::Identity()).determinant());
    return c;
}

} // namespace

HomotopicGainField::HomotopicGainField(const HomotopicGmm& gmm, const HomotopicBelief& belief,
                                       std::span<const Ray> rays, const SensorModel& sensor, int t_begin)
    : horizon_(gmm.horizon), t_begin_(std::max(t_begin, 0)) {
    const std::size_t C = gmm.size();
    factor_.assign(C, std::vector<double>(static_cast<std::size_t>(horizon_), 0.0));
    cache_.assign(C, std::vector<detail::DetectionCache>(static_cast<std::size_t>(horizon_)));
    active_.assign(static_cast<std::size_t>(horizon_), 0);

    for (std::size_t c = 0; c < C; ++c) {
        const auto& comp = gmm.components[c];
        HWord rho;
        for (int t = 1; t < horizon_; ++t) {
            if (t >= 2) {
                for (int l : segment_crossings(comp.mean_at(t - 2), comp.mean_at(t - 1), rays)) {
                    rho.letters.push_back(l);
                }
            }
            if (t < t_begin_) continue;

            std::vector<CrossingEvent> events;
            for (const auto& ray : rays) {
                const CrossingProb p = crossing_prob(comp, ray, t - 1);
                events.push_back({ray.letter, p.positive});
                events.push_back({-ray.letter, p.negative});
            }
            const double k = expected_belief_divergence(belief, rho, events);
            const double f = comp.weight * k;
            factor_[c][static_cast<std::size_t>(t)] = f;
            if (f > 0.0) {
                cache_[c][static_cast<std::size_t>(t)] = make_cache(comp, t, sensor);
                active_[static_cast<std::size_t>(t)] = 1;
            }
        }
    }
}

double HomotopicGainField::component_factor(std::size_t c, int t) const {
    return factor_.at(c).at(static_cast<std::size_t>(t));
}

bool HomotopicGainField::slice_active(int t) const {
    return t >= 0 && t < horizon_ && active_[static_cast<std::size_t>(t)];
}

double HomotopicGainField::operator()(const Point& x, int t) const {
    if (!slice_active(t)) return 0.0;
    const auto ti = static_cast<std::size_t>(t);
    double g = 0.0;
    for (std::size_t c = 0; c < factor_.size(); ++c) {
        const double f = factor_[c][ti];
        if (f > 0.0) g += f * cache_[c][ti].gamma(x);
    }
    return g;
}

MetricGainField::MetricGainField(const HomotopicGmm& gmm, const SensorModel& sensor, double kappa_r, int t_begin)
    : horizon_(gmm.horizon),
      t_begin_(std::max(t_begin, 0)),
      noise_var_(sensor.noise_sd * sensor.noise_sd),
      kappa_r_(kappa_r),
      weights_(gmm.weights()) {
    cache_.assign(gmm.size(), std::vector<detail::DetectionCache>(static_cast<std::size_t>(horizon_)));
    for (std::size_t c = 0; c < gmm.size(); ++c) {
        for (int t = t_begin_; t < horizon_; ++t) {
            cache_[c][static_cast<std::size_t>(t)] = make_cache(gmm.components[c], t, sensor);
        }
    }
}

double MetricGainField::operator()(const Point& x, int t) const {
    if (t < t_begin_ || t >= horizon_) return 0.0;
    const auto ti = static_cast<std::size_t>(t);
    double p_detect = 0.0;
    double info = 0.0;
    for (std::size_t c = 0; c < cache_.size(); ++c) {
        const auto& k = cache_[c][ti];
        p_detect += weights_[c] * k.gamma(x);
        const double r = noise_var_ + kappa_r_ * (x - k.mean).squaredNorm();
        const double det_sum = (k.cov(0, 0) + r) * (k.cov(1, 1) + r) - k.cov(0, 1) * k.cov(1, 0);
        info += weights_[c] * (std::log(det_sum) - 2.0 * std::log(r));
    }
    return p_detect * info;
}

double expected_homotopic_gain(const GainQuery& q) {
    const HomotopicGainField field(*q.gmm, *q.belief, q.rays, q.sensor, q.t);
    return field(q.x, q.t);
}

double metric_gain(const GainQuery& q, double kappa_r) {
    const MetricGainField field(*q.gmm, q.sensor, kappa_r, q.t);
    return field(q.x, q.t);
}

double metric_entropy_surrogate(const GainQuery& q, double kappa_r) {
    const double noise_var = q.sensor.noise_sd * q.sensor.noise_sd;
    double p_detect = 0.0;
    double h = 0.0;
    for (const auto& comp : q.gmm->components) {
        const TimeMarginal m = marginal_at_time(comp, q.t);
        p_detect += comp.weight * detection_marginal<double>(q.x, m.mean, m.cov, q.sensor.radius, q.sensor.peak);
        const double r = noise_var + kappa_r * (q.x - m.mean).squaredNorm();
        h += comp.weight * std::log((m.cov + r * Eigen::Matrix2d::Identity()).determinant());
    }
    return p_detect * h;
}

} // namespace homotrack
