#include "microdispatch/uncertainty.hpp"

#include "microdispatch/errors.hpp"
#include "microdispatch/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace microdispatch::uncertainty {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double pdf_eval(const Pdf& pdf, double x) {
    return std::visit(
        overloaded{
            [x](const Normal& n) {
                const double z = (x - n.mu) / n.sigma;
                return std::exp(-0.5 * z * z) / (n.sigma * std::sqrt(2.0 * std::numbers::pi));
            },
            [x](const Beta& b) {
                if (x < 0.0 || x > 1.0) {
                    throw OutOfSupport("Beta density evaluated outside [0, 1]");
                }
                const double norm =
                    std::exp(std::lgamma(b.alpha + b.beta) - std::lgamma(b.alpha) - std::lgamma(b.beta));
                return norm * std::pow(x, b.alpha - 1.0) * std::pow(1.0 - x, b.beta - 1.0);
            },
            [x](const Rayleigh& r) {
                if (x < 0.0) {
                    return 0.0;
                }
                const double u = x / r.c;
                return 2.0 * x / (r.c * r.c) * std::exp(-u * u);
            },
            [x](const Weibull& w) {
                if (x < 0.0) {
                    return 0.0;
                }
                const double u = x / w.scale;
                return w.shape / w.scale * std::pow(u, w.shape - 1.0) * std::exp(-std::pow(u, w.shape));
            },
        },
        pdf);
}

double cdf_eval(const Pdf& pdf, double x) {
    return std::visit(
        overloaded{
            [x](const Normal& n) { return normal_cdf((x - n.mu) / n.sigma); },
            [](const Beta&) -> double {
                throw Error("Beta CDF is not provided; integrate pdf_eval instead");
            },
            [x](const Rayleigh& r) {
                if (x <= 0.0) {
                    return 0.0;
                }
                const double u = x / r.c;
                return 1.0 - std::exp(-u * u);
            },
            [x](const Weibull& w) {
                if (x <= 0.0) {
                    return 0.0;
                }
                return 1.0 - std::exp(-std::pow(x / w.scale, w.shape));
            },
        },
        pdf);
}

BetaShape beta_params_from_moments(double mu, double sigma) {
    const double var = sigma * sigma;
    if (!(mu > 0.0 && mu < 1.0) || !(sigma > 0.0) || !(var < mu * (1.0 - mu))) {
        throw InfeasibleMoments("no Beta distribution with mean " + std::to_string(mu) +
                                " and std " + std::to_string(sigma));
    }
    const double beta = (1.0 - mu) * (mu * (1.0 - mu) / var - 1.0);
    const double alpha = mu * beta / (1.0 - mu);
    return {alpha, beta};
}

std::vector<Level> discretize_normal(double mu, double sigma, int n_levels) {
    if (n_levels < 3 || n_levels % 2 == 0) {
        throw BadLevelCount("level count must be odd and >= 3, got " + std::to_string(n_levels));
    }
    const int half = (n_levels - 1) / 2;
    std::vector<Level> out;
    out.reserve(static_cast<std::size_t>(n_levels));
    // Band edges in standard units: j - 0.5 .. j + 0.5, outermost open-ended.
    for (int j = -half; j <= half; ++j) {
        const double lo = j == -half ? 0.0 : normal_cdf(j - 0.5);
        const double hi = j == half ? 1.0 : normal_cdf(j + 0.5);
        out.push_back({mu + j * sigma, hi - lo});
    }
    return out;
}

double ScenarioSet::total_probability() const {
    double s = 0.0;
    for (const auto& sc : scenarios) {
        s += sc.probability;
    }
    return s;
}

ScenarioModel ScenarioModel::from_case(const grid::NetworkCase& c) {
    const auto& u = c.uncertainty;
    return {u.load_sigma, u.wind_model, u.weibull_shape, u.clearness_mean, u.clearness_std,
            u.price_sigma};
}

namespace {

double clearness_mean(const ScenarioModel& m, int t) {
    return m.clearness_mean.empty() ? 1.0 : m.clearness_mean[static_cast<std::size_t>(t)];
}

double clearness_std(const ScenarioModel& m, int t) {
    return m.clearness_std.empty() ? 0.0 : m.clearness_std[static_cast<std::size_t>(t)];
}

// Normal(1, sigma) conditioned on being nonnegative.
double truncated_multiplier(std::mt19937_64& rng, double sigma) {
    if (sigma <= 0.0) {
        return 1.0;
    }
    std::normal_distribution<double> dist(1.0, sigma);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double v = dist(rng);
        if (v >= 0.0) {
            return v;
        }
    }
    return 0.0;
}

double sample_wind(std::mt19937_64& rng, const ScenarioModel& m, double forecast) {
    if (forecast <= 0.0 || m.wind_model == grid::WindModel::Deterministic) {
        return std::max(forecast, 0.0);
    }
    if (m.wind_model == grid::WindModel::Weibull) {
        const double scale = forecast / std::tgamma(1.0 + 1.0 / m.weibull_shape);
        return std::weibull_distribution<double>(m.weibull_shape, scale)(rng);
    }
    // Rayleigh is Weibull with shape 2; scale chosen so the mean equals the forecast.
    const double c = 2.0 * forecast / std::sqrt(std::numbers::pi);
    return std::weibull_distribution<double>(2.0, c)(rng);
}

double sample_clearness(std::mt19937_64& rng, double mu, double sd) {
    if (sd <= 0.0) {
        return mu;
    }
    const BetaShape shape = beta_params_from_moments(mu, sd);
    const double x = std::gamma_distribution<double>(shape.alpha, 1.0)(rng);
    const double y = std::gamma_distribution<double>(shape.beta, 1.0)(rng);
    const double s = x / (x + y);
    return std::clamp(s, 0.0, 1.0);
}

void require_profiles(const grid::NetworkCase& c) {
    for (const char* key : {"wind_speed", "irradiance"}) {
        if (!c.profiles.contains(key)) {
            throw MissingProfile(std::string("scenario generation needs profile '") + key + "'");
        }
    }
}

}  // namespace

Scenario forecast_scenario(const grid::NetworkCase& c, const ScenarioModel& model) {
    require_profiles(c);
    const int steps = c.horizon.steps;
    const auto& wind = c.profile("wind_speed");
    const auto& clear = c.profile("irradiance");
    Scenario s;
    s.id = 0;
    s.probability = 1.0;
    s.load_mult.assign(static_cast<std::size_t>(steps), 1.0);
    s.price_mult.assign(static_cast<std::size_t>(steps), 1.0);
    s.wind_ms = wind;
    s.irradiance_wm2.resize(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        s.irradiance_wm2[static_cast<std::size_t>(t)] =
            clearness_mean(model, t) * clear[static_cast<std::size_t>(t)];
    }
    return s;
}

ScenarioSet forecast_set(const grid::NetworkCase& c) {
    ScenarioSet set;
    set.scenarios.push_back(forecast_scenario(c, ScenarioModel::from_case(c)));
    return set;
}

ScenarioSet generate_scenarios(const grid::NetworkCase& c, const ScenarioModel& model, int n,
                               std::uint64_t seed) {
    if (n < 1) {
        throw BadTarget("scenario count must be >= 1");
    }
    require_profiles(c);
    const int steps = c.horizon.steps;
    const auto& wind = c.profile("wind_speed");
    const auto& clear = c.profile("irradiance");
    const auto nsteps = static_cast<std::size_t>(steps);

    ScenarioSet set;
    set.seed = seed;
    set.scenarios.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Independent stream per scenario index.
        std::mt19937_64 rng(io::mix_seed(seed, static_cast<std::uint64_t>(i)));
        Scenario& s = set.scenarios[static_cast<std::size_t>(i)];
        s.id = i;
        s.probability = 1.0 / n;
        s.load_mult.resize(nsteps);
        s.wind_ms.resize(nsteps);
        s.irradiance_wm2.resize(nsteps);
        s.price_mult.resize(nsteps);
        for (std::size_t t = 0; t < nsteps; ++t) {
            s.load_mult[t] = truncated_multiplier(rng, model.load_sigma);
            s.wind_ms[t] = sample_wind(rng, model, wind[t]);
            if (clear[t] <= 0.0) {
                s.irradiance_wm2[t] = 0.0;
            } else {
                const int ti = static_cast<int>(t);
                s.irradiance_wm2[t] =
                    clear[t] * sample_clearness(rng, clearness_mean(model, ti), clearness_std(model, ti));
            }
            s.price_mult[t] = truncated_multiplier(rng, model.price_sigma);
        }
    }
    return set;
}

ScenarioSet generate_scenarios(const grid::NetworkCase& c, int n, std::uint64_t seed) {
    return generate_scenarios(c, ScenarioModel::from_case(c), n, seed);
}

namespace {

const std::vector<double>& quantity(const Scenario& s, int q) {
    switch (q) {
        case 0: return s.load_mult;
        case 1: return s.wind_ms;
        case 2: return s.irradiance_wm2;
        default: return s.price_mult;
    }
}

constexpr int kQuantities = 4;

}  // namespace

std::vector<double> scenario_distances(const ScenarioSet& set) {
    const std::size_t n = set.scenarios.size();
    const std::size_t steps = static_cast<std::size_t>(set.steps());

    // Population std per quantity over every (scenario, hour) entry.
    std::vector<double> inv_scale(kQuantities, 0.0);
    for (int q = 0; q < kQuantities; ++q) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& s : set.scenarios) {
            for (double v : quantity(s, q)) {
                sum += v;
            }
        }
        const double count = static_cast<double>(n * steps);
        const double mean = sum / count;
        for (const auto& s : set.scenarios) {
            for (double v : quantity(s, q)) {
                sum_sq += (v - mean) * (v - mean);
            }
        }
        const double sd = std::sqrt(sum_sq / count);
        // Constant quantities carry no information and are left out.
        inv_scale[static_cast<std::size_t>(q)] = sd > 1e-12 * (std::abs(mean) + 1.0) ? 1.0 / sd : 0.0;
    }

    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (int q = 0; q < kQuantities; ++q) {
                const double w = inv_scale[static_cast<std::size_t>(q)];
                if (w == 0.0) {
                    continue;
                }
                const auto& a = quantity(set.scenarios[i], q);
                const auto& b = quantity(set.scenarios[j], q);
                for (std::size_t t = 0; t < steps; ++t) {
                    const double diff = (a[t] - b[t]) * w;
                    acc += diff * diff;
                }
            }
            d[i * n + j] = d[j * n + i] = std::sqrt(acc);
        }
    }
    return d;
}

ScenarioSet reduce_scenarios(const ScenarioSet& set, int target) {
    const int n = static_cast<int>(set.scenarios.size());
    if (target < 1 || target > n) {
        throw BadTarget("reduction target " + std::to_string(target) + " outside [1, " +
                        std::to_string(n) + "]");
    }
    if (target == n) {
        return set;
    }
    const auto un = static_cast<std::size_t>(n);
    const std::vector<double> d = scenario_distances(set);
    std::vector<double> prob(un);
    std::vector<int> id(un);
    for (std::size_t i = 0; i < un; ++i) {
        prob[i] = set.scenarios[i].probability;
        id[i] = set.scenarios[i].id;
    }
    std::vector<bool> alive(un, true);
    std::vector<int> nearest(un, -1);

    auto find_nearest = [&](std::size_t i) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < un; ++j) {
            if (j == i || !alive[j]) {
                continue;
            }
            const double dij = d[i * un + j];
            if (dij < best_d || (dij == best_d && best >= 0 && id[j] < id[static_cast<std::size_t>(best)])) {
                best_d = dij;
                best = static_cast<int>(j);
            }
        }
        nearest[i] = best;
    };
    for (std::size_t i = 0; i < un; ++i) {
        find_nearest(i);
    }

    for (int remaining = n; remaining > target; --remaining) {
        int victim = -1;
        double victim_cost = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < un; ++i) {
            if (!alive[i]) {
                continue;
            }
            const double cost = prob[i] * d[i * un + static_cast<std::size_t>(nearest[i])];
            if (cost < victim_cost ||
                (cost == victim_cost && victim >= 0 && id[i] < id[static_cast<std::size_t>(victim)])) {
                victim_cost = cost;
                victim = static_cast<int>(i);
            }
        }
        const auto v = static_cast<std::size_t>(victim);
        alive[v] = false;
        prob[static_cast<std::size_t>(nearest[v])] += prob[v];
        prob[v] = 0.0;
        for (std::size_t i = 0; i < un; ++i) {
            if (alive[i] && nearest[i] == victim) {
                find_nearest(i);
            }
        }
    }

    ScenarioSet out;
    out.seed = set.seed;
    for (std::size_t i = 0; i < un; ++i) {
        if (alive[i]) {
            out.scenarios.push_back(set.scenarios[i]);
            out.scenarios.back().probability = prob[i];
        }
    }
    return out;
}

FidelityReport reduction_fidelity(const ScenarioSet& original, const ScenarioSet& reduced) {
    const int steps = original.steps();
    if (steps != reduced.steps() || steps == 0) {
        throw HorizonMismatch("scenario sets have different horizons");
    }
    auto hourly_means = [steps](const ScenarioSet& set, int q) {
        std::vector<double> m(static_cast<std::size_t>(steps), 0.0);
        for (const auto& s : set.scenarios) {
            const auto& v = quantity(s, q);
            for (int t = 0; t < steps; ++t) {
                m[static_cast<std::size_t>(t)] += s.probability * v[static_cast<std::size_t>(t)];
            }
        }
        return m;
    };
    auto compare = [&](int q) {
        const auto a = hourly_means(original, q);
        const auto b = hourly_means(reduced, q);
        FidelityReport::Quantity r;
        for (int t = 0; t < steps; ++t) {
            const auto ut = static_cast<std::size_t>(t);
            const double err = std::abs(a[ut] - b[ut]);
            r.max_abs_error = std::max(r.max_abs_error, err);
            r.mean_abs_error += err / steps;
            if (std::abs(a[ut]) > 1e-12) {
                r.max_rel_error = std::max(r.max_rel_error, err / std::abs(a[ut]));
            }
        }
        return r;
    };
    auto cv = [steps](const ScenarioSet& set) {
        double sum_p2 = 0.0;
        for (const auto& s : set.scenarios) {
            sum_p2 += s.probability * s.probability;
        }
        const double n_eff = 1.0 / sum_p2;
        double worst = 0.0;
        for (int t = 0; t < steps; ++t) {
            const auto ut = static_cast<std::size_t>(t);
            double mean = 0.0;
            for (const auto& s : set.scenarios) {
                mean += s.probability * s.load_mult[ut];
            }
            double var = 0.0;
            for (const auto& s : set.scenarios) {
                const double dv = s.load_mult[ut] - mean;
                var += s.probability * dv * dv;
            }
            if (mean > 0.0) {
                worst = std::max(worst, std::sqrt(var / n_eff) / mean);
            }
        }
        return worst;
    };
    FidelityReport rep;
    rep.load = compare(0);
    rep.wind = compare(1);
    rep.irradiance = compare(2);
    rep.price = compare(3);
    rep.cv_original = cv(original);
    rep.cv_reduced = cv(reduced);
    return rep;
}

void write_scenarios_csv(const ScenarioSet& set, std::ostream& out) {
    out << "scenario_id,probability,hour,load_mult,wind_ms,irradiance_wm2,price_mult\n";
    for (const auto& s : set.scenarios) {
        const std::string prob = io::format_double(s.probability);
        for (std::size_t t = 0; t < s.load_mult.size(); ++t) {
            out << s.id << ',' << prob << ',' << t << ',' << io::format_double(s.load_mult[t]) << ','
                << io::format_double(s.wind_ms[t]) << ',' << io::format_double(s.irradiance_wm2[t])
                << ',' << io::format_double(s.price_mult[t]) << '\n';
        }
    }
}

std::string scenarios_csv(const ScenarioSet& set) {
    std::ostringstream ss;
    write_scenarios_csv(set, ss);
    return ss.str();
}

ScenarioSet read_scenarios_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("scenario CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "scenario_id,probability,hour,load_mult,wind_ms,irradiance_wm2,price_mult") {
        throw ParseError("scenario CSV: unexpected header '" + line + "'");
    }
    ScenarioSet set;
    std::map<int, std::size_t> index;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = io::split_csv_line(line);
        const std::string ctx = "scenario CSV row " + std::to_string(row);
        if (f.size() != 7) {
            throw ParseError(ctx + ": expected 7 columns");
        }
        const int sid = static_cast<int>(io::parse_int(f[0], ctx));
        const double prob = io::parse_double(f[1], ctx);
        const long long hour = io::parse_int(f[2], ctx);
        auto it = index.find(sid);
        if (it == index.end()) {
            it = index.emplace(sid, set.scenarios.size()).first;
            Scenario s;
            s.id = sid;
            s.probability = prob;
            set.scenarios.push_back(std::move(s));
        }
        Scenario& s = set.scenarios[it->second];
        if (prob != s.probability) {
            throw ParseError(ctx + ": probability differs between rows of scenario " + std::to_string(sid));
        }
        if (hour != static_cast<long long>(s.load_mult.size())) {
            throw ParseError(ctx + ": hours must be consecutive from 0");
        }
        s.load_mult.push_back(io::parse_double(f[3], ctx));
        s.wind_ms.push_back(io::parse_double(f[4], ctx));
        s.irradiance_wm2.push_back(io::parse_double(f[5], ctx));
        s.price_mult.push_back(io::parse_double(f[6], ctx));
    }
    if (set.scenarios.empty()) {
        throw ParseError("scenario CSV has no rows");
    }
    const std::size_t steps = set.scenarios.front().load_mult.size();
    for (const auto& s : set.scenarios) {
        if (s.load_mult.size() != steps) {
            throw ParseError("scenario CSV: scenario " + std::to_string(s.id) + " has a different horizon");
        }
        if (!(s.probability > 0.0)) {
            throw ParseError("scenario CSV: scenario " + std::to_string(s.id) + " has nonpositive probability");
        }
    }
    return set;
}

}  // namespace microdispatch::uncertainty
