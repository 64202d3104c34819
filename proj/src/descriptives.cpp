#include "powerpanel/descriptives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/distributions/students_t.hpp>

#include "powerpanel/csv.hpp"
#include "powerpanel/error.hpp"

namespace powerpanel {

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    m.n = v.size();
    if (v.empty()) return m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

}  // namespace

std::vector<ClusterTrajectory> cluster_roa_trajectories(const PanelDataset& dataset,
                                                        const ClusterAssignment& assignment,
                                                        std::vector<std::string>* warnings) {
    std::vector<std::map<int, std::vector<double>>> per_cluster(assignment.k);
    for (const auto& rec : dataset.records) {
        const auto label = assignment.label_of(rec.firm_id);
        const double roa = variable_value(rec, "roa").value_or(kMissing);
        if (!label || !std::isfinite(roa)) continue;
        per_cluster[*label][rec.year].push_back(roa);
    }
    std::vector<ClusterTrajectory> out;
    for (std::size_t c = 0; c < assignment.k; ++c) {
        if (per_cluster[c].empty()) {
            if (warnings) warnings->push_back("cluster " + std::to_string(c) + " has no ROA observations; omitted");
            continue;
        }
        ClusterTrajectory t{c, assignment.cluster_name(c), {}};
        for (const auto& [year, values] : per_cluster[c]) {
            const auto m = moments(values);
            YearStat s{year, m.mean, 0.0, m.n, m.n == 1};
            if (m.n > 1) s.se_mean = m.sd / std::sqrt(static_cast<double>(m.n));
            t.years.push_back(s);
        }
        out.push_back(std::move(t));
    }
    return out;
}

TrendDelta trend_delta(const ClusterTrajectory& trajectory, int from_year, int to_year) {
    auto find = [&](int year) {
        for (const auto& s : trajectory.years) {
            if (s.year == year) return s.mean_roa;
        }
        throw Error(ErrorKind::range, "year " + std::to_string(year) + " not in trajectory of cluster '" +
                                          trajectory.label + "'");
    };
    if (from_year == to_year) throw Error(ErrorKind::range, "trend endpoints coincide");
    const double total = find(to_year) - find(from_year);
    return {total, total / static_cast<double>(to_year - from_year)};
}

std::vector<LoessPoint> loess(const std::vector<double>& x, const std::vector<double>& y, const LoessOptions& options,
                              const std::vector<double>& at) {
    if (x.size() != y.size()) throw Error(ErrorKind::input, "x and y differ in length");
    if (options.degree < 0 || options.degree > 2) throw Error(ErrorKind::config, "loess degree must be 0, 1 or 2");
    if (!(options.span > 0.0 && options.span <= 1.0)) throw Error(ErrorKind::span, "span must lie in (0, 1]");
    const std::size_t n = x.size();
    const auto p = static_cast<std::size_t>(options.degree) + 1;
    if (n < p + 1) {
        throw Error(ErrorKind::input, "loess needs at least " + std::to_string(p + 1) + " points");
    }
    const auto q = std::min(n, static_cast<std::size_t>(std::ceil(options.span * static_cast<double>(n) - 1e-12)));
    if (q < p) {
        throw Error(ErrorKind::span, "span keeps " + std::to_string(q) + " points; degree " +
                                         std::to_string(options.degree) + " needs " + std::to_string(p));
    }
    const auto& points = at.empty() ? x : at;

    std::vector<LoessPoint> out;
    out.reserve(points.size());
    std::vector<std::size_t> order(n);
    for (double x0 : points) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(x[a] - x0) < std::abs(x[b] - x0); });
        const double dmax = std::abs(x[order[q - 1]] - x0);

        Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        Eigen::VectorXd xtwy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
        std::vector<double> w(q);
        std::size_t active = 0;
        for (std::size_t r = 0; r < q; ++r) {
            const auto i = order[r];
            double wi = 1.0;
            if (dmax > 0.0) {
                const double u = std::abs(x[i] - x0) / dmax;
                wi = u < 1.0 ? std::pow(1.0 - u * u * u, 3) : 0.0;
            }
            w[r] = wi;
            if (wi <= 0.0) continue;
            ++active;
            Eigen::VectorXd row(static_cast<Eigen::Index>(p));
            double pw = 1.0;
            for (std::size_t d = 0; d < p; ++d, pw *= x[i] - x0) row(static_cast<Eigen::Index>(d)) = pw;
            xtwx += wi * row * row.transpose();
            xtwy += wi * y[i] * row;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
        const double scale = xtwx.diagonal().maxCoeff();
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().cwiseAbs().minCoeff() > 1e-12 * scale)) {
            throw Error(ErrorKind::span, "local fit at x = " + std::to_string(x0) +
                                             " is singular; widen the span or lower the degree");
        }
        const Eigen::VectorXd coef = ldlt.solve(xtwy);
        double rss = 0.0;
        for (std::size_t r = 0; r < q; ++r) {
            if (w[r] <= 0.0) continue;
            const auto i = order[r];
            double pred = 0.0, pw = 1.0;
            for (std::size_t d = 0; d < p; ++d, pw *= x[i] - x0) pred += coef(static_cast<Eigen::Index>(d)) * pw;
            rss += w[r] * (y[i] - pred) * (y[i] - pred);
        }
        LoessPoint pt;
        pt.x = x0;
        pt.fit = coef(0);
        if (active > p) {
            const double sigma2 = rss / static_cast<double>(active - p);
            const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
            pt.se = std::sqrt(std::max(sigma2 * inv(0, 0), 0.0));
        } else {
            pt.se = std::numeric_limits<double>::quiet_NaN();
        }
        pt.lo = pt.fit - 1.96 * pt.se;
        pt.hi = pt.fit + 1.96 * pt.se;
        out.push_back(pt);
    }
    return out;
}

std::string_view to_string(PortfolioGroup group) noexcept {
    return group == PortfolioGroup::renewable ? "renewable" : "fossil";
}

std::optional<PortfolioGroup> portfolio_group(Technology dominant) noexcept {
    if (is_renewable(dominant)) return PortfolioGroup::renewable;
    if (is_fossil(dominant)) return PortfolioGroup::fossil;
    return std::nullopt;
}

RegionMap default_region_map() {
    RegionMap m;
    auto add = [&](const char* region, std::initializer_list<const char*> codes) {
        for (const char* c : codes) m[c] = {region, std::nullopt, std::nullopt};
    };
    add("Northern", {"DK", "EE", "FI", "FO", "GB", "UK", "IE", "IS", "LT", "LV", "NO", "SE"});
    add("Western", {"AT", "BE", "CH", "DE", "FR", "LI", "LU", "MC", "NL"});
    add("Southern", {"AD", "AL", "BA", "CY", "ES", "GR", "EL", "HR", "IT", "ME", "MK", "MT", "PT", "RS", "SI", "SM", "XK"});
    add("Eastern", {"BG", "BY", "CZ", "HU", "MD", "PL", "RO", "RU", "SK", "UA"});
    return m;
}

RegionMap read_region_map(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const auto c_country = table.column("country", path);
    const auto c_region = table.column("region", path);
    const auto c_lat = table.find_column("latitude");
    const auto c_lon = table.find_column("longitude");
    RegionMap m;
    for (const auto& row : table.rows) {
        if (row.fields.size() != table.header.size()) {
            throw Error(ErrorKind::schema, path.string() + ":" + std::to_string(row.line) + ": wrong field count");
        }
        RegionEntry e{row.fields[c_region], std::nullopt, std::nullopt};
        if (c_lat) e.latitude = csv::parse_double(row.fields[*c_lat]);
        if (c_lon) e.longitude = csv::parse_double(row.fields[*c_lon]);
        m[row.fields[c_country]] = std::move(e);
    }
    return m;
}

namespace {

struct GroupedRow {
    const FirmYearRecord* record;
    PortfolioGroup group;
    double roa;
};

// Firm-years with ROA whose firm belongs to a renewable or fossil cluster.
std::vector<GroupedRow> grouped_rows(const PanelDataset& dataset, const ClusterAssignment& assignment,
                                     const RegionMap& regions) {
    std::vector<GroupedRow> rows;
    for (const auto& rec : dataset.records) {
        if (!regions.contains(rec.country)) {
            throw Error(ErrorKind::mapping, "country '" + rec.country + "' has no region mapping");
        }
        const auto label = assignment.label_of(rec.firm_id);
        const double roa = variable_value(rec, "roa").value_or(kMissing);
        if (!label || !std::isfinite(roa) || *label >= assignment.dominant.size()) continue;
        const auto group = portfolio_group(assignment.dominant[*label].technology);
        if (!group) continue;
        rows.push_back({&rec, *group, roa});
    }
    return rows;
}

RegionalRow summarize(const std::string& region, PortfolioGroup group, const std::vector<double>& values,
                      const std::set<std::string>& firms) {
    const auto m = moments(values);
    RegionalRow r{region, group, m.mean, 0.0, 0.0, firms.size(), m.n};
    if (m.n > 1) {
        boost::math::students_t_distribution<double> t(static_cast<double>(m.n - 1));
        const double half = boost::math::quantile(t, 0.975) * m.sd / std::sqrt(static_cast<double>(m.n));
        r.ci95_low = m.mean - half;
        r.ci95_high = m.mean + half;
    } else {
        r.ci95_low = r.ci95_high = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

int region_rank(const std::string& region) {
    static const std::vector<std::string> order = {"Northern", "Western", "Southern", "Eastern"};
    auto it = std::find(order.begin(), order.end(), region);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

}  // namespace

std::vector<RegionalRow> regional_means(const PanelDataset& dataset, const ClusterAssignment& assignment,
                                        const RegionMap& regions) {
    const auto rows = grouped_rows(dataset, assignment, regions);
    using Key = std::pair<std::string, PortfolioGroup>;
    std::map<Key, std::vector<double>> values;
    std::map<Key, std::set<std::string>> firms;
    for (const auto& r : rows) {
        const auto& region = regions.at(r.record->country).region;
        for (const auto& key : {Key{region, r.group}, Key{kAllEurope, r.group}}) {
            values[key].push_back(r.roa);
            firms[key].insert(r.record->firm_id);
        }
    }
    std::vector<Key> keys;
    for (const auto& [key, v] : values) keys.push_back(key);
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        const bool a_all = a.first == kAllEurope, b_all = b.first == kAllEurope;
        if (a_all != b_all) return b_all;
        const int ra = region_rank(a.first), rb = region_rank(b.first);
        if (ra != rb) return ra < rb;
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::vector<RegionalRow> out;
    for (const auto& key : keys) out.push_back(summarize(key.first, key.second, values[key], firms[key]));
    return out;
}

std::vector<CountryRow> country_means(const PanelDataset& dataset, const ClusterAssignment& assignment,
                                      const RegionMap& regions) {
    const auto rows = grouped_rows(dataset, assignment, regions);
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> values;
    for (const auto& rec : dataset.records) values[rec.country];
    for (const auto& r : rows) {
        auto& v = values[r.record->country];
        (r.group == PortfolioGroup::renewable ? v.first : v.second).push_back(r.roa);
    }
    std::vector<CountryRow> out;
    for (const auto& [country, v] : values) {
        const auto& entry = regions.at(country);
        CountryRow row{country, entry.region, std::nullopt, std::nullopt, v.first.size(), v.second.size(),
                       entry.latitude, entry.longitude};
        if (!v.first.empty()) row.renewable_mean = moments(v.first).mean;
        if (!v.second.empty()) row.fossil_mean = moments(v.second).mean;
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace powerpanel
