#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankmetrics/bibliometric.hpp"
#include "rankmetrics/metric_keys.hpp"
#include "rankmetrics/ranking_metrics.hpp"
#include "rankmetrics/scenario_dist.hpp"

namespace rankmetrics {

struct IngestReport {
    std::size_t rows_dropped = 0;
    std::vector<std::string> notes;
};

/// Dates x tickers matrix of simple returns.
struct ReturnPanel {
    std::vector<std::string> dates;
    std::vector<std::string> tickers;
    std::vector<std::vector<double>> returns;  // [date][ticker]
};

/// Countries x years matrix of nonnegative losses.
struct LossPanel {
    std::vector<std::string> countries;
    std::vector<std::string> years;
    std::vector<std::vector<double>> losses;  // [country][year]
};

/// Mean-centered, sign-flipped losses: higher is more resilient.
struct ResiliencePanel {
    std::vector<std::string> countries;
    std::vector<std::string> years;
    std::vector<std::vector<double>> values;  // [country][year]
};

struct ZoneMap {
    std::map<std::string, std::string> zone_of;
};

struct PortfolioGroup {
    std::string name;
    std::vector<std::string> tickers;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t begin = 0;
    while (true) {
        const auto pos = line.find(',', begin);
        if (pos == std::string::npos) {
            cells.push_back(trim(line.substr(begin)));
            break;
        }
        cells.push_back(trim(line.substr(begin, pos - begin)));
        begin = pos + 1;
    }
    return cells;
}

inline bool parse_cell(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

/// Shared header+rows reader for the wide panel layouts.
struct PanelData {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<double>> values;
};

inline PanelData load_panel(std::istream& in, const std::string& what,
                            const std::string& label_name, IngestReport* report) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument(what + ": empty file");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 2) {
        throw std::invalid_argument(what + ": header must name at least one column");
    }
    PanelData panel;
    panel.col_labels.assign(header.begin() + 1, header.end());
    for (std::size_t i = 0; i < panel.col_labels.size(); ++i) {
        if (panel.col_labels[i].empty()) {
            throw std::invalid_argument(what + ": blank column name at header column " +
                                        std::to_string(i + 2));
        }
        for (std::size_t j = i + 1; j < panel.col_labels.size(); ++j) {
            if (panel.col_labels[i] == panel.col_labels[j]) {
                throw std::invalid_argument(what + ": duplicate column '" + panel.col_labels[i] +
                                            "'");
            }
        }
    }
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument(what + ": row " + std::to_string(row_no) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        }
        bool gap = false;
        std::vector<double> row(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (cells[c].empty()) {
                gap = true;
                break;
            }
            if (!parse_cell(cells[c], row[c - 1])) {
                throw std::invalid_argument(what + ": non-numeric cell at row " +
                                            std::to_string(row_no) + ", column " +
                                            std::to_string(c + 1) + " (" + label_name + " '" +
                                            panel.col_labels[c - 1] + "')");
            }
        }
        if (gap) {
            if (report) {
                ++report->rows_dropped;
                report->notes.push_back("dropped row " + std::to_string(row_no) + " ('" +
                                        cells.front() + "'): blank cell");
            }
            continue;
        }
        panel.row_labels.push_back(cells.front());
        panel.values.push_back(std::move(row));
    }
    if (panel.values.empty()) {
        throw std::invalid_argument(what + ": no usable rows");
    }
    return panel;
}

inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string format_metric_value(const MetricValue& v) {
    if (v.is_infinite()) return "inf";
    return format_g12(v.value);
}

}  // namespace detail

inline ReturnPanel load_returns(std::istream& in, IngestReport* report = nullptr) {
    auto panel = detail::load_panel(in, "returns", "ticker", report);
    return {std::move(panel.row_labels), std::move(panel.col_labels), std::move(panel.values)};
}

inline LossPanel load_losses(std::istream& in, IngestReport* report = nullptr) {
    auto panel = detail::load_panel(in, "losses", "year", report);
    for (std::size_t r = 0; r < panel.values.size(); ++r) {
        for (std::size_t c = 0; c < panel.values[r].size(); ++c) {
            if (panel.values[r][c] < 0.0) {
                throw std::invalid_argument("losses: negative value for country '" +
                                            panel.row_labels[r] + "', year '" +
                                            panel.col_labels[c] + "'");
            }
        }
    }
    return {std::move(panel.row_labels), std::move(panel.col_labels), std::move(panel.values)};
}

inline ZoneMap load_zone_map(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("zones: empty file");
    }
    ZoneMap zm;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
            throw std::invalid_argument("zones: row " + std::to_string(row_no) +
                                        " must be 'country,zone'");
        }
        if (!zm.zone_of.emplace(cells[0], cells[1]).second) {
            throw std::invalid_argument("zones: duplicate country '" + cells[0] + "'");
        }
    }
    if (zm.zone_of.empty()) {
        throw std::invalid_argument("zones: no mappings");
    }
    return zm;
}

inline std::vector<PortfolioGroup> load_groups(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("groups: empty file");
    }
    std::vector<PortfolioGroup> groups;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
            throw std::invalid_argument("groups: row " + std::to_string(row_no) +
                                        " must be 'portfolio,ticker'");
        }
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const PortfolioGroup& g) { return g.name == cells[0]; });
        if (it == groups.end()) {
            groups.push_back({cells[0], {cells[1]}});
        } else {
            it->tickers.push_back(cells[1]);
        }
    }
    if (groups.empty()) {
        throw std::invalid_argument("groups: no rows");
    }
    return groups;
}

namespace detail {

inline std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

inline ReturnPanel load_returns(const std::string& path, IngestReport* report = nullptr) {
    auto in = detail::open_or_throw(path);
    return load_returns(in, report);
}

inline LossPanel load_losses(const std::string& path, IngestReport* report = nullptr) {
    auto in = detail::open_or_throw(path);
    return load_losses(in, report);
}

inline ZoneMap load_zone_map(const std::string& path) {
    auto in = detail::open_or_throw(path);
    return load_zone_map(in);
}

inline std::vector<PortfolioGroup> load_groups(const std::string& path) {
    auto in = detail::open_or_throw(path);
    return load_groups(in);
}

// ---------------------------------------------------------------------------
// Climate pipeline
// ---------------------------------------------------------------------------

/// Y_{c,t} = -(L_{c,t} - Lbar) with Lbar the grand mean over all cells.
inline ResiliencePanel mean_center_losses(const LossPanel& p) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& row : p.losses) {
        for (double v : row) {
            total += v;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("mean_center_losses: empty panel");
    const double grand_mean = total / static_cast<double>(count);
    ResiliencePanel out;
    out.countries = p.countries;
    out.years = p.years;
    out.values.resize(p.losses.size());
    for (std::size_t r = 0; r < p.losses.size(); ++r) {
        out.values[r].resize(p.losses[r].size());
        for (std::size_t c = 0; c < p.losses[r].size(); ++c) {
            out.values[r][c] = -(p.losses[r][c] - grand_mean);
        }
    }
    return out;
}

/// Per-zone yearly series: the columnwise sum of member-country rows.
/// Optional per-zone weights (a config hook, off by default) divide each
/// zone's series by its country count.
inline std::map<std::string, std::vector<double>> zone_series(
    const ResiliencePanel& p, const ZoneMap& zm, bool weight_by_country_count = false) {
    std::map<std::string, std::vector<double>> series;
    std::map<std::string, std::size_t> members;
    for (std::size_t r = 0; r < p.countries.size(); ++r) {
        const auto it = zm.zone_of.find(p.countries[r]);
        if (it == zm.zone_of.end()) {
            throw std::invalid_argument("zones: unmapped country '" + p.countries[r] + "'");
        }
        auto& acc = series[it->second];
        if (acc.empty()) acc.assign(p.years.size(), 0.0);
        for (std::size_t c = 0; c < p.years.size(); ++c) acc[c] += p.values[r][c];
        ++members[it->second];
    }
    if (weight_by_country_count) {
        for (auto& [zone, acc] : series) {
            for (auto& v : acc) v /= static_cast<double>(members[zone]);
        }
    }
    return series;
}

/// Equal-weight scenario distributions over years, one per zone.
inline std::map<std::string, ScenarioDist> aggregate_zones(const ResiliencePanel& p,
                                                           const ZoneMap& zm) {
    std::map<std::string, ScenarioDist> dists;
    for (auto& [zone, values] : zone_series(p, zm)) {
        dists.emplace(zone, ScenarioDist::equal_weights(values));
    }
    return dists;
}

/// Certainty-equivalent resilience score: piecewise-linear utility with the
/// threshold at the given percentile of the zone's own series.
inline MetricValue climate_ce(const ScenarioDist& zone_dist, double theta_percentile = 0.75,
                              double penalty = 0.1) {
    const double theta = quantile(zone_dist, theta_percentile);
    return r_certainty_equiv_value(zone_dist, UtilityFn::piecewise_linear(theta, penalty));
}

// ---------------------------------------------------------------------------
// Leaderboards
// ---------------------------------------------------------------------------

struct LeaderboardRow {
    std::string entity;
    std::string metric;
    MetricValue value;
    int rank = 0;
};

struct Leaderboard {
    std::vector<LeaderboardRow> rows;
};

namespace detail {

/// Dense ranking per metric: descending value, ties share a rank.
inline void append_ranked(Leaderboard& board, const std::string& metric,
                          std::vector<std::pair<std::string, MetricValue>> values) {
    std::stable_sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.second.value != b.second.value) return a.second.value > b.second.value;
        return a.first < b.first;
    });
    int rank = 0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (auto& [entity, value] : values) {
        if (!(value.value == prev)) {
            ++rank;
            prev = value.value;
        }
        board.rows.push_back({entity, metric, value, rank});
    }
}

}  // namespace detail

/// Per-entity evaluation of a metric-spec list. Distribution metrics are
/// instantiated against the pooled outcomes of all entities (this places
/// data-driven two-step thresholds); profile metrics are ranked against the
/// global benchmark across entities.
inline Leaderboard rank_entities(const std::vector<std::string>& names,
                                 const std::vector<ScenarioDist>& dists,
                                 const std::vector<std::vector<double>>& weighted_expectations,
                                 const std::vector<MetricSpec>& specs) {
    std::vector<double> pooled_outcomes;
    for (const auto& d : dists) {
        pooled_outcomes.insert(pooled_outcomes.end(), d.outcomes().begin(), d.outcomes().end());
    }
    const ScenarioDist pooled = ScenarioDist::equal_weights(pooled_outcomes);

    Leaderboard board;
    for (const auto& spec : specs) {
        std::vector<std::pair<std::string, MetricValue>> values;
        if (spec.kind == MetricSpec::Kind::dist) {
            const RankingMetric metric = spec.make(&pooled);
            for (std::size_t i = 0; i < names.size(); ++i) {
                values.emplace_back(names[i], metric.evaluate(dists[i]));
            }
        } else {
            const auto profiles = build_profiles(weighted_expectations);
            for (std::size_t i = 0; i < names.size(); ++i) {
                const auto rank = srm_rank(profiles[i], *spec.family);
                values.emplace_back(names[i],
                                    MetricValue{static_cast<double>(rank), branch::ratio});
            }
        }
        detail::append_ranked(board, spec.key, std::move(values));
    }
    return board;
}

/// Portfolio leaderboard: equal weights within each group, weighted
/// expectations w_p = mu_p / N for the profile indices.
inline Leaderboard rank_portfolios(const ReturnPanel& panel,
                                   const std::vector<PortfolioGroup>& groups,
                                   const std::vector<MetricSpec>& specs) {
    if (groups.empty()) throw std::invalid_argument("rank_portfolios: no groups");
    std::vector<std::string> names;
    std::vector<ScenarioDist> dists;
    std::vector<std::vector<double>> weighted_expectations;
    for (const auto& group : groups) {
        if (group.tickers.empty()) {
            throw std::invalid_argument("rank_portfolios: empty group '" + group.name + "'");
        }
        std::vector<std::size_t> cols;
        for (const auto& ticker : group.tickers) {
            const auto it = std::find(panel.tickers.begin(), panel.tickers.end(), ticker);
            if (it == panel.tickers.end()) {
                throw std::invalid_argument("rank_portfolios: unknown ticker '" + ticker +
                                            "' in group '" + group.name + "'");
            }
            cols.push_back(static_cast<std::size_t>(it - panel.tickers.begin()));
        }
        const double w = 1.0 / static_cast<double>(cols.size());
        std::vector<double> outcomes(panel.returns.size());
        for (std::size_t r = 0; r < panel.returns.size(); ++r) {
            double v = 0.0;
            for (auto c : cols) v += panel.returns[r][c];
            outcomes[r] = v * w;
        }
        std::vector<double> expectations(cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            double mean = 0.0;
            for (std::size_t r = 0; r < panel.returns.size(); ++r) {
                mean += panel.returns[r][cols[j]];
            }
            expectations[j] = w * mean / static_cast<double>(panel.returns.size());
        }
        names.push_back(group.name);
        dists.push_back(ScenarioDist::equal_weights(std::move(outcomes)));
        weighted_expectations.push_back(std::move(expectations));
    }
    return rank_entities(names, dists, weighted_expectations, specs);
}

/// Zone leaderboard for the climate study; the certainty-equivalent column
/// uses the per-zone percentile threshold.
inline Leaderboard rank_zones(const LossPanel& losses, const ZoneMap& zm,
                              const std::vector<MetricSpec>& specs, double ce_theta_percentile,
                              double ce_penalty) {
    const ResiliencePanel resilience = mean_center_losses(losses);
    const auto series = zone_series(resilience, zm);

    std::vector<std::string> names;
    std::vector<ScenarioDist> dists;
    for (const auto& [zone, values] : series) {
        names.push_back(zone);
        dists.push_back(ScenarioDist::equal_weights(values));
    }

    // country-level weighted expectations per zone (equal unit weights)
    std::vector<std::vector<double>> weighted_expectations(names.size());
    for (std::size_t r = 0; r < resilience.countries.size(); ++r) {
        const std::string& zone = zm.zone_of.at(resilience.countries[r]);
        const auto idx = static_cast<std::size_t>(
            std::find(names.begin(), names.end(), zone) - names.begin());
        double mean = 0.0;
        for (double v : resilience.values[r]) mean += v;
        mean /= static_cast<double>(resilience.years.size());
        weighted_expectations[idx].push_back(mean);
    }

    Leaderboard board = rank_entities(names, dists, weighted_expectations, specs);

    std::vector<std::pair<std::string, MetricValue>> ce_values;
    for (std::size_t i = 0; i < names.size(); ++i) {
        ce_values.emplace_back(names[i], climate_ce(dists[i], ce_theta_percentile, ce_penalty));
    }
    std::ostringstream ce_key;
    ce_key << "ce:plinear:" << ce_theta_percentile << "q:" << ce_penalty;
    detail::append_ranked(board, ce_key.str(), std::move(ce_values));
    return board;
}

// ---------------------------------------------------------------------------
// Artifact writers (CSV, all floats at 12 significant digits)
// ---------------------------------------------------------------------------

inline void write_leaderboard_csv(std::ostream& out, const Leaderboard& board) {
    out << "entity,metric,value,rank\n";
    for (const auto& row : board.rows) {
        out << row.entity << ',' << row.metric << ',' << detail::format_metric_value(row.value)
            << ',' << row.rank << '\n';
    }
}

inline std::string sanitize_metric_key(const std::string& key) {
    std::string s = key;
    for (auto& c : s) {
        if (c == ':' || c == '.' || c == '/' || c == '\\') c = '_';
    }
    return s;
}

/// One sorted entity/value file per metric, consumable by plotting tools.
inline void write_plot_data(const std::string& out_dir, const Leaderboard& board) {
    std::map<std::string, std::vector<const LeaderboardRow*>> by_metric;
    for (const auto& row : board.rows) by_metric[row.metric].push_back(&row);
    for (const auto& [metric, rows] : by_metric) {
        const std::string path = out_dir + "/plot_" + sanitize_metric_key(metric) + ".csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << "entity,value\n";
        for (const auto* row : rows) {
            out << row->entity << ',' << detail::format_metric_value(row->value) << '\n';
        }
    }
}

}  // namespace rankmetrics
