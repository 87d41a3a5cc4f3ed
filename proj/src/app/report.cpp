#include "qmarket/app/report.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qmarket/format.hpp"
#include "qmarket/market/io.hpp"

namespace qmarket::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char *kMonthlyHeader = "month,price_cap,settlement,penalty_coeff,social_welfare,hhi,"
                             "renewable_penetration,supply_demand_ratio,demand,served,reward";
const char *kPpoHeader =
    "step,price_cap,settlement,penalty_coeff,reward,j_actor,j_critic,entropy,loss";
const char *kAgentHeader = "month,episode,mean_loss,epsilon,mean_reward";

std::string fd(double v) { return format_double(v); }

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

double to_double(const std::string &s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InputError("bad number '" + s + "' in CSV");
    return v;
}

std::size_t to_size(const std::string &s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InputError("bad integer '" + s + "' in CSV");
    return v;
}

/// Calls `row` with the cells of every data line after checking the header.
template <class F> void read_csv(std::istream &is, const char *header, F &&row) {
    std::string line;
    if (!std::getline(is, line) || line != header)
        throw InputError(std::string("CSV header mismatch, expected '") + header + "'");
    const std::size_t cols = split(header).size();
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        auto cells = split(line);
        if (cells.size() != cols)
            throw InputError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(cols));
        row(cells);
    }
}

void write_text(const fs::path &path, const std::string &text) {
    // Write to a sibling and rename so readers never see a half-written file.
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

} // namespace

std::vector<MonthlyRow> monthly_rows(const bilevel::ExperimentRecord &record) {
    std::vector<MonthlyRow> rows;
    for (std::size_t t = 0; t < record.months.size(); ++t) {
        const auto &m = record.months[t];
        rows.push_back({t, m.mechanism, m.metrics, m.demand, m.served,
                        t < record.rewards.size() ? record.rewards[t] : 0.0});
    }
    return rows;
}

std::vector<PpoTraceCsvRow> ppo_rows(const bilevel::ExperimentRecord &record) {
    std::vector<PpoTraceCsvRow> rows;
    for (const auto &r : record.ppo_trace)
        rows.push_back({r.step, r.mechanism, r.reward, r.report.j_actor, r.report.j_critic,
                        r.report.entropy, r.report.loss});
    return rows;
}

std::vector<AgentRow> agent_rows(const bilevel::ExperimentRecord &record, std::size_t agent) {
    std::vector<AgentRow> rows;
    for (std::size_t t = 0; t < record.months.size(); ++t)
        for (const auto &tel : record.months[t].telemetry)
            if (tel.agent == agent)
                rows.push_back({t, tel.episode, tel.mean_loss, tel.epsilon, tel.mean_reward});
    return rows;
}

void write_monthly_csv(std::ostream &os, const std::vector<MonthlyRow> &rows) {
    os << kMonthlyHeader << '\n';
    for (const auto &r : rows)
        os << r.month << ',' << fd(r.mechanism.price_cap) << ','
           << market::to_string(r.mechanism.settlement) << ',' << fd(r.mechanism.penalty_coeff)
           << ',' << fd(r.metrics.social_welfare) << ',' << fd(r.metrics.hhi) << ','
           << fd(r.metrics.renewable_penetration) << ',' << fd(r.metrics.supply_demand_ratio)
           << ',' << fd(r.demand) << ',' << fd(r.served) << ',' << fd(r.reward) << '\n';
}

void write_ppo_csv(std::ostream &os, const std::vector<PpoTraceCsvRow> &rows) {
    os << kPpoHeader << '\n';
    for (const auto &r : rows)
        os << r.step << ',' << fd(r.mechanism.price_cap) << ','
           << market::to_string(r.mechanism.settlement) << ',' << fd(r.mechanism.penalty_coeff)
           << ',' << fd(r.reward) << ',' << fd(r.j_actor) << ',' << fd(r.j_critic) << ','
           << fd(r.entropy) << ',' << fd(r.loss) << '\n';
}

void write_agent_csv(std::ostream &os, const std::vector<AgentRow> &rows) {
    os << kAgentHeader << '\n';
    for (const auto &r : rows)
        os << r.month << ',' << r.episode << ',' << fd(r.mean_loss) << ',' << fd(r.epsilon) << ','
           << fd(r.mean_reward) << '\n';
}

std::vector<MonthlyRow> read_monthly_csv(std::istream &is) {
    std::vector<MonthlyRow> rows;
    read_csv(is, kMonthlyHeader, [&](const std::vector<std::string> &c) {
        MonthlyRow r;
        r.month = to_size(c[0]);
        r.mechanism.price_cap = to_double(c[1]);
        r.mechanism.settlement = market::settlement_from_string(c[2]);
        r.mechanism.penalty_coeff = to_double(c[3]);
        r.metrics.social_welfare = to_double(c[4]);
        r.metrics.hhi = to_double(c[5]);
        r.metrics.renewable_penetration = to_double(c[6]);
        r.metrics.supply_demand_ratio = to_double(c[7]);
        r.demand = to_double(c[8]);
        r.served = to_double(c[9]);
        r.reward = to_double(c[10]);
        rows.push_back(r);
    });
    return rows;
}

std::vector<PpoTraceCsvRow> read_ppo_csv(std::istream &is) {
    std::vector<PpoTraceCsvRow> rows;
    read_csv(is, kPpoHeader, [&](const std::vector<std::string> &c) {
        PpoTraceCsvRow r;
        r.step = to_size(c[0]);
        r.mechanism.price_cap = to_double(c[1]);
        r.mechanism.settlement = market::settlement_from_string(c[2]);
        r.mechanism.penalty_coeff = to_double(c[3]);
        r.reward = to_double(c[4]);
        r.j_actor = to_double(c[5]);
        r.j_critic = to_double(c[6]);
        r.entropy = to_double(c[7]);
        r.loss = to_double(c[8]);
        rows.push_back(r);
    });
    return rows;
}

std::vector<AgentRow> read_agent_csv(std::istream &is) {
    std::vector<AgentRow> rows;
    read_csv(is, kAgentHeader, [&](const std::vector<std::string> &c) {
        rows.push_back({to_size(c[0]), to_size(c[1]), to_double(c[2]), to_double(c[3]),
                        to_double(c[4])});
    });
    return rows;
}

json summary_json(const ExperimentConfig &config, const bilevel::ExperimentRecord &record,
                  bool complete) {
    json j{{"backend", bilevel::to_string(config.lower.backend)},
           {"seed", config.settings.seed},
           {"complete", complete},
           {"months", record.months.size()},
           {"converged", record.converged}};
    if (!record.months.empty()) {
        j["initial_mechanism"] = record.months.front().mechanism;
        j["initial_social_welfare"] = record.months.front().metrics.social_welfare;
        j["best_month"] = record.best_month;
        j["final_mechanism"] = record.final_mechanism;
        j["final_social_welfare"] = record.final_social_welfare;
        j["final_reward"] = record.rewards[record.best_month];
    }
    return j;
}

void write_record(const fs::path &dir, const ExperimentConfig &config,
                  const bilevel::ExperimentRecord &record, bool complete) {
    fs::create_directories(dir / "agents");
    write_text(dir / "config_echo.json", config_to_json(config).dump(2) + "\n");
    write_text(dir / "summary.json", summary_json(config, record, complete).dump(2) + "\n");

    std::ostringstream monthly;
    write_monthly_csv(monthly, monthly_rows(record));
    write_text(dir / "monthly.csv", monthly.str());

    std::ostringstream ppo;
    write_ppo_csv(ppo, ppo_rows(record));
    write_text(dir / "ppo_trace.csv", ppo.str());

    std::size_t n_agents = 0;
    if (!record.months.empty())
        n_agents = record.months.front().agent_rewards.size();
    for (std::size_t i = 0; i < n_agents; ++i) {
        std::ostringstream os;
        write_agent_csv(os, agent_rows(record, i));
        write_text(dir / "agents" / ("agent_" + std::to_string(i) + ".csv"), os.str());
    }

    if (config.write_hourly) {
        fs::create_directories(dir / "hourly");
        for (std::size_t t = 0; t < record.months.size(); ++t) {
            const fs::path path = dir / "hourly" / ("month_" + std::to_string(t) + ".csv");
            if (fs::exists(path))
                continue;
            std::ostringstream os;
            market::write_clearing_csv(os, record.months[t].hourly);
            write_text(path, os.str());
        }
    }
}

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace qmarket::app
