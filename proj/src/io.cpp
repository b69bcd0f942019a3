#include "prescriptor/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace prescriptor {

namespace {

const char* kHeader = "method,n,replication,pollution_dims,censoring_rate,true_risk,full_info_risk,P";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t parse_count(const std::string& text) {
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("malformed integer in CSV: '" + text + "'");
  }
  return v;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return kInf;
  if (text == "-inf") return -kInf;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("malformed number in CSV: '" + text + "'");
  }
  return v;
}

std::string report_to_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = kHeader;
  out += '\n';
  for (const auto& r : rows) {
    if (r.method.find_first_of(",\n\"") != std::string::npos) {
      throw std::invalid_argument("method label cannot be written to CSV: " + r.method);
    }
    out += r.method + ',' + std::to_string(r.n) + ',' + std::to_string(r.replication) + ',' +
           std::to_string(r.pollution_dims) + ',' + format_double(r.censoring_rate) + ',' +
           format_double(r.true_risk) + ',' + format_double(r.full_info_risk) + ',' + format_double(r.P) + '\n';
  }
  return out;
}

std::vector<ExperimentRow> report_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("unexpected report CSV header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw std::invalid_argument("report CSV row has " + std::to_string(f.size()) + " fields");
    ExperimentRow r;
    r.method = f[0];
    r.n = parse_count(f[1]);
    r.replication = parse_count(f[2]);
    r.pollution_dims = parse_count(f[3]);
    r.censoring_rate = parse_double(f[4]);
    r.true_risk = parse_double(f[5]);
    r.full_info_risk = parse_double(f[6]);
    r.P = parse_double(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string report_summary_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["command"] = report.command;
  j["config"] = nlohmann::json::parse(config_to_json(report.config));
  nlohmann::json agg = nlohmann::json::array();
  for (const auto& a : report.aggregate()) {
    agg.push_back({{"method", a.method},
                   {"n", a.n},
                   {"pollution_dims", a.pollution_dims},
                   {"replications", a.count},
                   {"true_risk_mean", number(a.true_risk_mean)},
                   {"true_risk_se", number(a.true_risk_se)},
                   {"gap_mean", number(a.gap_mean)},
                   {"gap_se", number(a.gap_se)},
                   {"P_mean", number(a.P_mean)},
                   {"P_se", number(a.P_se)}});
  }
  j["aggregate"] = agg;
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& r : report.rows) {
    timings.push_back({{"method", r.method}, {"n", r.n}, {"replication", r.replication},
                       {"pollution_dims", r.pollution_dims}, {"wall_time", r.wall_time},
                       {"uncertified_solves", r.uncertified}});
  }
  j["timings"] = timings;
  j["wall_time"] = report.wall_time;
  return j.dump(2) + "\n";
}

std::string dataset_to_csv(const Matrix& X, const Matrix& Y) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("X and Y row counts differ");
  std::string out;
  for (Eigen::Index c = 0; c < X.cols(); ++c) out += (c ? ",x" : "x") + std::to_string(c + 1);
  for (Eigen::Index c = 0; c < Y.cols(); ++c) out += ",y" + std::to_string(c + 1);
  out += '\n';
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      if (c) out += ',';
      out += format_double(X(r, c));
    }
    for (Eigen::Index c = 0; c < Y.cols(); ++c) out += ',' + format_double(Y(r, c));
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string plot_script(const std::string& command, const std::string& csv_name) {
  const bool p_study = command == "prescriptiveness";
  std::string s;
  s += "import sys\n";
  s += "import pandas as pd\n";
  s += "import matplotlib\n";
  s += "matplotlib.use('Agg')\n";
  s += "import matplotlib.pyplot as plt\n\n";
  s += "path = sys.argv[1] if len(sys.argv) > 1 else '" + csv_name + "'\n";
  s += "df = pd.read_csv(path)\n";
  s += std::string("value = '") + (p_study ? "P" : "true_risk") + "'\n";
  s += "fig, ax = plt.subplots(figsize=(6, 4))\n";
  s += "for (method, dims), g in df.groupby(['method', 'pollution_dims']):\n";
  s += "    stats = g.groupby('n')[value].agg(['mean', 'sem'])\n";
  s += "    label = method if df['pollution_dims'].nunique() == 1 else f'{method} (+{dims})'\n";
  s += "    ax.errorbar(stats.index, stats['mean'], yerr=stats['sem'], marker='o', capsize=2, label=label)\n";
  s += "if df['full_info_risk'].notna().any() and value == 'true_risk':\n";
  s += "    bench = df.groupby('n')['full_info_risk'].mean()\n";
  s += "    ax.plot(bench.index, bench.values, 'k--', label='full information')\n";
  s += "ax.set_xscale('log', base=2)\n";
  s += "ax.set_xlabel('training sample size N')\n";
  s += std::string("ax.set_ylabel('") + (p_study ? "coefficient of prescriptiveness" : "true risk") + "')\n";
  s += "ax.legend(fontsize=8)\n";
  s += "fig.tight_layout()\n";
  s += "fig.savefig(path.rsplit('.', 1)[0] + '.png', dpi=150)\n";
  return s;
}

}  // namespace prescriptor
