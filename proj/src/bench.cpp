#include "multicut/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "multicut/error.hpp"

namespace mc {

double optimality_gap(double value, double reference) {
  if (reference == 0.0) throw InputError("optimality gap undefined for reference value 0");
  return (value - reference) / std::abs(reference);
}

std::optional<double> try_optimality_gap(double value, double reference) {
  if (reference == 0.0) return std::nullopt;
  return (value - reference) / std::abs(reference);
}

namespace {

BenchRecord run_one(const NamedInstance& ni, const std::string& solver,
                    const std::map<std::string, Reference>& refs, const BenchOptions& opt) {
  BenchRecord rec;
  rec.instance = ni.name;
  rec.solver = solver;
  rec.seed = opt.seed;
  if (auto it = refs.find(ni.name); it != refs.end()) {
    rec.reference = it->second.value;
    rec.reference_optimal = it->second.optimal;
  }
  try {
    const SolveOutcome out = solve(solver, ni.instance, opt.solve);
    rec.objective = out.value;
    rec.wall_time = out.wall_time;
    rec.feasible = is_multicut(ni.instance, out.labeling);
    if (rec.reference && rec.reference_optimal) rec.gap = try_optimality_gap(rec.objective, *rec.reference);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Splits one CSV record (RFC 4180 quoting); may consume several lines.
bool read_row(std::istream& is, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string cur;
  bool quoted = false;
  bool any = false;
  for (int ch; (ch = is.get()) != EOF;) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          cur += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      ++line;
      fields.push_back(std::move(cur));
      return true;
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line + 1);
  if (!any) return false;
  fields.push_back(std::move(cur));
  ++line;
  return true;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad integer '" + s + "'", line);
  return v;
}

bool parse_flag(const std::string& s, std::size_t line) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError("expected 0 or 1, got '" + s + "'", line);
}

const char* kHeader = "instance,solver,objective,reference,reference_optimal,gap,wall_time,seed,feasible,error";

} // namespace

std::vector<BenchRecord> run_benchmark(const std::vector<NamedInstance>& instances,
                                       const std::vector<std::string>& solvers,
                                       const std::map<std::string, Reference>& references, const BenchOptions& opt) {
  for (const auto& s : solvers)
    if (!is_solver(s)) throw InputError("unknown solver '" + s + "'");
  std::vector<BenchRecord> out(instances.size() * solvers.size());
  auto job = [&](std::size_t k) { out[k] = run_one(instances[k / solvers.size()], solvers[k % solvers.size()], references, opt); };

  if (!opt.parallel) {
    for (std::size_t k = 0; k < out.size(); ++k) job(k);
    return out;
  }
  // Whole instances go to one worker so that its solver runs stay sequential.
  std::atomic<std::size_t> next{0};
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < instances.size();)
        for (std::size_t s = 0; s < solvers.size(); ++s) job(i * solvers.size() + s);
    });
  for (auto& t : pool) t.join();
  return out;
}

void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << kHeader << '\n';
  for (const auto& r : records) {
    os << quote(r.instance) << ',' << quote(r.solver) << ',' << fmt(r.objective) << ','
       << (r.reference ? fmt(*r.reference) : "") << ',' << (r.reference_optimal ? 1 : 0) << ','
       << (r.gap ? fmt(*r.gap) : "") << ',' << fmt(r.wall_time) << ',' << r.seed << ',' << (r.feasible ? 1 : 0) << ','
       << quote(r.error) << '\n';
  }
}

std::vector<BenchRecord> read_records_csv(std::istream& is) {
  std::vector<std::string> f;
  std::size_t line = 0;
  if (!read_row(is, f, line)) throw ParseError("empty CSV", 1);
  std::string header;
  for (std::size_t k = 0; k < f.size(); ++k) header += (k ? "," : "") + f[k];
  if (header != kHeader) throw ParseError("unexpected header", 1);

  std::vector<BenchRecord> out;
  while (read_row(is, f, line)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 10) throw ParseError("expected 10 fields, got " + std::to_string(f.size()), line);
    BenchRecord r;
    r.instance = f[0];
    r.solver = f[1];
    r.objective = parse_double(f[2], line);
    if (!f[3].empty()) r.reference = parse_double(f[3], line);
    r.reference_optimal = parse_flag(f[4], line);
    if (!f[5].empty()) r.gap = parse_double(f[5], line);
    r.wall_time = parse_double(f[6], line);
    r.seed = parse_u64(f[7], line);
    r.feasible = parse_flag(f[8], line);
    r.error = f[9];
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, Reference> read_references_csv(std::istream& is) {
  std::map<std::string, Reference> out;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (read_row(is, f, line)) {
    if (f.size() == 1 && (f[0].empty() || f[0][0] == '#')) continue;
    if (f.size() != 3) throw ParseError("expected instance,value,optimal", line);
    if (f[0] == "instance") continue;
    out[f[0]] = {parse_double(f[1], line), parse_flag(f[2], line)};
  }
  return out;
}

std::map<std::string, Reference> load_references(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_references_csv(in);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<SolverSummary> summarize(const std::vector<BenchRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  std::map<std::string, SolverSummary> acc;
  for (const auto& r : records) {
    if (!acc.count(r.solver)) order.push_back(r.solver);
    auto& s = acc[r.solver];
    s.solver = r.solver;
    ++s.records;
    if (!r.error.empty()) {
      ++s.failures;
      continue;
    }
    s.feasible += r.feasible;
    series[r.solver].second.push_back(r.wall_time);
    if (r.gap) series[r.solver].first.push_back(*r.gap);
  }
  std::vector<SolverSummary> out;
  for (const auto& name : order) {
    auto s = acc[name];
    const auto& [gaps, times] = series[name];
    s.gap_records = gaps.size();
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    s.mean_gap = mean(gaps);
    s.gap_q25 = quantile(gaps, 0.25);
    s.gap_q75 = quantile(gaps, 0.75);
    s.mean_time = mean(times);
    s.time_q25 = quantile(times, 0.25);
    s.time_q75 = quantile(times, 0.75);
    out.push_back(s);
  }
  return out;
}

void write_summary(std::ostream& os, const std::vector<SolverSummary>& summary) {
  os << "solver,records,feasible,failures,gap_records,mean_gap,gap_q25,gap_q75,mean_time,time_q25,time_q75\n";
  for (const auto& s : summary)
    os << s.solver << ',' << s.records << ',' << s.feasible << ',' << s.failures << ',' << s.gap_records << ','
       << fmt(s.mean_gap) << ',' << fmt(s.gap_q25) << ',' << fmt(s.gap_q75) << ',' << fmt(s.mean_time) << ','
       << fmt(s.time_q25) << ',' << fmt(s.time_q75) << '\n';
}

void write_plot_csv(std::ostream& os, const std::vector<BenchRecord>& records,
                    const std::map<std::string, std::size_t>& node_counts, PlotQuantity quantity) {
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    const auto it = node_counts.find(r.instance);
    if (it == node_counts.end()) continue;
    if (quantity == PlotQuantity::Gap && !r.gap) continue;
    groups[{r.solver, it->second}].push_back(quantity == PlotQuantity::Gap ? *r.gap : r.wall_time);
  }
  os << "solver,x,median,q25,q75\n";
  for (const auto& [key, v] : groups)
    os << key.first << ',' << key.second << ',' << fmt(quantile(v, 0.5)) << ',' << fmt(quantile(v, 0.25)) << ','
       << fmt(quantile(v, 0.75)) << '\n';
}

} // namespace mc
