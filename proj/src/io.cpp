#include "multicut/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

#include "multicut/error.hpp"

namespace mc {

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

class Tokenizer {
public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  bool next(Token& tok) {
    while (pos_ >= words_.size()) {
      std::string raw;
      if (!std::getline(in_, raw)) return false;
      ++line_;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      std::istringstream ss(raw);
      words_.clear();
      pos_ = 0;
      for (std::string w; ss >> w;) words_.push_back(std::move(w));
    }
    tok = {words_[pos_++], line_};
    return true;
  }

  Token expect(const char* what) {
    Token t;
    if (!next(t)) throw ParseError(std::string("unexpected end of input, expected ") + what, line_ ? line_ : 1);
    return t;
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::istream& in_;
  std::vector<std::string> words_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

long long to_int(const Token& t, const char* what) {
  long long v = 0;
  auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc{} || p != t.text.data() + t.text.size())
    throw ParseError(std::string("expected integer ") + what + ", got '" + t.text + "'", t.line);
  return v;
}

double to_real(const Token& t, const char* what) {
  // strtod accepts the unicode-free forms written by write_instance.
  char* end = nullptr;
  const double v = std::strtod(t.text.c_str(), &end);
  if (end != t.text.c_str() + t.text.size() || !std::isfinite(v))
    throw ParseError(std::string("expected finite real ") + what + ", got '" + t.text + "'", t.line);
  return v;
}

std::size_t to_count(const Token& t, const char* what) {
  const long long v = to_int(t, what);
  if (v < 0) throw ParseError(std::string(what) + " must be non-negative", t.line);
  return static_cast<std::size_t>(v);
}

Instance parse_edgelist(Tokenizer& tz, bool negate) {
  const Token tn = tz.expect("node count");
  const std::size_t n = to_count(tn, "node count");
  const Token tm = tz.expect("edge count");
  const std::size_t m = to_count(tm, "edge count");
  if (tn.line != tm.line) throw ParseError("header must be \"n m\" on one line", tm.line);
  if (m > pair_count(n)) throw ParseError("edge count exceeds n(n-1)/2", tm.line);

  std::vector<Edge> edges;
  edges.reserve(m);
  std::vector<std::uint8_t> seen(pair_count(n), 0);
  for (std::size_t e = 0; e < m; ++e) {
    const Token ti = tz.expect("edge endpoint");
    const Token tj = tz.expect("edge endpoint");
    const Token tc = tz.expect("edge cost");
    if (tj.line != ti.line || tc.line != ti.line) throw ParseError("edge line must read \"i j c\"", tc.line);
    const long long i = to_int(ti, "endpoint");
    const long long j = to_int(tj, "endpoint");
    const double c = to_real(tc, "cost");
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n)
      throw ParseError("node index out of range", ti.line);
    if (i == j) throw ParseError("self loop", ti.line);
    auto& s = seen[pair_index(n, i, j)];
    if (s) throw ParseError("duplicate edge " + std::to_string(i) + " " + std::to_string(j), ti.line);
    s = 1;
    edges.push_back({static_cast<Node>(i), static_cast<Node>(j), negate ? -c : c});
  }
  if (Token extra; tz.next(extra)) throw ParseError("more edges than declared in the header", extra.line);
  return Instance(n, std::move(edges));
}

Instance parse_lower_triangle(Tokenizer& tz, bool negate) {
  const std::size_t n = to_count(tz.expect("node count"), "node count");
  std::vector<Edge> edges;
  edges.reserve(pair_count(n));
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      Token t;
      if (!tz.next(t))
        throw ParseError("expected " + std::to_string(pair_count(n)) + " costs, got " + std::to_string(edges.size()),
                         tz.line() ? tz.line() : 1);
      const double c = to_real(t, "cost");
      edges.push_back({static_cast<Node>(j), static_cast<Node>(i), negate ? -c : c});
    }
  if (Token extra; tz.next(extra)) throw ParseError("more costs than n(n-1)/2", extra.line);
  return Instance(n, std::move(edges));
}

} // namespace

InstanceFormat parse_format(const std::string& name) {
  if (name == "edgelist") return InstanceFormat::Edgelist;
  if (name == "lt" || name == "lower-triangle") return InstanceFormat::LowerTriangle;
  throw InputError("unknown instance format '" + name + "'");
}

Instance parse_instance(std::istream& in, InstanceFormat format, bool negate) {
  Tokenizer tz(in);
  return format == InstanceFormat::Edgelist ? parse_edgelist(tz, negate) : parse_lower_triangle(tz, negate);
}

Instance parse_instance(const std::string& path, InstanceFormat format, bool negate) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_instance(in, format, negate);
}

void write_instance(std::ostream& out, const Instance& inst, InstanceFormat format) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (format == InstanceFormat::Edgelist) {
    out << inst.node_count() << ' ' << inst.edge_count() << '\n';
    for (const auto& e : inst.edges()) out << e.i << ' ' << e.j << ' ' << e.cost << '\n';
    return;
  }
  if (!inst.is_complete()) throw InputError("lower-triangle output needs a complete instance");
  const auto ci = complete(inst);
  out << ci.node_count() << '\n';
  for (std::size_t i = 1; i < ci.node_count(); ++i) {
    for (std::size_t j = 0; j < i; ++j) out << (j ? " " : "") << ci.cost(i, j);
    out << '\n';
  }
}

void write_instance(const std::string& path, const Instance& inst, InstanceFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_instance(out, inst, format);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Instance generate_random(std::size_t n, long long lo, long long hi, std::uint64_t seed) {
  if (n < 2) throw InputError("generate_random needs n >= 2");
  if (lo > hi) throw InputError("generate_random needs lo <= hi");
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  edges.reserve(pair_count(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      edges.push_back({static_cast<Node>(i), static_cast<Node>(j), static_cast<double>(uniform_int(rng, lo, hi))});
  return Instance(n, std::move(edges));
}

} // namespace mc
