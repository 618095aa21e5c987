#include "rwslow/descriptors.hpp"

#include <cctype>
#include <charconv>

#include "rwslow/error.hpp"
#include "rwslow/subordination.hpp"

namespace rwslow {

namespace {

std::string strip(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

int parse_count(const std::string& s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(std::string("expected integer ") + what + ", got '" + s + "'");
  if (v < 0) throw ParseError(std::string(what) + " must be non-negative");
  return v;
}

void expect_args(const Token& t, std::size_t n) {
  if (!t.has_parens || t.args.size() != n)
    throw ParseError(t.head + " takes " + std::to_string(n) + " arguments");
}

std::string coeff_token(const std::string& s) {
  if (s.starts_with("alpha:")) return "alpha:" + format_number(parse_number(s.substr(6)));
  if (s.starts_with("levy:")) return "levy:" + BernsteinRep::parse(s.substr(5)).name();
  if (s.starts_with("direct(") && s.ends_with(")")) return "direct(" + SlowVaryFn::parse(s.substr(7, s.size() - 8)).token() + ")";
  throw ParseError("unknown coefficient token '" + s + "'");
}

std::string base_arg(const std::string& s) {
  if (!s.starts_with("base=")) throw ParseError("subord expects base=<descriptor> as its second argument");
  return s.substr(5);
}

bool complete_flag(const Token& t) {
  if (t.args.size() == 5) {
    if (t.args[4] != "complete") throw ParseError("subord's optional fifth argument must be 'complete'");
    return true;
  }
  if (t.args.size() != 4) throw ParseError("subord takes 4 or 5 arguments");
  return false;
}

}  // namespace

Token split_token(std::string_view text) {
  const std::string s = strip(text);
  Token t;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    if (s.find(')') != std::string::npos) throw ParseError("unbalanced parentheses in '" + s + "'");
    t.head = s;
    return t;
  }
  if (s.back() != ')') throw ParseError("descriptor must end with ')': '" + s + "'");
  t.head = s.substr(0, open);
  t.has_parens = true;
  int depth = 0;
  std::string cur;
  for (std::size_t i = open + 1; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) throw ParseError("unbalanced parentheses in '" + s + "'");
    if (c == ',' && depth == 0) {
      t.args.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (depth != 0) throw ParseError("unbalanced parentheses in '" + s + "'");
  if (!cur.empty() || !t.args.empty()) t.args.push_back(cur);
  return t;
}

std::string normalize_measure(std::string_view descriptor) {
  const Token t = split_token(descriptor);
  if (t.head == "delta" || t.head == "lazy") {
    if (t.has_parens) throw ParseError(t.head + " takes no arguments");
    return t.head;
  }
  if (t.head == "radialV" || t.head == "radialD" || t.head == "genpow") {
    expect_args(t, 2);
    return t.head + "(" + SlowVaryFn::parse(t.args[0]).token() + "," + std::to_string(parse_count(t.args[1], "radius")) + ")";
  }
  if (t.head == "stable") {
    expect_args(t, 2);
    return "stable(" + format_number(parse_number(t.args[0])) + "," + std::to_string(parse_count(t.args[1], "radius")) + ")";
  }
  if (t.head == "lazify") {
    expect_args(t, 1);
    return "lazify(" + normalize_measure(t.args[0]) + ")";
  }
  if (t.head == "subord") {
    const bool complete = complete_flag(t);
    return "subord(" + coeff_token(t.args[0]) + ",base=" + normalize_measure(base_arg(t.args[1])) + "," +
           std::to_string(parse_count(t.args[2], "N")) + "," + std::to_string(parse_count(t.args[3], "cap")) +
           (complete ? ",complete)" : ")");
  }
  throw ParseError("unknown measure '" + t.head + "'");
}

Measure parse_measure(const Group& group, std::string_view descriptor) {
  const Token t = split_token(descriptor);
  if (t.head == "delta" || t.head == "lazy") {
    if (t.has_parens) throw ParseError(t.head + " takes no arguments");
    return t.head == "delta" ? delta_measure(group) : lazy_uniform(group);
  }
  if (t.head == "radialV" || t.head == "radialD") {
    expect_args(t, 2);
    return radial(group, SlowVaryFn::parse(t.args[0]), t.head == "radialV" ? RadialVariant::Volume : RadialVariant::Degree,
                  parse_count(t.args[1], "radius"));
  }
  if (t.head == "genpow") {
    expect_args(t, 2);
    return generator_power(group, SlowVaryFn::parse(t.args[0]), parse_count(t.args[1], "radius"));
  }
  if (t.head == "stable") {
    expect_args(t, 2);
    return stable_like(group, parse_number(t.args[0]), parse_count(t.args[1], "radius"));
  }
  if (t.head == "lazify") {
    expect_args(t, 1);
    return lazify(parse_measure(group, t.args[0]));
  }
  if (t.head == "subord") {
    const bool complete = complete_flag(t);
    const Measure base = parse_measure(group, base_arg(t.args[1]));
    const auto coeffs = coeffs_from_token(t.args[0], static_cast<std::size_t>(parse_count(t.args[2], "N")));
    return subordinate(base, coeffs, parse_count(t.args[3], "cap"), complete ? SubordMode::Complete : SubordMode::Truncate);
  }
  throw ParseError("unknown measure '" + t.head + "'");
}

}  // namespace rwslow
