/**
 * @file cli.hpp
 * @brief Command-line front end: argument parsing, command dispatch and JSON/CSV output.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspectral/eigen.hpp"
#include "pspectral/models.hpp"
#include "pspectral/verify.hpp"

namespace pspectral::cli {

enum class Format { json, csv };

struct RunConfig {
  std::string command;
  double p = 2.0;
  double n = 0.0;
  double k = 0.0;
  std::optional<double> d;
  std::optional<double> lambda;
  int family = 3;
  double a = 0.0;
  double a_from = 0.0;
  double a_to = 1.0;
  int a_steps = 11;
  double tol = 1e-10;
  int grid = 201;  ///< sample count of the `model` table
  std::string suite = "all";
  Format format = Format::json;
  std::string output;  ///< empty writes to standard output
};

enum ExitCode : int { ok = 0, invalid_arguments = 1, numerical_failure = 2, verification_failure = 3 };

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// Shortest round-trip representation; "inf", "-inf" and "nan" for non-finite values.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& x) const { return x; }
  };
  return std::visit(Visitor{}, c);
}

inline nlohmann::json cell_json(const Cell& c) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, c);
}

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << csv_field(t.header[i]);
  out << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(row[i]));
    out << "\r\n";
  }
}

/// Parses RFC-4180 CSV into string fields (header included as the first record).
inline std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

inline nlohmann::json table_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.header[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

/// A command result: scalar fields and an optional table.
struct Document {
  std::vector<std::pair<std::string, Cell>> fields;
  std::optional<Table> table;
  std::string table_key = "rows";
};

inline void emit(std::ostream& out, const Document& doc, Format format) {
  if (format == Format::json) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : doc.fields) j[key] = cell_json(value);
    if (doc.table) j[doc.table_key] = table_json(*doc.table);
    out << j.dump(2) << "\n";
    return;
  }
  if (doc.table) {
    write_csv(out, *doc.table);
    return;
  }
  Table t;
  t.rows.emplace_back();
  for (const auto& [key, value] : doc.fields) {
    t.header.push_back(key);
    t.rows.back().push_back(value);
  }
  write_csv(out, t);
}

// ---------------------------------------------------------------------------
// Parsing

inline CLI::Validator negative_k() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        const auto v = parse_double(s);
        if (!v || !(*v < 0.0)) return "k must be strictly negative (got " + s + "); k >= 0 is not supported";
        return {};
      },
      "K<0", "negative_k");
}

inline CLI::Validator positive() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        const auto v = parse_double(s);
        if (!v || !(*v > 0.0) || !std::isfinite(*v)) return "value must be a positive finite number (got " + s + ")";
        return {};
      },
      "POSITIVE", "positive");
}

inline CLI::Validator exponent() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        const auto v = parse_double(s);
        if (!v || !(*v > 1.0) || !std::isfinite(*v)) return "p must be a finite number > 1 (got " + s + ")";
        return {};
      },
      "P>1", "exponent");
}

/// Parses argv into `config`. Returns an exit code when the program should stop
/// (help requested or invalid arguments).
inline std::optional<int> parse(int argc, const char* const* argv, RunConfig& config,
                                std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Sharp lower bound for the first Neumann p-Laplacian eigenvalue under Ric >= (n-1)k, k < 0", "pspectral"};
  app.require_subcommand(1, 1);

  std::string format = "json";
  auto common = [&](CLI::App* sub, bool needs_k) {
    sub->add_option("--p", config.p, "exponent p > 1")->check(exponent())->capture_default_str();
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_option("--output,-o", config.output, "output file (default: standard output)");
    if (needs_k) {
      sub->add_option("--n", config.n, "dimension n >= 1")->required()->check(CLI::Range(1.0, 1e300));
      sub->add_option("--k", config.k, "curvature constant k < 0")->required()->check(negative_k());
    }
  };

  auto* lb = app.add_subcommand("lambda-bar", "sharp eigenvalue bound lambda_bar(n, k, d)");
  common(lb, true);
  lb->add_option("--d", config.d, "diameter d > 0")->required()->check(positive());
  lb->add_option("--tol", config.tol, "relative tolerance on lambda")->check(positive())->capture_default_str();

  auto* db = app.add_subcommand("delta-bar", "minimal model diameter delta_bar(n, k, lambda)");
  common(db, true);
  db->add_option("--lambda", config.lambda, "eigenvalue lambda > 0")->required()->check(positive());

  auto* model = app.add_subcommand("model", "sampled model function w_{i,a}");
  common(model, true);
  model->add_option("--lambda", config.lambda, "eigenvalue lambda > 0")->required()->check(positive());
  model->add_option("--family", config.family, "model family 1 (sinh), 2 (exp), 3 (cosh)")->check(CLI::Range(1, 3))->capture_default_str();
  model->add_option("--a", config.a, "start offset a")->capture_default_str();
  model->add_option("--grid", config.grid, "number of samples")->check(CLI::Range(2, 10'000'000))->capture_default_str();

  auto* land = app.add_subcommand("landscape", "b, delta and m over a grid of offsets");
  common(land, true);
  land->add_option("--lambda", config.lambda, "eigenvalue lambda > 0")->required()->check(positive());
  land->add_option("--family", config.family, "model family 1, 2 or 3")->check(CLI::Range(1, 3))->capture_default_str();
  land->add_option("--a-from", config.a_from, "first offset")->capture_default_str();
  land->add_option("--a-to", config.a_to, "last offset")->capture_default_str();
  land->add_option("--a-steps", config.a_steps, "number of offsets")->check(CLI::Range(1, 10'000'000))->capture_default_str();

  auto* ac = app.add_subcommand("alpha-critical", "critical damping threshold alpha_bar");
  common(ac, true);

  auto* ver = app.add_subcommand("verify", "run acceptance suites");
  common(ver, false);
  ver->add_option("--suite", config.suite, "suite name")->check(CLI::IsMember(suite_names()))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::invalid_arguments;
  }
  config.command = app.get_subcommands().front()->get_name();
  config.format = format == "csv" ? Format::csv : Format::json;
  if (config.command == "landscape" && config.a_steps == 1 && config.a_to != config.a_from) {
    err << "landscape: --a-steps 1 requires --a-from == --a-to\n";
    return ExitCode::invalid_arguments;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Commands

inline Document cmd_lambda_bar(const RunConfig& c, std::ostream& err) {
  const EigenEstimate e = lambda_bar(c.n, c.k, *c.d, c.p, c.tol);
  err << "lambda_bar = " << e.value << " (residual " << e.residual << ", " << e.iterations << " iterations)\n";
  Document doc;
  doc.fields = {{"command", std::string("lambda-bar")}, {"p", c.p}, {"n", c.n}, {"k", c.k}, {"d", *c.d},
                {"lambda_bar", e.value}, {"bracket_lo", e.bracket_lo}, {"bracket_hi", e.bracket_hi},
                {"iterations", static_cast<std::int64_t>(e.iterations)}, {"residual", e.residual}};
  return doc;
}

inline Document cmd_delta_bar(const RunConfig& c, std::ostream& err) {
  const EigenEstimate e = delta_bar(c.n, c.k, *c.lambda, c.p);
  err << "delta_bar = " << e.value << "\n";
  Document doc;
  doc.fields = {{"command", std::string("delta-bar")}, {"p", c.p}, {"n", c.n}, {"k", c.k},
                {"lambda", *c.lambda}, {"delta_bar", e.value}, {"a_bar", 0.5 * e.value},
                {"residual", e.residual}};
  return doc;
}

inline Document cmd_model(const RunConfig& c, std::ostream& err) {
  const Params params(c.p, c.n, c.k, *c.lambda);
  const Family family = family_from_index(c.family);
  const ModelSolution sol = solve_model(family, c.a, params);
  const double t0 = c.a;
  const double t1 = sol.t_end();
  Table t;
  t.header = {"t", "w", "wdot", "phi", "e", "residual"};
  for (int j = 0; j < c.grid; ++j) {
    const double s = t0 + (t1 - t0) * j / (c.grid - 1);
    const bool interior = j > 0 && j + 1 < c.grid && !(family == Family::sinh && s <= 0.0);
    const double res = interior ? sol.residual(s) : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({s, sol.w(s), sol.wdot(s), sol.phi(s), sol.e(s), res});
  }
  err << "model " << c.family << " at a = " << c.a << ": delta = " << sol.delta() << ", m = " << sol.m()
      << " (" << to_string(sol.stop_reason()) << ")\n";
  Document doc;
  doc.fields = {{"command", std::string("model")}, {"p", c.p}, {"n", c.n}, {"k", c.k},
                {"lambda", *c.lambda}, {"family", static_cast<std::int64_t>(c.family)}, {"a", c.a},
                {"b", sol.b()}, {"delta", sol.delta()}, {"m", sol.m()}, {"finite", sol.finite()},
                {"stop_reason", std::string(to_string(sol.stop_reason()))}};
  doc.table = std::move(t);
  doc.table_key = "samples";
  return doc;
}

inline Document cmd_landscape(const RunConfig& c, std::ostream& err) {
  const Params params(c.p, c.n, c.k, *c.lambda);
  std::vector<double> grid(c.a_steps);
  for (int j = 0; j < c.a_steps; ++j) {
    grid[j] = c.a_steps == 1 ? c.a_from : c.a_from + (c.a_to - c.a_from) * j / (c.a_steps - 1);
  }
  const auto rows = model_landscape(family_from_index(c.family), grid, params);
  Table t;
  t.header = {"a", "b", "delta", "m", "finite", "error"};
  int failures = 0;
  for (const auto& r : rows) {
    t.rows.push_back({r.a, r.b, r.delta, r.m, r.finite, r.error});
    failures += r.error.empty() ? 0 : 1;
  }
  err << "landscape: " << rows.size() << " offsets, " << failures << " failed\n";
  Document doc;
  doc.fields = {{"command", std::string("landscape")}, {"p", c.p}, {"n", c.n}, {"k", c.k},
                {"lambda", *c.lambda}, {"family", static_cast<std::int64_t>(c.family)}};
  doc.table = std::move(t);
  return doc;
}

inline Document cmd_alpha_critical(const RunConfig& c, std::ostream& err) {
  const AlphaCritical a = alpha_critical(c.p, c.n, c.k);
  err << "alpha_bar = " << a.alpha_bar << "\n";
  Document doc;
  doc.fields = {{"command", std::string("alpha-critical")}, {"p", c.p}, {"n", c.n}, {"k", c.k},
                {"l", a.l}, {"alpha_bar", a.alpha_bar}, {"psi_min", a.psi_min}};
  return doc;
}

inline Document cmd_verify(const RunConfig& c, std::ostream& err, bool& passed) {
  const auto results = run_suites(c.suite);
  Table t;
  t.header = {"id", "suite", "passed", "worst", "limit", "seconds", "detail"};
  passed = true;
  for (const auto& r : results) {
    t.rows.push_back({static_cast<std::int64_t>(r.id), r.suite, r.passed, r.worst, r.limit, r.seconds, r.detail});
    passed = passed && r.passed;
    err << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.suite << "  worst " << r.worst << " limit "
        << r.limit << "  " << r.detail << "\n";
  }
  Document doc;
  doc.fields = {{"command", std::string("verify")}, {"suite", c.suite}, {"passed", passed}};
  doc.table = std::move(t);
  doc.table_key = "suites";
  return doc;
}

/// Executes a parsed configuration; returns the process exit code.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Document doc;
  bool passed = true;
  try {
    if (c.command == "lambda-bar") doc = cmd_lambda_bar(c, err);
    else if (c.command == "delta-bar") doc = cmd_delta_bar(c, err);
    else if (c.command == "model") doc = cmd_model(c, err);
    else if (c.command == "landscape") doc = cmd_landscape(c, err);
    else if (c.command == "alpha-critical") doc = cmd_alpha_critical(c, err);
    else if (c.command == "verify") doc = cmd_verify(c, err, passed);
    else {
      err << "unknown command: " << c.command << "\n";
      return ExitCode::invalid_arguments;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return ExitCode::numerical_failure;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return ExitCode::invalid_arguments;
  } catch (const std::domain_error& e) {
    err << "invalid argument: " << e.what() << "\n";
    return ExitCode::invalid_arguments;
  }

  if (c.output.empty()) {
    emit(out, doc, c.format);
  } else {
    std::ofstream file(c.output, std::ios::binary);
    if (!file) {
      err << "cannot open output file " << c.output << "\n";
      return ExitCode::invalid_arguments;
    }
    emit(file, doc, c.format);
  }
  return passed ? ExitCode::ok : ExitCode::verification_failure;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig config;
  if (const auto code = parse(argc, argv, config, out, err)) return *code;
  return run(config, out, err);
}

}  // namespace pspectral::cli
