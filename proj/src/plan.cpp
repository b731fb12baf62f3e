#include "steincover/plan.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

namespace steincover::plan {

namespace {

struct ProcTraits {
  std::vector<std::string> required;  // beyond the shared keys
  std::vector<std::string> optional;
  bool uses_p = true;
  bool uses_grid = true;
  bool sphere_rule = false;  // quadrature engine available
  bool selection = false;
};

const std::map<std::string, ProcTraits>& proc_table() {
  static const std::map<std::string, ProcTraits> table = {
      {"usual", {{}, {}, true, true, true, false}},
      {"pospart", {{}, {"a"}, true, true, true, false}},
      {"eb", {{}, {}, true, true, true, false}},
      {"samworth", {{}, {"a"}, true, true, true, false}},
      {"faith", {{"a", "b"}, {}, true, true, false, false}},
      {"tseng_brown_B", {{"tau2"}, {}, true, true, false, false}},
      {"tseng_brown_TB", {{"A", "B"}, {}, true, true, false, false}},
      {"hpd", {{"tau2"}, {}, true, true, true, false}},
      {"hpd_linear", {{"tau2"}, {}, true, true, true, false}},
      {"he", {{}, {"mu"}, true, true, false, false}},
      {"cohen", {{"n", "k"}, {"a_prime"}, false, true, false, false}},
      {"selection_naive", {{"tau2"}, {"mu"}, true, false, false, true}},
      {"selection_he", {{"tau2"}, {"mu"}, true, false, false, true}},
  };
  return table;
}

const std::set<std::string>& global_keys() {
  static const std::set<std::string> keys = {
      "procedure", "p",      "alpha",      "a",     "b",
      "tau2",      "A",      "B",          "k",     "a_prime",
      "mu",        "n",      "ranks",      "bonferroni",
      "theta_grid", "n_rep", "seed",       "engine", "csv",
      "svg"};
  return keys;
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_int(const std::string& s, int& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(value);
  while (std::getline(in, token, ',')) out.push_back(trim(token));
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RawEntry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string id;
  int header_line = 0;
  bool duplicate_id = false;
  std::map<std::string, RawEntry> entries;
};

class Builder {
 public:
  Builder(const Section& sec, std::vector<ParseError>& errors)
      : sec_(sec), errors_(errors) {}

  bool build(SimulationPlan& out) {
    auto proc_it = sec_.entries.find("procedure");
    if (proc_it == sec_.entries.end()) {
      fail(sec_.header_line, "missing required key 'procedure'");
      return false;
    }
    const std::string& proc = proc_it->second.value;
    auto traits_it = proc_table().find(proc);
    if (traits_it == proc_table().end()) {
      std::string msg = "unknown procedure '" + proc + "' (expected one of:";
      for (const auto& id : procedure_ids()) msg += " " + id;
      msg += ")";
      fail(proc_it->second.line, msg);
      return false;
    }
    const ProcTraits& traits = traits_it->second;
    out.procedure = proc;
    out.id = sec_.id;

    check_applicability(proc, traits);
    check_required(traits);

    read_int("p", out.p, 1, "p must be an integer of at least 1");
    read_alpha(out.alpha);
    read_grid(traits, out.theta_grid);
    read_ranks(traits, out.p, out.ranks);
    read_bool("bonferroni", out.bonferroni);
    read_count("n_rep", out.n_rep);
    read_seed(out.base_seed);
    read_engine(proc, traits, out.engine);
    read_path("csv", out.csv_path);
    read_path("svg", out.svg_path);
    read_params(proc, traits, out.params);
    return ok_;
  }

 private:
  void fail(int line, const std::string& message) {
    errors_.push_back({line, message});
    ok_ = false;
  }

  const RawEntry* entry(const std::string& key) const {
    auto it = sec_.entries.find(key);
    return it == sec_.entries.end() ? nullptr : &it->second;
  }

  void check_applicability(const std::string& proc, const ProcTraits& traits) {
    std::set<std::string> allowed = {"procedure", "alpha", "n_rep", "seed",
                                     "engine",    "csv",   "svg"};
    if (traits.uses_p) allowed.insert("p");
    if (traits.uses_grid) allowed.insert("theta_grid");
    if (traits.selection) {
      allowed.insert("ranks");
      allowed.insert("bonferroni");
    }
    for (const auto& k : traits.required) allowed.insert(k);
    for (const auto& k : traits.optional) allowed.insert(k);
    for (const auto& [key, raw] : sec_.entries) {
      if (!allowed.count(key))
        fail(raw.line,
             "key '" + key + "' does not apply to procedure '" + proc + "'");
    }
  }

  void check_required(const ProcTraits& traits) {
    std::vector<std::string> required = {"alpha", "n_rep", "seed", "csv"};
    if (traits.uses_p) required.push_back("p");
    if (traits.uses_grid) required.push_back("theta_grid");
    if (traits.selection) required.push_back("ranks");
    for (const auto& k : traits.required) required.push_back(k);
    for (const auto& k : required) {
      if (!sec_.entries.count(k))
        fail(sec_.header_line, "missing required key '" + k + "'");
    }
  }

  void read_int(const char* key, int& out, int min_value,
                const char* range_msg) {
    const RawEntry* e = entry(key);
    if (!e) return;
    int v = 0;
    if (!parse_int(e->value, v)) {
      fail(e->line, std::string("malformed number for '") + key + "'");
      return;
    }
    if (v < min_value) {
      fail(e->line, range_msg);
      return;
    }
    out = v;
  }

  void read_alpha(double& out) {
    const RawEntry* e = entry("alpha");
    if (!e) return;
    double v = 0.0;
    if (!parse_double(e->value, v)) {
      fail(e->line, "malformed number for 'alpha'");
      return;
    }
    if (!(v > 0.0 && v < 1.0)) {
      fail(e->line, "alpha must lie in (0, 1)");
      return;
    }
    out = v;
  }

  void read_grid(const ProcTraits& traits, std::vector<double>& out) {
    const RawEntry* e = entry("theta_grid");
    if (!e || !traits.uses_grid) return;
    std::vector<double> grid;
    for (const auto& token : split_list(e->value)) {
      double v = 0.0;
      if (token.empty() || !parse_double(token, v)) {
        fail(e->line, "malformed number for 'theta_grid'");
        return;
      }
      if (v < 0.0) {
        fail(e->line, "theta_grid values must be nonnegative");
        return;
      }
      grid.push_back(v);
    }
    if (grid.empty()) {
      fail(e->line, "theta_grid must not be empty");
      return;
    }
    out = grid;
  }

  void read_ranks(const ProcTraits& traits, int p, std::vector<int>& out) {
    const RawEntry* e = entry("ranks");
    if (!e || !traits.selection) return;
    std::vector<int> ranks;
    std::set<int> seen;
    for (const auto& token : split_list(e->value)) {
      int v = 0;
      if (token.empty() || !parse_int(token, v)) {
        fail(e->line, "malformed number for 'ranks'");
        return;
      }
      if (v < 1 || (p > 0 && v > p) || !seen.insert(v).second) {
        fail(e->line, "ranks must be distinct integers in [1, p]");
        return;
      }
      ranks.push_back(v);
    }
    if (ranks.empty()) {
      fail(e->line, "ranks must not be empty");
      return;
    }
    out = ranks;
  }

  void read_bool(const char* key, bool& out) {
    const RawEntry* e = entry(key);
    if (!e) return;
    const std::string& v = e->value;
    if (v == "true" || v == "1") {
      out = true;
    } else if (v == "false" || v == "0") {
      out = false;
    } else {
      fail(e->line, std::string("'") + key + "' must be true or false");
    }
  }

  void read_count(const char* key, std::uint64_t& out) {
    const RawEntry* e = entry(key);
    if (!e) return;
    std::uint64_t v = 0;
    if (!parse_u64(e->value, v)) {
      fail(e->line, std::string("malformed number for '") + key + "'");
      return;
    }
    if (v == 0) {
      fail(e->line, std::string("'") + key + "' must be positive");
      return;
    }
    out = v;
  }

  void read_seed(std::uint64_t& out) {
    const RawEntry* e = entry("seed");
    if (!e) return;
    std::uint64_t v = 0;
    if (!parse_u64(e->value, v)) {
      fail(e->line, "malformed number for 'seed'");
      return;
    }
    out = v;
  }

  void read_engine(const std::string& proc, const ProcTraits& traits,
                   Engine& out) {
    const RawEntry* e = entry("engine");
    if (!e) return;
    const std::string& v = e->value;
    Engine engine;
    if (v == "mc") {
      engine = Engine::mc;
    } else if (v == "quadrature") {
      engine = Engine::quadrature;
    } else if (v == "both") {
      engine = Engine::both;
    } else {
      fail(e->line, "engine must be mc, quadrature, or both");
      return;
    }
    if (engine != Engine::mc && !traits.sphere_rule) {
      fail(e->line, "engine '" + v + "' requires an explicit sphere rule; '" +
                        proc + "' supports only mc");
      return;
    }
    out = engine;
  }

  void read_path(const char* key, std::string& out) {
    const RawEntry* e = entry(key);
    if (!e) return;
    out = e->value;
  }

  void read_params(const std::string& proc, const ProcTraits& traits,
                   std::map<std::string, double>& out) {
    auto take = [&](const std::string& key) {
      const RawEntry* e = entry(key);
      if (!e) return;
      double v = 0.0;
      if (key == "n") {
        int iv = 0;
        if (!parse_int(e->value, iv)) {
          fail(e->line, "malformed number for 'n'");
          return;
        }
        if (iv < 2) {
          fail(e->line, "n must be an integer of at least 2");
          return;
        }
        out[key] = iv;
        return;
      }
      if (!parse_double(e->value, v)) {
        fail(e->line, "malformed number for '" + key + "'");
        return;
      }
      bool positive_needed =
          key == "b" || key == "B" || key == "k" || key == "a_prime" ||
          (key == "a" && (proc == "pospart" || proc == "samworth")) ||
          (key == "tau2" && !traits.selection);
      if (positive_needed && !(v > 0.0)) {
        fail(e->line, "'" + key + "' must be positive");
        return;
      }
      if (key == "A" && v < 0.0) {
        fail(e->line, "'A' must be nonnegative");
        return;
      }
      if (key == "tau2" && traits.selection && v < 0.0) {
        fail(e->line, "'tau2' must be nonnegative");
        return;
      }
      out[key] = v;
    };
    for (const auto& k : traits.required)
      if (k != "ranks") take(k);
    for (const auto& k : traits.optional) take(k);
  }

  const Section& sec_;
  std::vector<ParseError>& errors_;
  bool ok_ = true;
};

}  // namespace

const std::vector<std::string>& procedure_ids() {
  static const std::vector<std::string> ids = {
      "usual",        "pospart",        "eb",
      "samworth",     "faith",          "tseng_brown_B",
      "tseng_brown_TB", "hpd",          "hpd_linear",
      "he",           "cohen",          "selection_naive",
      "selection_he"};
  return ids;
}

ParseResult parse_plan_text(const std::string& text) {
  ParseResult result;
  std::map<std::string, int> id_lines;

  Section current;
  bool in_section = false;

  auto finalize = [&]() {
    if (!in_section) return;
    SimulationPlan pl;
    Builder builder(current, result.errors);
    bool ok = builder.build(pl);
    if (ok && !current.duplicate_id) result.plans.push_back(std::move(pl));
    current = Section{};
    in_section = false;
  };

  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      finalize();
      if (line.back() != ']') {
        result.errors.push_back({line_no, "malformed section header: expected "
                                          "'[plan <id>]' with a plan id"});
        continue;
      }
      std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner == "plan" || inner.rfind("plan ", 0) != 0) {
        result.errors.push_back({line_no, "section header needs a plan id: "
                                          "'[plan <id>]'"});
        continue;
      }
      std::string id = trim(inner.substr(5));
      if (id.find_first_of(" \t") != std::string::npos) {
        result.errors.push_back({line_no, "plan id must be a single token"});
        continue;
      }
      current = Section{};
      current.id = id;
      current.header_line = line_no;
      in_section = true;
      auto [it, inserted] = id_lines.emplace(id, line_no);
      if (!inserted) {
        current.duplicate_id = true;
        result.errors.push_back(
            {line_no, "duplicate plan id '" + id + "' (first defined at line " +
                          std::to_string(it->second) + ")"});
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      result.errors.push_back(
          {line_no, "expected 'key = value' or '[plan <id>]'"});
      continue;
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!in_section) {
      result.errors.push_back(
          {line_no, "key '" + key + "' appears before any [plan] header"});
      continue;
    }
    if (key.empty()) {
      result.errors.push_back({line_no, "expected 'key = value'"});
      continue;
    }
    if (!global_keys().count(key)) {
      result.errors.push_back({line_no, "unknown key '" + key + "'"});
      continue;
    }
    if (value.empty()) {
      result.errors.push_back({line_no, "empty value for key '" + key + "'"});
      continue;
    }
    auto [it, inserted] = current.entries.emplace(key, RawEntry{value, line_no});
    if (!inserted) {
      result.errors.push_back(
          {line_no, "duplicate key '" + key + "' (first set at line " +
                        std::to_string(it->second.line) + ")"});
    }
  }
  finalize();
  return result;
}

std::string serialize_plans(const std::vector<SimulationPlan>& plans) {
  std::ostringstream out;
  bool first = true;
  for (const auto& pl : plans) {
    if (!first) out << "\n";
    first = false;
    out << "[plan " << pl.id << "]\n";
    out << "procedure = " << pl.procedure << "\n";
    if (pl.p != 0) out << "p = " << pl.p << "\n";
    out << "alpha = " << fmt17(pl.alpha) << "\n";
    for (const auto& [key, value] : pl.params) {
      if (key == "n")
        out << "n = " << static_cast<long long>(value) << "\n";
      else
        out << key << " = " << fmt17(value) << "\n";
    }
    if (!pl.theta_grid.empty()) {
      out << "theta_grid = ";
      for (std::size_t i = 0; i < pl.theta_grid.size(); ++i) {
        if (i) out << ", ";
        out << fmt17(pl.theta_grid[i]);
      }
      out << "\n";
    }
    if (!pl.ranks.empty()) {
      out << "ranks = ";
      for (std::size_t i = 0; i < pl.ranks.size(); ++i) {
        if (i) out << ", ";
        out << pl.ranks[i];
      }
      out << "\n";
    }
    if (pl.procedure.rfind("selection_", 0) == 0)
      out << "bonferroni = " << (pl.bonferroni ? "true" : "false") << "\n";
    out << "n_rep = " << pl.n_rep << "\n";
    out << "seed = " << pl.base_seed << "\n";
    const char* engine = pl.engine == Engine::mc          ? "mc"
                         : pl.engine == Engine::quadrature ? "quadrature"
                                                           : "both";
    out << "engine = " << engine << "\n";
    out << "csv = " << pl.csv_path << "\n";
    if (!pl.svg_path.empty()) out << "svg = " << pl.svg_path << "\n";
  }
  return out.str();
}

}  // namespace steincover::plan
