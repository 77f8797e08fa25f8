#include "spinn/runconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace spinn {

namespace {

struct Line {
  int number;
  std::string key;
  std::string value;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

long long parse_int(const Line& ln) {
  long long v = 0;
  auto [p, ec] = std::from_chars(ln.value.data(),
                                 ln.value.data() + ln.value.size(), v);
  if (ec != std::errc() || p != ln.value.data() + ln.value.size())
    fail(ln.number, "expected integer for '" + ln.key + "', got '" +
                        ln.value + "'");
  return v;
}

double parse_double(const Line& ln) {
  try {
    std::size_t pos = 0;
    double v = std::stod(ln.value, &pos);
    if (pos != ln.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(ln.number, "expected number for '" + ln.key + "', got '" + ln.value +
                        "'");
  }
}

std::vector<int> parse_int_list(const Line& ln) {
  std::vector<int> out;
  std::stringstream ss(ln.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(ln.number, "empty entry in list");
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      fail(ln.number, "expected integer list, got '" + ln.value + "'");
    }
  }
  if (out.empty()) fail(ln.number, "empty list for '" + ln.key + "'");
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int number = 0;
  bool seen_problem = false;
  while (std::getline(is, raw)) {
    ++number;
    std::string line = trim(raw);
    auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "train" && section != "eval")
        fail(number, "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(number, "expected 'key = value'");
    Line ln{number, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (ln.key.empty()) fail(number, "missing key");
    if (ln.value.empty()) fail(number, "missing value for '" + ln.key + "'");

    if (section.empty()) {
      if (ln.key == "problem") {
        cfg.problem = ln.value;
        seen_problem = true;
      } else if (ln.key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(ln));
      } else if (ln.key == "out") {
        cfg.out_dir = ln.value;
      } else {
        fail(number, "unknown key '" + ln.key + "'");
      }
    } else if (section == "model") {
      if (ln.key == "rank") cfg.rank = static_cast<int>(parse_int(ln));
      else if (ln.key == "depth") cfg.depth = static_cast<int>(parse_int(ln));
      else if (ln.key == "width") cfg.width = static_cast<int>(parse_int(ln));
      else if (ln.key == "variant") {
        if (ln.value == "plain") cfg.variant = MlpVariant::plain;
        else if (ln.value == "modified") cfg.variant = MlpVariant::modified;
        else fail(number, "variant must be 'plain' or 'modified'");
      } else {
        fail(number, "unknown key '" + ln.key + "' in [model]");
      }
    } else if (section == "train") {
      if (ln.key == "iterations")
        cfg.train.iterations = static_cast<int>(parse_int(ln));
      else if (ln.key == "lr") cfg.train.lr = parse_double(ln);
      else if (ln.key == "beta1") cfg.train.beta1 = parse_double(ln);
      else if (ln.key == "beta2") cfg.train.beta2 = parse_double(ln);
      else if (ln.key == "eps") cfg.train.eps = parse_double(ln);
      else if (ln.key == "resample_interval")
        cfg.train.resample_interval = static_cast<int>(parse_int(ln));
      else if (ln.key == "points") cfg.train.points = parse_int_list(ln);
      else if (ln.key == "bc_points")
        cfg.train.bc_points = parse_int_list(ln);
      else if (ln.key == "log_interval")
        cfg.train.log_interval = static_cast<int>(parse_int(ln));
      else if (ln.key == "eval_interval")
        cfg.train.eval_interval = static_cast<int>(parse_int(ln));
      else if (ln.key == "checkpoint_interval")
        cfg.train.checkpoint_interval = static_cast<int>(parse_int(ln));
      else
        fail(number, "unknown key '" + ln.key + "' in [train]");
    } else if (section == "eval") {
      if (ln.key == "resolution")
        cfg.eval_resolution = static_cast<int>(parse_int(ln));
      else
        fail(number, "unknown key '" + ln.key + "' in [eval]");
    }
  }
  if (!seen_problem) throw ConfigError("config is missing 'problem ='");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open config: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace spinn
