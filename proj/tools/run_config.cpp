#include "run_config.hpp"

#include <charconv>
#include <fstream>

#include "opsurv/errors.hpp"

namespace opsurv::cli {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': bad value '" + value + "'");
  }
  return out;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = strip(text.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(parse_number<int>(item, "hidden"));
    pos = comma + 1;
  }
  return out;
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = strip(stripped.substr(0, eq));
    const std::string value = strip(stripped.substr(eq + 1));
    if (key == "data") {
      config.data_path = value;
    } else if (key == "model") {
      config.model_path = value;
    } else if (key == "out") {
      config.out_path = value;
    } else if (key == "loss_log") {
      config.loss_log_path = value;
    } else if (key == "n_events") {
      config.n_events = parse_number<int>(value, key);
    } else if (key == "max_degree") {
      config.max_degree = parse_number<int>(value, key);
    } else if (key == "quad_order") {
      config.quad_order = parse_number<int>(value, key);
    } else if (key == "hidden") {
      config.hidden_sizes = parse_int_list(value);
    } else if (key == "epochs") {
      config.epochs = parse_number<int>(value, key);
    } else if (key == "batch_size") {
      config.batch_size = parse_number<int>(value, key);
    } else if (key == "learning_rate") {
      config.learning_rate = parse_number<double>(value, key);
    } else if (key == "likelihood_weight") {
      config.likelihood_weight = parse_number<double>(value, key);
    } else if (key == "ranking_weight") {
      config.ranking_weight = parse_number<double>(value, key);
    } else if (key == "seed") {
      config.seed = parse_number<std::uint64_t>(value, key);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
}

}  // namespace opsurv::cli
