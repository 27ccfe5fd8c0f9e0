#include "polwishart/dataio.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polwishart/error.hpp"

namespace polwishart {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fixed17(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

[[noreturn]] void invalid_key(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ValidationError, "invalid `" + key + "`: " + why);
}

std::size_t parse_header_field(const std::string& token, const std::string& name) {
  const std::string prefix = name + "=";
  if (token.rfind(prefix, 0) != 0) parse_error("sample header: expected " + prefix + "<int>");
  std::size_t value = 0;
  const char* first = token.data() + prefix.size();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) parse_error("sample header: bad value in " + token);
  return value;
}

double entry_part(const json& v, const std::string& where) {
  if (!v.is_number()) parse_error(where + ": entry components must be numbers");
  return v.get<double>();
}

Complex parse_entry(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) parse_error(where + ": entry must be [re, im]");
  return {entry_part(v[0], where), entry_part(v[1], where)};
}

json entry_json(Complex c) { return json::array({c.real(), c.imag()}); }

HermitianMatrix inline_sigma(const json& rows) {
  if (!rows.is_array() || rows.empty()) invalid_key("sigma", "expected a non-empty p x p array");
  const std::size_t p = rows.size();
  std::vector<Complex> entries;
  entries.reserve(p * p);
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != p) invalid_key("sigma", "rows must have p entries");
    for (const auto& v : row) {
      try {
        entries.push_back(parse_entry(v, "sigma"));
      } catch (const Error& e) {
        invalid_key("sigma", e.what());
      }
    }
  }
  try {
    return HermitianMatrix::from_row_major(p, std::move(entries));
  } catch (const Error& e) {
    invalid_key("sigma", e.what());
  }
}

template <typename T>
T get_as(const json& v, const std::string& key, const char* expected) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    invalid_key(key, std::string("expected ") + expected);
  }
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) invalid_key(key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0)) {
    invalid_key(key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
  if (!v.is_array()) invalid_key(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, key));
  return out;
}

void write_csv_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string alpha_label(double a) { return format_number(a); }

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

MatrixSample read_sample(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) parse_error("sample file is empty");
  std::istringstream header(line);
  std::string magic, version, p_token, n_token, extra;
  header >> magic >> version >> p_token >> n_token;
  if (magic != kSampleMagic) parse_error("sample header must start with wishart-sample");
  if (version != "v" + std::to_string(kSampleFormatVersion)) {
    parse_error("unsupported sample format version " + version);
  }
  if (header >> extra) parse_error("unexpected token in sample header: " + extra);
  const std::size_t p = parse_header_field(p_token, "p");
  const std::size_t n = parse_header_field(n_token, "n");
  if (p == 0) throw Error(ErrorCode::ValidationError, "sample dimension must be positive");

  std::vector<HermitianMatrix> items;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      parse_error(where + ": " + e.what());
    }
    if (!row.is_array()) parse_error(where + ": expected an array of entries");
    if (row.size() != p * p) {
      throw Error(ErrorCode::ValidationError, where + ": expected " + std::to_string(p * p) +
                                                  " entries, found " +
                                                  std::to_string(row.size()));
    }
    std::vector<Complex> entries;
    entries.reserve(p * p);
    for (const auto& v : row) entries.push_back(parse_entry(v, where));
    try {
      items.push_back(HermitianMatrix::from_row_major(p, std::move(entries)));
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }
  if (items.size() != n) {
    throw Error(ErrorCode::ValidationError, "header declares n=" + std::to_string(n) +
                                                " but the file holds " +
                                                std::to_string(items.size()) + " matrices");
  }
  if (items.empty()) throw Error(ErrorCode::EmptySample, "sample file holds no matrices");
  return MatrixSample(std::move(items));
}

MatrixSample read_sample(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_sample(in);
}

void write_sample(std::ostream& out, const MatrixSample& sample) {
  const std::size_t p = sample.dim();
  out << kSampleMagic << " v" << kSampleFormatVersion << " p=" << p << " n=" << sample.size()
      << '\n';
  for (const auto& m : sample) {
    out << '[';
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        if (i + j > 0) out << ',';
        const Complex c = m(i, j);
        out << '[' << fixed17(c.real()) << ',' << fixed17(c.imag()) << ']';
      }
    }
    out << "]\n";
  }
}

void write_sample(const MatrixSample& sample, const fs::path& path, bool overwrite) {
  if (!overwrite && fs::exists(path)) {
    throw Error(ErrorCode::IoError, path.string() + " already exists; refusing to overwrite");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_sample(out, sample);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

HermitianMatrix read_matrix(const fs::path& path) {
  const MatrixSample s = read_sample(path);
  if (s.size() != 1) {
    throw Error(ErrorCode::ValidationError,
                path.string() + ": expected exactly one matrix, found " + std::to_string(s.size()));
  }
  return s[0];
}

ExperimentConfigFile parse_config(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_error(std::string("config: ") + e.what());
  }
  if (!root.is_object()) parse_error("config: top level must be an object");

  static const std::set<std::string> known{"sigma",    "looks",    "pairs",         "alpha",
                                           "replicas", "measures", "beta",          "seed",
                                           "estimate_looks", "dof", "contamination", "workers"};
  for (const auto& [key, _] : root.items()) {
    if (!known.contains(key)) invalid_key(key, "unknown key");
  }
  for (const char* required : {"sigma", "looks", "pairs"}) {
    if (!root.contains(required)) invalid_key(required, "required key is missing");
  }

  ExperimentConfigFile out;
  auto& cfg = out.experiment;

  const json& sigma = root["sigma"];
  if (sigma.is_string()) {
    fs::path p = sigma.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    try {
      cfg.sigma = read_matrix(p);
    } catch (const Error& e) {
      invalid_key("sigma", e.what());
    }
  } else {
    cfg.sigma = inline_sigma(sigma);
  }

  cfg.looks = number_list(root["looks"], "looks");

  const json& pairs = root["pairs"];
  if (!pairs.is_array()) invalid_key("pairs", "expected an array of [n_x, n_y]");
  for (const auto& pr : pairs) {
    if (!pr.is_array() || pr.size() != 2) invalid_key("pairs", "each pair must be [n_x, n_y]");
    cfg.sample_size_pairs.push_back(
        {static_cast<std::size_t>(get_unsigned(pr[0], "pairs")),
         static_cast<std::size_t>(get_unsigned(pr[1], "pairs"))});
  }

  if (root.contains("alpha")) cfg.alpha_levels = number_list(root["alpha"], "alpha");
  if (root.contains("replicas")) cfg.replicas = get_unsigned(root["replicas"], "replicas");
  if (root.contains("beta")) out.beta = get_number(root["beta"], "beta");
  if (!(out.beta > 0.0 && out.beta < 1.0)) invalid_key("beta", "must lie in (0, 1)");
  if (root.contains("measures")) {
    const json& ms = root["measures"];
    if (!ms.is_array()) invalid_key("measures", "expected an array of names");
    cfg.measures.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) invalid_key("measures", "names must be strings");
      try {
        cfg.measures.push_back(parse_measure(m.get<std::string>(), out.beta));
      } catch (const Error& e) {
        invalid_key("measures", e.what());
      }
    }
  } else {
    cfg.measures = all_measures(out.beta);
  }
  if (root.contains("seed")) cfg.base_seed = get_unsigned(root["seed"], "seed");
  if (root.contains("estimate_looks")) {
    if (!root["estimate_looks"].is_boolean()) invalid_key("estimate_looks", "expected a boolean");
    cfg.estimate_looks = root["estimate_looks"].get<bool>();
  }
  if (root.contains("dof") && !root["dof"].is_null()) {
    cfg.dof_override = static_cast<int>(get_unsigned(root["dof"], "dof"));
  }
  if (root.contains("contamination") && !root["contamination"].is_null()) {
    const json& c = root["contamination"];
    if (!c.is_object()) invalid_key("contamination", "expected {\"epsilon\": e, \"scale\": s}");
    for (const auto& [key, _] : c.items()) {
      if (key != "epsilon" && key != "scale") invalid_key("contamination." + key, "unknown key");
    }
    if (!c.contains("epsilon") || !c.contains("scale")) {
      invalid_key("contamination", "both epsilon and scale are required");
    }
    cfg.contamination = ContaminationSpec{get_number(c["epsilon"], "contamination.epsilon"),
                                          get_number(c["scale"], "contamination.scale")};
  }
  if (root.contains("workers")) {
    cfg.workers = static_cast<unsigned>(get_unsigned(root["workers"], "workers"));
  }
  validate(cfg);
  return out;
}

ExperimentConfigFile read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string write_config(const ExperimentConfigFile& config) {
  const auto& cfg = config.experiment;
  json root;
  json sigma = json::array();
  for (std::size_t i = 0; i < cfg.sigma.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < cfg.sigma.dim(); ++j) row.push_back(entry_json(cfg.sigma(i, j)));
    sigma.push_back(std::move(row));
  }
  root["sigma"] = std::move(sigma);
  root["looks"] = cfg.looks;
  json pairs = json::array();
  for (const auto& pr : cfg.sample_size_pairs) pairs.push_back(json::array({pr.n_x, pr.n_y}));
  root["pairs"] = std::move(pairs);
  root["alpha"] = cfg.alpha_levels;
  root["replicas"] = cfg.replicas;
  json measures = json::array();
  for (const auto& m : cfg.measures) measures.push_back(to_string(m));
  root["measures"] = std::move(measures);
  root["beta"] = config.beta;
  root["seed"] = cfg.base_seed;
  root["estimate_looks"] = cfg.estimate_looks;
  root["dof"] = cfg.dof_override ? json(*cfg.dof_override) : json(nullptr);
  root["contamination"] =
      cfg.contamination
          ? json{{"epsilon", cfg.contamination->epsilon}, {"scale", cfg.contamination->scale}}
          : json(nullptr);
  root["workers"] = cfg.workers;
  return root.dump(2) + "\n";
}

void write_size_csv(std::ostream& out, const SizeExperimentResult& result,
                    const std::vector<double>& alpha_levels, bool include_timing) {
  out << "measure,n_x,n_y,looks";
  for (double a : alpha_levels) out << ",size_" << alpha_label(a);
  out << ",mean_distance,cv_percent,wall_time_ms,diverged,failed\n";
  for (const auto& row : result.rows) {
    write_csv_field(out, to_string(row.measure));
    out << ',' << row.n_x << ',' << row.n_y << ',' << format_number(row.looks);
    for (double s : row.empirical_size) out << ',' << format_number(s);
    out << ',' << format_number(row.mean_distance) << ',' << format_number(row.cv) << ',';
    if (include_timing) out << format_number(row.wall_time_ms);
    out << ',' << row.diverged << ',' << row.failed << '\n';
  }
}

void write_robustness_csv(std::ostream& out, const std::vector<RobustnessResultRow>& rows,
                          const std::vector<double>& alpha_levels) {
  out << "n_x,n_y,looks";
  for (double a : alpha_levels) out << ",size_" << alpha_label(a);
  out << ",mean_distance,cv_percent,mse_looks_x,mse_looks_y,r1,rmse_sigma_x,rmse_sigma_y,r2,"
         "failed\n";
  for (const auto& row : rows) {
    out << row.n_x << ',' << row.n_y << ',' << format_number(row.looks);
    for (double s : row.empirical_size) out << ',' << format_number(s);
    for (double v : {row.mean_distance, row.cv, row.mse_looks_x, row.mse_looks_y, row.r1,
                     row.rmse_sigma_x, row.rmse_sigma_y, row.r2}) {
      out << ',' << format_number(v);
    }
    out << ',' << row.failed << '\n';
  }
}

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityPoint>& points) {
  out << "value,measure,distance,status\n";
  for (const auto& pt : points) {
    out << format_number(pt.value) << ',';
    write_csv_field(out, to_string(pt.measure));
    out << ',' << format_number(pt.distance) << ',';
    write_csv_field(out, pt.status);
    out << '\n';
  }
}

void write_blocks_csv(std::ostream& out, const BlockStudyResult& result,
                      const std::vector<double>& alpha_levels) {
  out << "pair,x_begin,x_end,y_ranges,measure,statistic,distance,p_value";
  for (double a : alpha_levels) out << ",reject_" << alpha_label(a);
  out << '\n';
  for (const auto& rec : result.records) {
    const auto& pair = result.pairs[rec.pair_index];
    std::string ranges;
    for (const auto& r : pair.y.ranges) {
      if (!ranges.empty()) ranges += ';';
      ranges += std::to_string(r.begin) + '-' + std::to_string(r.end);
    }
    out << rec.pair_index << ',' << pair.x.begin << ',' << pair.x.end << ',' << ranges << ',';
    write_csv_field(out, to_string(rec.measure));
    out << ',' << format_number(rec.statistic) << ',' << format_number(rec.distance) << ','
        << format_number(rec.p_value);
    for (bool r : rec.reject) out << ',' << (r ? 1 : 0);
    out << '\n';
  }
}

}  // namespace polwishart
