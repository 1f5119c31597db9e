#include "welrec/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace welrec {

namespace {

using nlohmann::json;

std::vector<double> to_flat(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

Matrix from_flat(const std::vector<double>& flat, int rows, int cols, const char* what) {
  if (rows < 0 || cols <= 0 || flat.size() != static_cast<std::size_t>(rows) * cols)
    throw std::runtime_error(std::string("bad array length for ") + what);
  Matrix m(rows, cols);
  std::copy(flat.begin(), flat.end(), m.data());
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

void save_world(const LatentWorld& world, const std::string& path) {
  json doc;
  doc["config"] = {{"nb_users", world.config.nb_users},
                   {"nb_prods", world.config.nb_prods},
                   {"nb_sessions", world.config.nb_sessions},
                   {"nb_items_session", world.config.nb_items_session},
                   {"dimension", world.config.dimension},
                   {"latent_variance", world.config.latent_variance},
                   {"price_noise_lo", world.config.price_noise_lo},
                   {"price_noise_hi", world.config.price_noise_hi},
                   {"kappa_true", world.config.kappa_true},
                   {"seed", world.config.seed}};
  doc["user_vecs"] = to_flat(world.user_vecs);
  doc["item_vecs"] = to_flat(world.item_vecs);
  doc["prices"] = std::vector<double>(world.prices.data(),
                                      world.prices.data() + world.prices.size());
  doc["kappa_true"] = world.kappa_true;
  open_out(path) << doc.dump() << '\n';
}

LatentWorld load_world(const std::string& path) {
  const json doc = parse_file(path);
  const json& c = doc.at("config");
  LatentWorld world;
  world.config.nb_users = c.at("nb_users").get<int>();
  world.config.nb_prods = c.at("nb_prods").get<int>();
  world.config.nb_sessions = c.at("nb_sessions").get<int>();
  world.config.nb_items_session = c.at("nb_items_session").get<int>();
  world.config.dimension = c.at("dimension").get<int>();
  world.config.latent_variance = c.at("latent_variance").get<double>();
  world.config.price_noise_lo = c.at("price_noise_lo").get<double>();
  world.config.price_noise_hi = c.at("price_noise_hi").get<double>();
  world.config.kappa_true = c.at("kappa_true").get<double>();
  world.config.seed = c.at("seed").get<std::uint64_t>();
  world.config.validate();
  world.user_vecs = from_flat(doc.at("user_vecs").get<std::vector<double>>(),
                              world.config.nb_users, world.config.dimension, "user_vecs");
  world.item_vecs = from_flat(doc.at("item_vecs").get<std::vector<double>>(),
                              world.config.nb_prods, world.config.dimension, "item_vecs");
  const auto prices = doc.at("prices").get<std::vector<double>>();
  if (prices.size() != static_cast<std::size_t>(world.config.nb_prods))
    throw std::runtime_error("bad array length for prices");
  world.prices = Eigen::Map<const Vector>(prices.data(), prices.size());
  world.kappa_true = doc.at("kappa_true").get<double>();
  return world;
}

void save_events(const std::vector<SessionEvent>& events, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "user,session,exposed,choice\n";
  for (const SessionEvent& e : events) {
    out << e.user << ',' << e.session_index << ',';
    for (std::size_t i = 0; i < e.exposed.size(); ++i) {
      if (i > 0) out << ';';
      out << e.exposed[i];
    }
    out << ',';
    if (e.choice == kNoBuy)
      out << "NOBUY";
    else
      out << e.choice;
    out << '\n';
  }
}

std::vector<SessionEvent> load_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || chomp(line) != "user,session,exposed,choice")
    throw std::runtime_error("bad event log header in " + path);
  std::vector<SessionEvent> events;
  while (std::getline(in, line)) {
    line = chomp(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 4)
      throw std::runtime_error("bad event log row in " + path + ": " + line);
    SessionEvent e;
    e.user = std::stoi(fields[0]);
    e.session_index = std::stoi(fields[1]);
    if (!fields[2].empty())
      for (const std::string& id : split(fields[2], ';')) e.exposed.push_back(std::stoi(id));
    e.choice = fields[3] == "NOBUY" ? kNoBuy : std::stoi(fields[3]);
    events.push_back(std::move(e));
  }
  return events;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  json doc;
  doc["family"] = to_string(params.family);
  doc["d"] = params.dim();
  doc["X"] = to_flat(params.X);
  doc["Y"] = to_flat(params.Y);
  doc["rho"] = std::vector<double>(params.rho.data(), params.rho.data() + params.rho.size());
  open_out(path) << doc.dump() << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
  const json doc = parse_file(path);
  ModelParams params;
  params.family = family_from_string(doc.at("family").get<std::string>());
  const int d = doc.at("d").get<int>();
  if (d < 1) throw std::runtime_error("bad checkpoint dimension");
  const auto x = doc.at("X").get<std::vector<double>>();
  const auto y = doc.at("Y").get<std::vector<double>>();
  if (x.size() % d != 0 || y.size() % d != 0)
    throw std::runtime_error("bad embedding length in " + path);
  params.X = from_flat(x, static_cast<int>(x.size()) / d, d, "X");
  params.Y = from_flat(y, static_cast<int>(y.size()) / d, d, "Y");
  const auto rho = doc.at("rho").get<std::vector<double>>();
  if (rho.size() != static_cast<std::size_t>(params.X.rows()))
    throw std::runtime_error("bad rho length in " + path);
  params.rho = Eigen::Map<const Vector>(rho.data(), rho.size());
  return params;
}

void save_loss_trace(const std::vector<EpochLoss>& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "epoch,mean_nll,reg_term\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << i + 1 << ',' << format_double(trace[i].mean_nll) << ','
        << format_double(trace[i].reg_term) << '\n';
}

void save_slates(const std::vector<SlateSpec>& slates, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "user,method,objective,k,rank,item,evps\n";
  for (const SlateSpec& s : slates)
    for (std::size_t r = 0; r < s.items.size(); ++r)
      out << s.user << ',' << to_string(s.method) << ',' << to_string(s.objective) << ','
          << s.k << ',' << r + 1 << ',' << s.items[r] << ','
          << format_double(s.scores[r]) << '\n';
}

void save_metrics(const std::vector<MetricReport>& reports, const std::string& path,
                  const std::vector<std::uint64_t>* seeds) {
  if (seeds != nullptr && seeds->size() != reports.size())
    throw std::invalid_argument("save_metrics: seeds not parallel to reports");
  std::ofstream out = open_out(path);
  if (seeds != nullptr) out << "seed,";
  out << "method,objective,k,welfare,utility,revenue,sales,precision,"
         "std_welfare,std_utility,std_revenue,std_sales,std_precision,"
         "n_runs,n_nobuy_users\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const MetricReport& r = reports[i];
    if (seeds != nullptr) out << (*seeds)[i] << ',';
    out << to_string(r.method) << ',' << to_string(r.objective) << ',' << r.k << ','
        << format_double(r.welfare) << ',' << format_double(r.utility) << ','
        << format_double(r.revenue) << ',' << format_double(r.sales) << ','
        << format_double(r.precision) << ',' << format_double(r.std_welfare) << ','
        << format_double(r.std_utility) << ',' << format_double(r.std_revenue) << ','
        << format_double(r.std_sales) << ',' << format_double(r.std_precision) << ','
        << r.n_runs << ',' << format_double(r.n_nobuy_users) << '\n';
  }
}

}  // namespace welrec
