#include "qnoma/trace.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "qnoma/errors.hpp"

namespace qnoma::trace {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError(std::string("trace: bad ") + what + " '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

void write_header(std::ostream& out, const sim::SimConfig& config) {
  out << "# qnoma-trace v1\n";
  out << "# n_users " << config.n_users << "\n";
  out << "# horizon_slots " << config.horizon_slots << "\n";
  out << "# slot_s " << fmt(config.slot_s) << "\n";
  out << "# startup_threshold_s " << fmt(config.startup_threshold_s) << "\n";
  out << "# bandwidth_hz " << fmt(config.bandwidth_hz) << "\n";
  out << "# seed " << config.seed << "\n";
  out << "# mode " << sched::mode_name(config.sched.mode) << "\n";
  out << "# omega " << fmt(config.sched.omega) << "\n";
  out << "# ladder ";
  for (std::size_t i = 0; i < config.ladder.levels.size(); ++i) {
    const auto& lv = config.ladder.levels[i];
    if (i) out << ',';
    out << lv.level_id << ':' << fmt(lv.bitrate_bps) << ':' << fmt(lv.psnr_db);
  }
  out << "\n";
}

void write_slot_row(std::ostream& out, const SlotRow& row) {
  out << "S\t" << row.slot << '\t' << fmt(row.objective) << '\t' << row.plan << '\n';
}

void write_user_row(std::ostream& out, const UserRow& r) {
  out << "U\t" << r.slot << '\t' << r.user << '\t' << fmt(r.gain_lin) << '\t'
      << fmt(r.backlog_s) << '\t';
  if (r.level) {
    out << *r.level;
  } else {
    out << '-';
  }
  out << '\t' << fmt(r.rate_bps) << '\t' << fmt(r.delivered_s) << '\t'
      << fmt(r.buffered_s) << '\t';
  if (r.played_kind == 'L') {
    out << 'L' << r.played_level;
  } else if (r.played_kind == 'S') {
    out << "STALL";
  } else {
    out << '-';
  }
  out << '\t' << (r.joined ? 1 : 0) << '\t' << fmt(r.loss) << '\n';
}

TraceData parse_trace(std::istream& in) {
  TraceData data;
  std::string line;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "qnoma-trace") {
        saw_magic = true;
      } else if (key == "n_users") {
        h >> data.n_users;
      } else if (key == "horizon_slots") {
        h >> data.horizon_slots;
      } else if (key == "slot_s") {
        std::string v;
        h >> v;
        data.slot_s = parse_double(v, "slot_s");
      } else if (key == "startup_threshold_s") {
        std::string v;
        h >> v;
        data.startup_threshold_s = parse_double(v, "startup_threshold_s");
      } else if (key == "bandwidth_hz") {
        std::string v;
        h >> v;
        data.bandwidth_hz = parse_double(v, "bandwidth_hz");
      } else if (key == "seed") {
        h >> data.seed;
      } else if (key == "mode") {
        h >> data.mode;
      } else if (key == "omega") {
        std::string v;
        h >> v;
        data.omega = parse_double(v, "omega");
      } else if (key == "ladder") {
        std::string v;
        h >> v;
        for (const std::string& item : split(v, ',')) {
          auto parts = split(item, ':');
          if (parts.size() != 3) throw ConfigError("trace: bad ladder entry '" + item + "'");
          data.ladder.levels.push_back({std::stoi(parts[0]),
                                        parse_double(parts[1], "ladder bitrate"),
                                        parse_double(parts[2], "ladder psnr")});
        }
      }
      continue;
    }
    auto fields = split(line, '\t');
    if (fields[0] == "S") {
      if (fields.size() != 4) throw ConfigError("trace: malformed S record");
      SlotRow s;
      s.slot = std::stoi(fields[1]);
      s.objective = parse_double(fields[2], "objective");
      s.plan = fields[3];
      data.slots.push_back(s);
    } else if (fields[0] == "U") {
      if (fields.size() != 12) throw ConfigError("trace: malformed U record");
      UserRow r;
      r.slot = std::stoi(fields[1]);
      r.user = std::stoi(fields[2]);
      r.gain_lin = parse_double(fields[3], "gain");
      r.backlog_s = parse_double(fields[4], "backlog");
      if (fields[5] != "-") r.level = std::stoi(fields[5]);
      r.rate_bps = parse_double(fields[6], "rate");
      r.delivered_s = parse_double(fields[7], "delivered");
      r.buffered_s = parse_double(fields[8], "buffered");
      if (fields[9] == "STALL") {
        r.played_kind = 'S';
      } else if (fields[9] != "-") {
        if (fields[9][0] != 'L') throw ConfigError("trace: bad played field '" + fields[9] + "'");
        r.played_kind = 'L';
        r.played_level = std::stoi(fields[9].substr(1));
      }
      r.joined = fields[10] == "1";
      r.loss = parse_double(fields[11], "loss");
      data.rows.push_back(r);
    } else {
      throw ConfigError("trace: unknown record type '" + fields[0] + "'");
    }
  }
  if (!saw_magic) throw ConfigError("trace: missing '# qnoma-trace' header");
  if (data.n_users <= 0) throw ConfigError("trace: missing n_users header");
  data.ladder.validate();
  return data;
}

sim::RunMetrics replay_metrics(const TraceData& data) {
  const std::size_t n = static_cast<std::size_t>(data.n_users);
  sim::RunMetrics m;
  m.users.resize(n);

  std::vector<double> psnr_sum(n, 0.0);
  std::vector<int> psnr_count(n, 0);
  std::vector<double> rate_sum(n, 0.0);
  std::vector<std::optional<int>> join_slot(n);

  for (const UserRow& r : data.rows) {
    std::size_t u = static_cast<std::size_t>(r.user);
    if (u >= n) throw ConfigError("trace: user id out of range");
    rate_sum[u] += r.rate_bps;
    m.users[u].delivered_total_s += r.delivered_s;
    m.users[u].final_buffer_s = r.buffered_s;
    if (r.played_kind == 'L') {
      psnr_sum[u] += data.ladder.level(r.played_level).psnr_db;
      ++psnr_count[u];
      m.users[u].played_total_s += data.slot_s;
    } else if (r.played_kind == 'S') {
      ++m.users[u].stall_count;
    }
    if (r.joined && !join_slot[u]) join_slot[u] = r.slot;
  }

  double agg_psnr = 0.0;
  int psnr_users = 0;
  double join_sum = 0.0;
  int joined_users = 0;
  double rate_total = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    sim::UserMetrics& um = m.users[u];
    if (psnr_count[u] > 0) um.mean_psnr_db = psnr_sum[u] / psnr_count[u];
    um.join_time_slots = join_slot[u];
    um.mean_rate_bps = data.horizon_slots > 0 ? rate_sum[u] / data.horizon_slots : 0.0;
    if (um.mean_psnr_db) {
      agg_psnr += *um.mean_psnr_db;
      ++psnr_users;
    }
    if (um.join_time_slots) {
      join_sum += *um.join_time_slots;
      ++joined_users;
    }
    m.stall_count_total += um.stall_count;
    rate_total += um.mean_rate_bps;
  }
  if (psnr_users > 0) m.mean_psnr_db = agg_psnr / psnr_users;
  if (joined_users > 0) m.mean_join_time_slots = join_sum / joined_users;
  m.mean_rate_bps = n > 0 ? rate_total / static_cast<double>(n) : 0.0;

  double objective_sum = 0.0;
  for (const SlotRow& s : data.slots) objective_sum += s.objective;
  m.mean_objective = data.horizon_slots > 0 ? objective_sum / data.horizon_slots : 0.0;
  return m;
}

}  // namespace qnoma::trace
