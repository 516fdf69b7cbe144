#include <screwsim/csvio.hpp>

#include <screwsim/errors.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ostream>
#include <sstream>

namespace screwsim {

namespace {

const char* kBaseHeader = "t,agent_id,rx,ry,rz,xx,xy,xz,yx,yy,yz,zx,zy,zz,u1,u2,u3";

std::string vec_cells(const Vec3& v) {
  return format_double(v.x()) + "," + format_double(v.y()) + "," + format_double(v.z());
}

std::string vec_line(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& cell, int lineno) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw SchemaError("trajectory csv: bad number '" + cell + "' on line " +
                      std::to_string(lineno));
  }
  return x;
}

Vec3 parse_vec(const std::vector<std::string>& cells, size_t at, int lineno) {
  return {parse_double(cells[at], lineno), parse_double(cells[at + 1], lineno),
          parse_double(cells[at + 2], lineno)};
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples,
                          const ColumnLayout& layout) {
  os << kBaseHeader;
  if (layout.omega) os << ",w1,w2,w3";
  if (layout.b) os << ",b1,b2,b3";
  if (layout.c) os << ",c1,c2,c3";
  os << "\n";
  for (const TrajectorySample& sample : samples) {
    for (size_t k = 0; k < sample.state.agents.size(); ++k) {
      const AgentState& a = sample.state.agents[k];
      os << format_double(sample.t) << ',' << a.id << ',' << vec_cells(a.pose.r) << ','
         << vec_cells(a.pose.R.col(0)) << ',' << vec_cells(a.pose.R.col(1)) << ','
         << vec_cells(a.pose.R.col(2)) << ',' << vec_cells(sample.controls[k]);
      if (layout.omega) os << ',' << vec_cells(sample.ctl[k].omega);
      if (layout.b) os << ',' << vec_cells(sample.ctl[k].b);
      if (layout.c) os << ',' << vec_cells(sample.ctl[k].c);
      os << "\n";
    }
  }
}

TrajectoryData read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("trajectory csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  TrajectoryData out;
  const std::string base = kBaseHeader;
  if (line.compare(0, base.size(), base) != 0) {
    throw SchemaError("trajectory csv: unrecognized header");
  }
  std::string rest = line.substr(base.size());
  auto take = [&rest](const char* group) {
    if (rest.compare(0, std::strlen(group), group) == 0) {
      rest = rest.substr(std::strlen(group));
      return true;
    }
    return false;
  };
  out.layout.omega = take(",w1,w2,w3");
  out.layout.b = take(",b1,b2,b3");
  out.layout.c = take(",c1,c2,c3");
  if (!rest.empty()) throw SchemaError("trajectory csv: unrecognized header columns");

  size_t width = 17;
  if (out.layout.omega) width += 3;
  if (out.layout.b) width += 3;
  if (out.layout.c) width += 3;

  int lineno = 1;
  bool have_time = false;
  double current_t = 0.0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != width) {
      throw SchemaError("trajectory csv: wrong field count on line " +
                        std::to_string(lineno));
    }
    const double t = parse_double(cells[0], lineno);
    if (!have_time || t != current_t) {
      out.samples.push_back({});
      out.samples.back().t = t;
      out.samples.back().state.time = t;
      current_t = t;
      have_time = true;
    }
    TrajectorySample& sample = out.samples.back();

    AgentState a;
    a.id = static_cast<int>(parse_double(cells[1], lineno));
    a.pose.r = parse_vec(cells, 2, lineno);
    a.pose.R.col(0) = parse_vec(cells, 5, lineno);
    a.pose.R.col(1) = parse_vec(cells, 8, lineno);
    a.pose.R.col(2) = parse_vec(cells, 11, lineno);
    sample.state.agents.push_back(a);
    sample.controls.push_back(parse_vec(cells, 14, lineno));
    ControllerState cs;
    size_t at = 17;
    if (out.layout.omega) {
      cs.omega = parse_vec(cells, at, lineno);
      at += 3;
    }
    if (out.layout.b) {
      cs.b = parse_vec(cells, at, lineno);
      at += 3;
    }
    if (out.layout.c) cs.c = parse_vec(cells, at, lineno);
    sample.ctl.push_back(cs);
  }
  if (out.samples.empty()) throw SchemaError("trajectory csv: no data rows");
  const size_t n = out.samples.front().state.agents.size();
  for (const TrajectorySample& s : out.samples) {
    if (s.state.agents.size() != n) {
      throw SchemaError("trajectory csv: inconsistent agent count between samples");
    }
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& metrics) {
  const size_t n = metrics.empty() ? 0 : metrics.front().pitch.size();
  os << "t,V,V_x,S,Q,U,xav_norm,twist_dispersion,max_ortho_drift,"
     << "xav_x,xav_y,xav_z,rav_x,rav_y,rav_z,vav_x,vav_y,vav_z,wav_x,wav_y,wav_z";
  for (size_t k = 1; k <= n; ++k) os << ",pitch_" << k;
  os << "\n";
  auto cell = [](const std::optional<double>& x) {
    return x ? format_double(*x) : std::string();
  };
  auto vcells = [](const std::optional<Vec3>& v) {
    return v ? vec_cells(*v) : std::string(",,");
  };
  for (const MetricsRecord& m : metrics) {
    os << format_double(m.t) << ',' << format_double(m.V) << ',' << format_double(m.V_x)
       << ',' << cell(m.S) << ',' << cell(m.Q) << ',' << cell(m.U) << ','
       << format_double(m.xav_norm) << ',' << format_double(m.twist_dispersion) << ','
       << format_double(m.max_ortho_drift) << ',' << vec_cells(m.x_av) << ','
       << vec_cells(m.r_av) << ',' << vcells(m.v_av) << ',' << vcells(m.w_av);
    for (const std::optional<double>& p : m.pitch) os << ',' << cell(p);
    os << "\n";
  }
}

std::string verdict_text(const EquilibriumVerdict& v) {
  std::ostringstream os;
  os << "kind: " << kind_name(v.kind) << "\n";
  os << "window_start: " << format_double(v.t_a) << "\n";
  os << "window_end: " << format_double(v.t_b) << "\n";
  os << "residual: " << format_double(v.residual) << "\n";
  os << "mean_linear: " << vec_line(v.mean_twist.linear) << "\n";
  os << "mean_angular: " << vec_line(v.mean_twist.angular) << "\n";
  if (v.screw) {
    os << "pitch: " << format_double(v.screw->pitch) << "\n";
    os << "axis_point: " << vec_line(v.screw->axis_point) << "\n";
    os << "axis_direction: " << vec_line(v.screw->axis_direction) << "\n";
    os << "magnitude: " << format_double(v.screw->magnitude) << "\n";
  }
  return os.str();
}

std::string run_summary_text(const SimResult& res) {
  std::ostringstream os;
  os << verdict_text(res.verdict);
  os << "max_ortho_drift: " << format_double(res.max_ortho_drift) << "\n";
  os << "max_heading_error: " << format_double(res.max_heading_error) << "\n";
  if (!res.monitored_potential.empty() && res.max_potential_increase) {
    os << "monitored_potential: " << res.monitored_potential << "\n";
    os << "max_potential_increase: " << format_double(*res.max_potential_increase)
       << "\n";
  }
  return os.str();
}

}  // namespace screwsim
