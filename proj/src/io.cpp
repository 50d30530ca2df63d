#include "logifold/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "logifold/error.hpp"

namespace logifold::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& origin, const std::string& msg) {
  fail(ErrorCode::MalformedFile, origin + ": " + msg);
}

[[noreturn]] void malformed_at(const std::string& origin, std::size_t line, const std::string& msg) {
  fail(ErrorCode::MalformedFile, origin + ":" + std::to_string(line) + ": " + msg);
}

// ---- emitting ----

void emit(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // numeric rows stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(j[i], out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "cannot write a non-finite number");
      out += format_number(v);
      return;
    }
    default:
      out += j.dump();
  }
}

std::string dump(const json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

json parse(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
    malformed_at(origin, line, "invalid JSON");
  }
}

// Runs a reader body, turning JSON type errors and builder errors into
// MalformedFile diagnostics.
template <class F>
auto guarded(const std::string& origin, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    malformed(origin, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedFile) throw;
    malformed(origin, e.what());
  }
}

const json& field(const json& j, const char* key, const std::string& origin, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) malformed(origin, where + ": missing field '" + key + "'");
  return j.at(key);
}

json affine_json(const AffineMap& a) {
  json rows = json::array();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (double v : a.row(r)) row.push_back(v);
    rows.push_back(row);
  }
  return {{"matrix", rows}, {"offset", a.offsets()}};
}

AffineMap affine_from(const json& j, const std::string& origin, const std::string& where) {
  const auto offset = field(j, "offset", origin, where).get<std::vector<double>>();
  const json& m = field(j, "matrix", origin, where);
  if (!m.is_array() || m.size() != offset.size()) malformed(origin, where + ": matrix and offset differ in rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : m) rows.push_back(r.get<std::vector<double>>());
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) malformed(origin, where + ": ragged matrix");
  }
  return AffineMap::from_rows(rows, offset);
}

json partition_json(const TargetPartition& p) { return p.blocks; }

TargetPartition partition_from(const json& j, const std::string& origin) {
  TargetPartition p{j.get<std::vector<std::vector<int>>>()};
  try {
    p.check();
  } catch (const Error& e) {
    malformed(origin, e.what());
  }
  return p;
}

// ---- CSV ----

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  out.push_back(cell);
  for (auto& c : out) {
    const auto b = c.find_first_not_of(' ');
    const auto e = c.find_last_not_of(' ');
    c = b == std::string::npos ? "" : c.substr(b, e - b + 1);
  }
  return out;
}

struct CsvLine {
  std::size_t number;
  std::vector<std::string> cells;
};

std::vector<CsvLine> csv_lines(const std::string& text) {
  std::vector<CsvLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    out.push_back({n, split_line(line)});
  }
  return out;
}

double parse_double(const std::string& s, const std::string& origin, std::size_t line) {
  if (s.empty()) malformed_at(origin, line, "empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) malformed_at(origin, line, "bad number '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const std::string& origin, std::size_t line) {
  if (s.empty()) malformed_at(origin, line, "empty integer");
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) malformed_at(origin, line, "bad integer '" + s + "'");
  return v;
}

void expect_header(const CsvLine& h, const std::vector<std::string>& want, const std::string& origin) {
  if (h.cells != want) {
    std::string s;
    for (std::size_t i = 0; i < want.size(); ++i) s += (i ? "," : "") + want[i];
    malformed_at(origin, h.number, "expected header " + s);
  }
}

json arrow_map_json(const ArrowMap& m) {
  json j{{"kind", std::string(to_string(m.kind))}};
  switch (m.kind) {
    case MapKind::AffineSigmoid:
    case MapKind::AffineSoftmax: j["affine"] = affine_json(m.affine); break;
    case MapKind::Project:
    case MapKind::CoordProduct: j["indices"] = m.indices; break;
    case MapKind::Diagonal: j["copies"] = m.copies; break;
    case MapKind::Constant:
      j["space"] = m.space.factors;
      j["point"] = m.point;
      break;
    case MapKind::Block:
      j["first"] = m.first;
      j["count"] = m.count;
      j["inner"] = arrow_map_json(*m.inner);
      break;
    default: break;
  }
  return j;
}

ArrowMap arrow_map_from(const json& j, const std::string& origin, const std::string& where) {
  const MapKind kind = map_kind_from_string(field(j, "kind", origin, where).get<std::string>());
  switch (kind) {
    case MapKind::Identity: return ArrowMap::identity();
    case MapKind::AffineSigmoid: return ArrowMap::affine_sigmoid(affine_from(field(j, "affine", origin, where), origin, where));
    case MapKind::AffineSoftmax: return ArrowMap::affine_softmax(affine_from(field(j, "affine", origin, where), origin, where));
    case MapKind::Project: return ArrowMap::project(field(j, "indices", origin, where).get<std::vector<std::size_t>>());
    case MapKind::CoordProduct:
      return ArrowMap::coord_product(field(j, "indices", origin, where).get<std::vector<std::size_t>>());
    case MapKind::Diagonal: return ArrowMap::diagonal(field(j, "copies", origin, where).get<std::size_t>());
    case MapKind::Constant:
      return ArrowMap::constant(StateSpace{field(j, "space", origin, where).get<std::vector<std::size_t>>()},
                                field(j, "point", origin, where).get<Point>());
    case MapKind::Min: return ArrowMap::min();
    case MapKind::Max: return ArrowMap::max();
    case MapKind::Block:
      return ArrowMap::block(field(j, "first", origin, where).get<std::size_t>(),
                             field(j, "count", origin, where).get<std::size_t>(),
                             arrow_map_from(field(j, "inner", origin, where), origin, where + ".inner"));
  }
  return ArrowMap::identity();
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MalformedFile, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, path + ": cannot write file");
  out << text;
  if (!out) fail(ErrorCode::InvalidArgument, path + ": write failed");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- graphs ----

std::string graph_to_json(const LogicalGraph& g) {
  json j;
  j["input_dim"] = g.input_dim();
  j["vertices"] = json::array();
  j["arrows"] = json::array();
  j["guards"] = json::object();
  j["routing"] = json::object();
  j["target_labels"] = json::object();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& vx = g.vertex(v);
    j["vertices"].push_back({{"id", vx.id}, {"kind", std::string(to_string(vx.kind))}});
    if (g.guard(v)) j["guards"][vx.id] = affine_json(*g.guard(v));
    if (!g.routing(v).empty()) {
      json r = json::object();
      for (const auto& [sign, a] : g.routing(v)) r[sign] = g.arrow(a).id;
      j["routing"][vx.id] = r;
    }
    if (g.label(v)) j["target_labels"][vx.id] = *g.label(v);
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    const auto& ar = g.arrow(a);
    j["arrows"].push_back({{"id", ar.id}, {"src", g.vertex(ar.src).id}, {"dst", g.vertex(ar.dst).id}});
  }
  return dump(j);
}

namespace {

std::size_t vertex_ref(const std::optional<std::size_t>& v, const std::string& id, const std::string& origin) {
  if (!v) malformed(origin, "unknown vertex '" + id + "'");
  return *v;
}

std::size_t arrow_ref(const std::optional<std::size_t>& a, const std::string& id, const std::string& origin) {
  if (!a) malformed(origin, "unknown arrow '" + id + "'");
  return *a;
}

SignVector sign_key(const std::string& s, const std::string& origin) {
  if (!SignVector::is_valid_key(s)) malformed(origin, "bad sign vector '" + s + "'");
  return SignVector(s);
}

}  // namespace

LogicalGraph graph_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] {
    LogicalGraph g(field(j, "input_dim", origin, "graph").get<std::size_t>());
    const json& vs = field(j, "vertices", origin, "graph");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string w = "vertices[" + std::to_string(i) + "]";
      g.add_vertex(field(vs[i], "id", origin, w).get<std::string>(),
                   vertex_kind_from_string(field(vs[i], "kind", origin, w).get<std::string>()));
    }
    const json& as = field(j, "arrows", origin, "graph");
    for (std::size_t i = 0; i < as.size(); ++i) {
      const std::string w = "arrows[" + std::to_string(i) + "]";
      const auto src = field(as[i], "src", origin, w).get<std::string>();
      const auto dst = field(as[i], "dst", origin, w).get<std::string>();
      g.add_arrow(field(as[i], "id", origin, w).get<std::string>(), vertex_ref(g.find_vertex(src), src, origin),
                  vertex_ref(g.find_vertex(dst), dst, origin));
    }
    if (j.contains("guards")) {
      for (const auto& [id, m] : j.at("guards").items()) {
        g.set_guard(vertex_ref(g.find_vertex(id), id, origin), affine_from(m, origin, "guards." + id));
      }
    }
    if (j.contains("routing")) {
      for (const auto& [id, table] : j.at("routing").items()) {
        const std::size_t v = vertex_ref(g.find_vertex(id), id, origin);
        for (const auto& [sign, a] : table.items()) {
          const auto aid = a.get<std::string>();
          g.set_route(v, sign_key(sign, origin), arrow_ref(g.find_arrow(aid), aid, origin));
        }
      }
    }
    if (j.contains("target_labels")) {
      for (const auto& [id, label] : j.at("target_labels").items()) {
        g.set_label(vertex_ref(g.find_vertex(id), id, origin), label.get<std::string>());
      }
    }
    return g;
  });
}

// ---- models ----

std::string network_to_json(const NetworkSpec& net) {
  json j;
  j["input_dim"] = net.input_dim;
  j["hidden_activation"] = std::string(to_string(net.hidden));
  j["final_activation"] = std::string(to_string(net.final_activation));
  j["layers"] = json::array();
  for (const auto& l : net.layers) j["layers"].push_back(affine_json(l));
  if (!net.heads.empty()) {
    j["heads"] = json::array();
    for (const auto& h : net.heads) j["heads"].push_back(affine_json(h));
  }
  return dump(j);
}

NetworkSpec network_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] {
    NetworkSpec net;
    net.input_dim = field(j, "input_dim", origin, "model").get<std::size_t>();
    net.hidden = activation_from_string(field(j, "hidden_activation", origin, "model").get<std::string>());
    net.final_activation = final_activation_from_string(field(j, "final_activation", origin, "model").get<std::string>());
    const json& ls = field(j, "layers", origin, "model");
    for (std::size_t i = 0; i < ls.size(); ++i) net.layers.push_back(affine_from(ls[i], origin, "layers[" + std::to_string(i) + "]"));
    if (j.contains("heads")) {
      const json& hs = j.at("heads");
      for (std::size_t i = 0; i < hs.size(); ++i) net.heads.push_back(affine_from(hs[i], origin, "heads[" + std::to_string(i) + "]"));
    }
    net.check();
    return net;
  });
}

// ---- semilinear ----

namespace {

json rows_json(const std::vector<LinearRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row = r.a;
    row.push_back(r.b);
    out.push_back(row);
  }
  return out;
}

std::vector<LinearRow> rows_from(const json& j, std::size_t dim, const std::string& origin, const std::string& where) {
  std::vector<LinearRow> out;
  for (const auto& r : j) {
    auto v = r.get<std::vector<double>>();
    if (v.size() != dim + 1) malformed(origin, where + ": row needs " + std::to_string(dim + 1) + " numbers");
    LinearRow row;
    row.b = v.back();
    v.pop_back();
    row.a = std::move(v);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string semilinear_to_json(const SemilinearFunction& f) {
  json j;
  j["dim"] = f.dim;
  j["fibers"] = json::object();
  for (const auto& [label, set] : f.fibers) {
    json pieces = json::array();
    for (const auto& p : set.pieces) {
      json piece{{"eq", rows_json(p.eq)}, {"gt", rows_json(p.gt)}};
      if (!p.ge.empty()) piece["ge"] = rows_json(p.ge);
      pieces.push_back(piece);
    }
    j["fibers"][label] = pieces;
  }
  return dump(j);
}

SemilinearFunction semilinear_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] {
    SemilinearFunction f;
    f.dim = field(j, "dim", origin, "semilinear").get<std::size_t>();
    for (const auto& [label, pieces] : field(j, "fibers", origin, "semilinear").items()) {
      SemilinearSet s;
      s.dim = f.dim;
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        const std::string w = "fibers." + label + "[" + std::to_string(i) + "]";
        BasicSemilinearSet b;
        b.dim = f.dim;
        if (pieces[i].contains("eq")) b.eq = rows_from(pieces[i].at("eq"), f.dim, origin, w);
        if (pieces[i].contains("gt")) b.gt = rows_from(pieces[i].at("gt"), f.dim, origin, w);
        if (pieces[i].contains("ge")) b.ge = rows_from(pieces[i].at("ge"), f.dim, origin, w);
        s.pieces.push_back(std::move(b));
      }
      f.fibers[label] = std::move(s);
    }
    return f;
  });
}

// ---- grids ----

std::string grid_to_csv(const LabeledGrid& grid) {
  std::string out;
  for (std::size_t d = 0; d < grid.dims(); ++d) out += "i" + std::to_string(d + 1) + ",";
  out += "label\n";
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    for (std::size_t i : grid.unravel(c)) out += std::to_string(i) + ",";
    out += std::to_string(grid.labels[c]) + "\n";
  }
  return out;
}

std::string grid_manifest_json(const LabeledGrid& grid) {
  return dump(json{{"lo", grid.lo}, {"hi", grid.hi}, {"resolution", grid.resolution}});
}

LabeledGrid grid_from_files(const std::string& csv, const std::string& manifest, const std::string& origin) {
  const json m = parse(manifest, origin + " manifest");
  LabeledGrid grid = guarded(origin + " manifest", [&] {
    LabeledGrid g;
    g.lo = field(m, "lo", origin, "manifest").get<std::vector<double>>();
    g.hi = field(m, "hi", origin, "manifest").get<std::vector<double>>();
    g.resolution = field(m, "resolution", origin, "manifest").get<std::vector<std::size_t>>();
    return g;
  });
  if (grid.lo.size() != grid.dims() || grid.hi.size() != grid.dims() || grid.dims() == 0) {
    malformed(origin, "manifest box and resolution disagree");
  }
  for (std::size_t r : grid.resolution) {
    if (r == 0) malformed(origin, "resolution must be positive");
  }
  const auto lines = csv_lines(csv);
  if (lines.empty()) malformed(origin, "empty grid file");
  std::vector<std::string> header;
  for (std::size_t d = 0; d < grid.dims(); ++d) header.push_back("i" + std::to_string(d + 1));
  header.push_back("label");
  expect_header(lines.front(), header, origin);
  grid.labels.assign(grid.cell_count(), kOutside);
  std::vector<bool> seen(grid.cell_count(), false);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.cells.size() != header.size()) malformed_at(origin, l.number, "expected " + std::to_string(header.size()) + " columns");
    std::vector<std::size_t> idx;
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      const long i = parse_long(l.cells[d], origin, l.number);
      if (i < 0 || static_cast<std::size_t>(i) >= grid.resolution[d]) malformed_at(origin, l.number, "cell index out of range");
      idx.push_back(static_cast<std::size_t>(i));
    }
    const std::size_t c = grid.ravel(idx);
    if (seen[c]) malformed_at(origin, l.number, "cell listed twice");
    seen[c] = true;
    const long label = parse_long(l.cells.back(), origin, l.number);
    if (label < kOutside) malformed_at(origin, l.number, "labels are -1 (outside) or nonnegative");
    grid.labels[c] = static_cast<int>(label);
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) malformed(origin, "cell " + std::to_string(c) + " is missing");
  }
  return grid;
}

// ---- fuzzy graphs ----

std::string fuzzy_to_json(const FuzzyLogicalGraph& g) {
  json j;
  j["vertices"] = json::array();
  j["arrows"] = json::array();
  j["guards"] = json::object();
  j["routing"] = json::object();
  j["state_spaces"] = json::object();
  j["arrow_maps"] = json::object();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& vx = g.vertex(v);
    j["vertices"].push_back({{"id", vx.id}, {"kind", std::string(to_string(vx.kind))}});
    j["state_spaces"][vx.id] = vx.space.factors;
    if (g.guard(v)) j["guards"][vx.id] = affine_json(*g.guard(v));
    if (!g.routing(v).empty()) {
      json r = json::object();
      for (const auto& [sign, a] : g.routing(v)) r[sign] = g.arrow(a).id;
      j["routing"][vx.id] = r;
    }
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a) {
    const auto& ar = g.arrow(a);
    j["arrows"].push_back({{"id", ar.id}, {"src", g.vertex(ar.src).id}, {"dst", g.vertex(ar.dst).id}});
    j["arrow_maps"][ar.id] = arrow_map_json(ar.map);
  }
  if (g.input_box()) j["input_box"] = {{"lo", g.input_box()->lo}, {"hi", g.input_box()->hi}};
  return dump(j);
}

FuzzyLogicalGraph fuzzy_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] {
    FuzzyLogicalGraph g;
    const json& spaces = field(j, "state_spaces", origin, "fuzzy graph");
    const json& maps = field(j, "arrow_maps", origin, "fuzzy graph");
    const json& vs = field(j, "vertices", origin, "fuzzy graph");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string w = "vertices[" + std::to_string(i) + "]";
      const auto id = field(vs[i], "id", origin, w).get<std::string>();
      g.add_vertex(id, vertex_kind_from_string(field(vs[i], "kind", origin, w).get<std::string>()),
                   StateSpace{field(spaces, id.c_str(), origin, "state_spaces").get<std::vector<std::size_t>>()});
    }
    const json& as = field(j, "arrows", origin, "fuzzy graph");
    for (std::size_t i = 0; i < as.size(); ++i) {
      const std::string w = "arrows[" + std::to_string(i) + "]";
      const auto id = field(as[i], "id", origin, w).get<std::string>();
      const auto src = field(as[i], "src", origin, w).get<std::string>();
      const auto dst = field(as[i], "dst", origin, w).get<std::string>();
      g.add_arrow(id, vertex_ref(g.find_vertex(src), src, origin), vertex_ref(g.find_vertex(dst), dst, origin),
                  arrow_map_from(field(maps, id.c_str(), origin, "arrow_maps"), origin, "arrow_maps." + id));
    }
    if (j.contains("guards")) {
      for (const auto& [id, m] : j.at("guards").items()) {
        g.set_guard(vertex_ref(g.find_vertex(id), id, origin), affine_from(m, origin, "guards." + id));
      }
    }
    if (j.contains("routing")) {
      for (const auto& [id, table] : j.at("routing").items()) {
        const std::size_t v = vertex_ref(g.find_vertex(id), id, origin);
        for (const auto& [sign, a] : table.items()) {
          const auto aid = a.get<std::string>();
          g.set_route(v, sign_key(sign, origin), arrow_ref(g.find_arrow(aid), aid, origin));
        }
      }
    }
    if (j.contains("input_box")) {
      const json& b = j.at("input_box");
      g.set_input_box(InputBox{field(b, "lo", origin, "input_box").get<Point>(), field(b, "hi", origin, "input_box").get<Point>()});
    }
    return g;
  });
}

// ---- datasets and predictions ----

std::string dataset_to_csv(const Dataset& d) {
  d.check();
  std::string out;
  for (std::size_t j = 0; j < d.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "label,split\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.features[i]) out += format_number(v) + ",";
    out += std::to_string(d.labels[i]) + "," + std::string(to_string(d.splits[i])) + "\n";
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text, const std::string& origin) {
  const auto lines = csv_lines(text);
  if (lines.empty()) malformed(origin, "empty dataset file");
  const auto& h = lines.front();
  if (h.cells.size() < 3) malformed_at(origin, h.number, "expected header x1..xn,label,split");
  const std::size_t dim = h.cells.size() - 2;
  std::vector<std::string> want;
  for (std::size_t j = 0; j < dim; ++j) want.push_back("x" + std::to_string(j + 1));
  want.push_back("label");
  want.push_back("split");
  expect_header(h, want, origin);
  Dataset d;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.cells.size() != want.size()) malformed_at(origin, l.number, "expected " + std::to_string(want.size()) + " columns");
    Point x;
    for (std::size_t j = 0; j < dim; ++j) x.push_back(parse_double(l.cells[j], origin, l.number));
    const long y = parse_long(l.cells[dim], origin, l.number);
    if (y < 0) malformed_at(origin, l.number, "negative label");
    Split s;
    try {
      s = split_from_string(l.cells[dim + 1]);
    } catch (const Error&) {
      malformed_at(origin, l.number, "unknown split '" + l.cells[dim + 1] + "'");
    }
    d.features.push_back(std::move(x));
    d.labels.push_back(static_cast<int>(y));
    d.splits.push_back(s);
  }
  return d;
}

std::vector<Point> points_from_csv(const std::string& text, const std::string& origin) {
  const auto lines = csv_lines(text);
  if (lines.empty()) malformed(origin, "empty point file");
  std::size_t dim = 0;
  while (dim < lines.front().cells.size() && lines.front().cells[dim] == "x" + std::to_string(dim + 1)) ++dim;
  if (dim == 0) malformed_at(origin, lines.front().number, "expected header x1..xn");
  std::vector<Point> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.cells.size() != lines.front().cells.size()) {
      malformed_at(origin, l.number, "expected " + std::to_string(lines.front().cells.size()) + " columns");
    }
    Point x;
    for (std::size_t j = 0; j < dim; ++j) x.push_back(parse_double(l.cells[j], origin, l.number));
    out.push_back(std::move(x));
  }
  return out;
}

std::string points_to_csv(const std::vector<Point>& points) {
  const std::size_t dim = points.empty() ? 0 : points.front().size();
  std::string out;
  for (std::size_t j = 0; j < dim; ++j) out += (j ? ",x" : "x") + std::to_string(j + 1);
  out += "\n";
  for (const auto& x : points) {
    for (std::size_t j = 0; j < x.size(); ++j) out += (j ? "," : "") + format_number(x[j]);
    out += "\n";
  }
  return out;
}

std::string loss_to_csv(const std::vector<double>& loss) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < loss.size(); ++e) out += std::to_string(e) + "," + format_number(loss[e]) + "\n";
  return out;
}

std::string predictions_to_csv(const std::vector<Point>& rows) {
  const std::size_t k = rows.empty() ? 0 : rows.front().size();
  std::string out = "instance_id";
  for (std::size_t b = 0; b < k; ++b) out += ",p_block_" + std::to_string(b + 1);
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) fail(ErrorCode::InvalidArgument, "prediction rows differ in length");
    out += std::to_string(i);
    for (double v : rows[i]) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

std::vector<Point> predictions_from_csv(const std::string& text, const std::string& origin) {
  const auto lines = csv_lines(text);
  if (lines.empty()) malformed(origin, "empty prediction file");
  const auto& h = lines.front();
  if (h.cells.size() < 2) malformed_at(origin, h.number, "expected header instance_id,p_block_1..p_block_k");
  std::vector<std::string> want{"instance_id"};
  for (std::size_t b = 1; b < h.cells.size(); ++b) want.push_back("p_block_" + std::to_string(b));
  expect_header(h, want, origin);
  std::vector<Point> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.cells.size() != want.size()) malformed_at(origin, l.number, "expected " + std::to_string(want.size()) + " columns");
    if (parse_long(l.cells[0], origin, l.number) != static_cast<long>(rows.size())) {
      malformed_at(origin, l.number, "instance ids must count up from 0");
    }
    Point p;
    for (std::size_t b = 1; b < l.cells.size(); ++b) p.push_back(parse_double(l.cells[b], origin, l.number));
    rows.push_back(std::move(p));
  }
  return rows;
}

std::string partition_to_json(const TargetPartition& p) { return dump(partition_json(p)); }

TargetPartition partition_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] { return partition_from(j, origin); });
}

// ---- charts ----

std::string charts_to_json(const std::vector<ChartEntry>& charts) {
  json list = json::array();
  for (const auto& c : charts) {
    json e{{"kind", std::string(to_string(c.embedding.kind))}};
    if (c.embedding.kind == EmbeddingKind::CoordinateSubset) e["indices"] = c.embedding.indices;
    if (c.embedding.kind == EmbeddingKind::Resample) e["size"] = c.embedding.size;
    list.push_back({{"id", c.id}, {"model", c.model}, {"partition", partition_json(c.partition)}, {"embedding", e}});
  }
  return dump(json{{"charts", list}});
}

std::vector<ChartEntry> charts_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] {
    std::vector<ChartEntry> out;
    const json& list = field(j, "charts", origin, "chart list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = "charts[" + std::to_string(i) + "]";
      ChartEntry c;
      c.id = field(list[i], "id", origin, w).get<std::string>();
      c.model = field(list[i], "model", origin, w).get<std::string>();
      c.partition = partition_from(field(list[i], "partition", origin, w), origin);
      if (list[i].contains("embedding")) {
        const json& e = list[i].at("embedding");
        const auto kind = embedding_kind_from_string(field(e, "kind", origin, w + ".embedding").get<std::string>());
        if (kind == EmbeddingKind::CoordinateSubset) {
          c.embedding = Embedding::subset(field(e, "indices", origin, w + ".embedding").get<std::vector<std::size_t>>());
        } else if (kind == EmbeddingKind::Resample) {
          c.embedding = Embedding::resample(field(e, "size", origin, w + ".embedding").get<std::size_t>());
        }
      }
      out.push_back(std::move(c));
    }
    return out;
  });
}

std::vector<ModelChart> load_charts(const std::string& path) {
  const auto entries = charts_from_json(read_file(path), path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  std::vector<ModelChart> out;
  for (const auto& e : entries) {
    std::filesystem::path model = e.model;
    if (model.is_relative()) model = dir / model;
    out.push_back({e.id, network_from_json(read_file(model.string()), model.string()), e.embedding, e.partition});
  }
  return out;
}

// ---- ensemble reports ----

std::string target_graph_to_json(const TargetGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json parts = json::array();
    for (const auto& p : n.partitions) parts.push_back(partition_json(p));
    json invalid = json::array();
    for (std::size_t k : n.refinement.invalid) invalid.push_back(n.refinement.combinations[k]);
    nodes.push_back({{"flattening", n.flattening},
                     {"partitions", parts},
                     {"groups", n.groups},
                     {"models", n.models},
                     {"next", n.next},
                     {"refinement", n.refinement.valid},
                     {"invalid_combinations", invalid}});
  }
  return dump(json{{"classes", g.classes}, {"nodes", nodes}});
}

std::string calibration_to_json(const Calibration& cal, const TargetGraph& g, const std::vector<std::string>& chart_ids,
                                const std::string& config_hash) {
  json charts = json::array();
  for (std::size_t i = 0; i < cal.curves.size(); ++i) {
    charts.push_back({{"id", i < chart_ids.size() ? chart_ids[i] : std::to_string(i)},
                      {"partition", partition_json(g.chart_partitions.at(i))},
                      {"phi", cal.curves[i].phi},
                      {"certain_sizes", cal.curves[i].certain_sizes}});
  }
  json classes = json::array();
  for (const auto& ch : cal.choices) {
    json targets = json::array();
    for (std::size_t n : ch.path) targets.push_back(g.nodes.at(n).flattening);
    classes.push_back({{"class", ch.c},
                       {"path", ch.path},
                       {"path_targets", targets},
                       {"alpha", ch.alpha},
                       {"alpha_index", ch.alpha_index},
                       {"r", ch.r}});
  }
  return dump(json{{"config_hash", config_hash},
                   {"grid", cal.grid},
                   {"epsilon", cal.options.epsilon},
                   {"charts", charts},
                   {"classes", classes}});
}

Calibration calibration_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  return guarded(origin, [&] {
    Calibration cal;
    cal.grid = field(j, "grid", origin, "calibration").get<std::vector<double>>();
    if (j.contains("epsilon")) cal.options.epsilon = j.at("epsilon").get<double>();
    for (const auto& c : field(j, "charts", origin, "calibration")) {
      AccuracyCurve curve;
      curve.thresholds = cal.grid;
      curve.phi = field(c, "phi", origin, "charts").get<std::vector<double>>();
      curve.certain_sizes = field(c, "certain_sizes", origin, "charts").get<std::vector<std::size_t>>();
      if (curve.phi.size() != cal.grid.size()) malformed(origin, "accuracy curve does not match the grid");
      cal.curves.push_back(std::move(curve));
    }
    for (const auto& c : field(j, "classes", origin, "calibration")) {
      ClassChoice ch;
      ch.c = field(c, "class", origin, "classes").get<int>();
      ch.path = field(c, "path", origin, "classes").get<NodePath>();
      ch.alpha = field(c, "alpha", origin, "classes").get<double>();
      ch.alpha_index = field(c, "alpha_index", origin, "classes").get<std::size_t>();
      ch.r = field(c, "r", origin, "classes").get<double>();
      if (ch.alpha_index >= cal.grid.size()) malformed(origin, "threshold index out of range");
      cal.choices.push_back(std::move(ch));
    }
    return cal;
  });
}

std::string vote_report_to_json(const std::vector<VoteRecord>& records, const std::string& config_hash) {
  json list = json::array();
  std::size_t labeled = 0, hit = 0, base_hit = 0;
  for (const auto& r : records) {
    json e{{"instance", r.instance},
           {"values", r.vote.values},
           {"prediction", r.vote.prediction},
           {"paths", r.vote.paths},
           {"fallback", r.vote.fallback}};
    if (r.label >= 0) {
      e["label"] = r.label;
      ++labeled;
      hit += r.vote.prediction == r.label;
      base_hit += r.baseline == r.label;
    }
    if (r.baseline >= 0) e["baseline"] = r.baseline;
    list.push_back(e);
  }
  json j{{"config_hash", config_hash}, {"instances", list}};
  if (labeled > 0) {
    j["accuracy"] = static_cast<double>(hit) / static_cast<double>(labeled);
    j["baseline_accuracy"] = static_cast<double>(base_hit) / static_cast<double>(labeled);
  }
  return dump(j);
}

// ---- run configuration ----

void RunConfig::check() const {
  if (chamber_cap == 0 || region_cap == 0 || path_cap == 0) fail(ErrorCode::InvalidArgument, "caps must be positive");
  if (grid.empty()) fail(ErrorCode::InvalidArgument, "threshold grid is empty");
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::InvalidArgument, "threshold grid must lie in [0, 1]");
  }
  if (!(tie_margin >= 0.0) || !(simplex_tolerance >= 0.0)) fail(ErrorCode::InvalidArgument, "tolerances must be >= 0");
}

std::string config_to_json(const RunConfig& c) {
  return dump(json{{"seed", c.seed},
                   {"caps", {{"chambers", c.chamber_cap}, {"regions", c.region_cap}, {"paths", c.path_cap}}},
                   {"grid", c.grid},
                   {"tolerances", {{"tie_margin", c.tie_margin}, {"simplex", c.simplex_tolerance}}},
                   {"paths", c.paths}});
}

RunConfig config_from_json(const std::string& text, const std::string& origin) {
  const json j = parse(text, origin);
  RunConfig c = guarded(origin, [&] {
    RunConfig c;
    if (!j.is_object()) malformed(origin, "config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key != "seed" && key != "caps" && key != "grid" && key != "tolerances" && key != "paths") {
        malformed(origin, "unknown config field '" + key + "'");
      }
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("caps")) {
      const json& caps = j.at("caps");
      if (caps.contains("chambers")) c.chamber_cap = caps.at("chambers").get<std::size_t>();
      if (caps.contains("regions")) c.region_cap = caps.at("regions").get<std::size_t>();
      if (caps.contains("paths")) c.path_cap = caps.at("paths").get<std::size_t>();
    }
    if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      if (t.contains("tie_margin")) c.tie_margin = t.at("tie_margin").get<double>();
      if (t.contains("simplex")) c.simplex_tolerance = t.at("simplex").get<double>();
    }
    if (j.contains("paths")) c.paths = j.at("paths").get<std::map<std::string, std::string>>();
    return c;
  });
  try {
    c.check();
  } catch (const Error& e) {
    malformed(origin, e.what());
  }
  return c;
}

std::string config_hash(const RunConfig& c) { return fnv1a_hex(config_to_json(c)); }

}  // namespace logifold::io
