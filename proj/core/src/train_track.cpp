#include "veer/train_track.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace veer {

int MeasuredTrainTrack::num_live_switches() const {
  int n = 0;
  for (const auto& s : switches)
    if (s.alive) ++n;
  return n;
}

int MeasuredTrainTrack::num_live_branches() const {
  int n = 0;
  for (const auto& b : branches)
    if (b.alive) ++n;
  return n;
}

int MeasuredTrainTrack::euler_characteristic() const {
  return num_live_switches() - num_live_branches();
}

int MeasuredTrainTrack::find_slot(int s, BranchEnd e) const {
  const auto& slots = switches[s].slots;
  for (int i = 0; i < static_cast<int>(slots.size()); ++i)
    if (slots[i] == e) return i;
  return -1;
}

bool MeasuredTrainTrack::weights_installed() const {
  for (const auto& b : branches)
    if (b.alive && b.weight != 0.0) return true;
  return false;
}

void MeasuredTrainTrack::install_weights(const std::vector<double>& w) {
  for (size_t i = 0; i < branches.size() && i < w.size(); ++i)
    if (branches[i].alive) branches[i].weight = w[i];
}

void MeasuredTrainTrack::renormalize_max_one() {
  double mx = 0.0;
  for (const auto& b : branches)
    if (b.alive) mx = std::max(mx, b.weight);
  if (mx <= 0.0) return;
  for (auto& b : branches)
    if (b.alive) b.weight /= mx;
  log_scale += std::log(mx);
}

bool MeasuredTrainTrack::end_is_large(const EndRef& ref) const {
  const Switch& s = switches[ref.sw];
  int side_count = s.on_side_a(ref.slot) ? s.side_split : s.degree() - s.side_split;
  return side_count == 1;
}

bool MeasuredTrainTrack::branch_is_large(int b) const {
  return end_is_large(branches[b].ends[0]) && end_is_large(branches[b].ends[1]);
}

bool MeasuredTrainTrack::branch_is_small(int b) const {
  return !end_is_large(branches[b].ends[0]) && !end_is_large(branches[b].ends[1]);
}

bool MeasuredTrainTrack::is_trivalent() const {
  for (const auto& s : switches)
    if (s.alive && s.degree() != 3) return false;
  return true;
}

DirB MeasuredTrainTrack::face_next(DirB d) const {
  EndRef h = head(d);
  const Switch& s = switches[h.sw];
  int deg = s.degree();
  int prev = (h.slot + deg - 1) % deg;
  return s.slots[prev].outgoing();
}

std::vector<EdgePath> MeasuredTrainTrack::derived_faces() const {
  std::vector<EdgePath> faces;
  std::set<int> seen;
  for (const auto& b : branches) {
    if (!b.alive) continue;
  }
  for (size_t bi = 0; bi < branches.size(); ++bi) {
    if (!branches[bi].alive) continue;
    for (int dir = 0; dir < 2; ++dir) {
      DirB start = DirB::make(static_cast<int>(bi), dir == 0);
      if (seen.count(start.code)) continue;
      EdgePath face;
      DirB d = start;
      do {
        face.push_back(d);
        seen.insert(d.code);
        d = face_next(d);
      } while (d != start);
      faces.push_back(std::move(face));
    }
  }
  return faces;
}

int MeasuredTrainTrack::face_cusp_count(const EdgePath& face) const {
  int cusps = 0;
  for (size_t i = 0; i < face.size(); ++i) {
    DirB d = face[i];
    DirB n = face[(i + 1) % face.size()];
    EndRef in = head(d);
    EndRef out = tail(n);
    if (end_on_side_a(in) == end_on_side_a(out)) ++cusps;
  }
  return cusps;
}

std::vector<int> MeasuredTrainTrack::live_branch_ids() const {
  std::vector<int> out;
  for (size_t i = 0; i < branches.size(); ++i)
    if (branches[i].alive) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> MeasuredTrainTrack::live_switch_ids() const {
  std::vector<int> out;
  for (size_t i = 0; i < switches.size(); ++i)
    if (switches[i].alive) out.push_back(static_cast<int>(i));
  return out;
}

void MeasuredTrainTrack::compact() {
  std::vector<int> smap(switches.size(), -1), bmap(branches.size(), -1);
  std::vector<Switch> ns;
  std::vector<Branch> nb;
  for (size_t i = 0; i < switches.size(); ++i)
    if (switches[i].alive) {
      smap[i] = static_cast<int>(ns.size());
      ns.push_back(switches[i]);
    }
  for (size_t i = 0; i < branches.size(); ++i)
    if (branches[i].alive) {
      bmap[i] = static_cast<int>(nb.size());
      nb.push_back(branches[i]);
    }
  for (auto& b : nb)
    for (auto& e : b.ends) e.sw = smap[e.sw];
  for (auto& s : ns)
    for (auto& e : s.slots) e.branch = bmap[e.branch];
  for (auto& c : boundary)
    for (auto& d : c.steps) d = DirB::make(bmap[d.branch()], d.forward());
  switches = std::move(ns);
  branches = std::move(nb);
}

int map_switch_image(const MeasuredTrainTrack& t, const GraphMap& g, int s) {
  int image = -1;
  for (size_t bi = 0; bi < t.branches.size(); ++bi) {
    if (!t.branches[bi].alive) continue;
    for (int e = 0; e < 2; ++e) {
      if (t.branches[bi].ends[e].sw != s) continue;
      DirB d = DirB::make(static_cast<int>(bi), e == 0);
      EdgePath p = g.image_of(d);
      if (p.empty()) continue;
      int start = t.tail(p.front()).sw;
      if (image == -1)
        image = start;
      else if (image != start)
        throw std::runtime_error("graph map sends switch " + std::to_string(s) +
                                 " to multiple switches");
    }
  }
  if (image == -1) throw std::runtime_error("cannot determine image of switch (all images empty)");
  return image;
}

GraphMap compose(const MeasuredTrainTrack&, const GraphMap& g1, const GraphMap& g2) {
  GraphMap out;
  out.images.resize(g2.images.size());
  for (size_t b = 0; b < g2.images.size(); ++b) {
    EdgePath acc;
    for (DirB d : g2.images[b]) {
      EdgePath piece = g1.image_of(d);
      acc.insert(acc.end(), piece.begin(), piece.end());
    }
    out.images[b] = std::move(acc);
  }
  return out;
}

namespace {

void check(ValidationReport& rep, const std::string& name, bool pass, const std::string& detail) {
  rep.checks.push_back({name, pass, pass ? "" : detail});
}

}  // namespace

ValidationReport validate(const MeasuredTrainTrack& t, const GraphMap* map, double eps_w) {
  ValidationReport rep;

  // Slot structure: every live branch end sits in exactly one slot.
  bool slots_ok = true;
  std::string slot_detail;
  std::map<std::pair<int, int>, int> end_count;
  for (size_t si = 0; si < t.switches.size(); ++si) {
    if (!t.switches[si].alive) continue;
    const auto& s = t.switches[si];
    for (int k = 0; k < s.degree(); ++k) {
      const BranchEnd& e = s.slots[k];
      if (e.branch < 0 || e.branch >= static_cast<int>(t.branches.size()) ||
          !t.branches[e.branch].alive) {
        slots_ok = false;
        slot_detail = "slot refers to dead branch";
        continue;
      }
      const EndRef& er = t.branches[e.branch].ends[e.end];
      if (er.sw != static_cast<int>(si) || er.slot != k) {
        slots_ok = false;
        slot_detail = "branch end table disagrees with switch slot table";
      }
      end_count[{e.branch, e.end}]++;
    }
  }
  for (size_t bi = 0; bi < t.branches.size(); ++bi) {
    if (!t.branches[bi].alive) continue;
    for (int e = 0; e < 2; ++e)
      if (end_count[{static_cast<int>(bi), e}] != 1) {
        slots_ok = false;
        slot_detail = "branch " + t.branches[bi].name + " end not in exactly one slot";
      }
  }
  check(rep, "slot bijection", slots_ok, slot_detail);

  // Tangent sides nonempty.
  bool sides_ok = true;
  std::string side_detail;
  for (size_t si = 0; si < t.switches.size(); ++si) {
    if (!t.switches[si].alive) continue;
    const auto& s = t.switches[si];
    if (s.side_split <= 0 || s.side_split >= s.degree()) {
      sides_ok = false;
      side_detail = "empty tangent side at switch " + std::to_string(si);
    }
  }
  check(rep, "nonempty tangent sides", sides_ok, side_detail);

  // Switch condition.
  if (t.weights_installed()) {
    bool w_ok = true;
    std::string w_detail;
    for (size_t si = 0; si < t.switches.size(); ++si) {
      if (!t.switches[si].alive) continue;
      const auto& s = t.switches[si];
      double a = 0, b = 0;
      for (int k = 0; k < s.degree(); ++k) {
        double w = t.branches[s.slots[k].branch].weight;
        (s.on_side_a(k) ? a : b) += w;
      }
      double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(a - b) > eps_w * scale) {
        w_ok = false;
        std::ostringstream os;
        os << "switch " << si << ": " << a << " vs " << b;
        w_detail = os.str();
      }
    }
    check(rep, "switch condition", w_ok, w_detail);

    bool pos_ok = true;
    for (const auto& b : t.branches)
      if (b.alive && b.weight < 0) pos_ok = false;
    check(rep, "nonnegative weights", pos_ok, "negative branch weight");
  }

  // Euler characteristic.
  check(rep, "negative Euler characteristic", t.euler_characteristic() < 0,
        "chi(S degrees) = " + std::to_string(t.euler_characteristic()) + " >= 0");

  // Declared boundary cycles against derived faces.
  auto faces = t.derived_faces();
  {
    bool cover_ok = true;
    std::string detail;
    size_t total = 0;
    for (const auto& f : faces) total += f.size();
    if (total != 2 * static_cast<size_t>(t.num_live_branches())) {
      cover_ok = false;
      detail = "derived faces do not cover each directed branch once";
    }
    check(rep, "faces cover directed branches once", cover_ok, detail);
  }
  {
    bool match = t.boundary.size() == faces.size();
    std::string detail = "declared " + std::to_string(t.boundary.size()) + ", derived " +
                         std::to_string(faces.size());
    if (match) {
      // Each declared cycle must equal a derived face up to rotation.
      std::vector<bool> used(faces.size(), false);
      for (const auto& c : t.boundary) {
        bool found = false;
        for (size_t fi = 0; fi < faces.size() && !found; ++fi) {
          if (used[fi] || faces[fi].size() != c.steps.size()) continue;
          for (size_t rot = 0; rot < faces[fi].size() && !found; ++rot) {
            bool eq = true;
            for (size_t k = 0; k < c.steps.size(); ++k)
              if (faces[fi][(rot + k) % faces[fi].size()] != c.steps[k]) {
                eq = false;
                break;
              }
            if (eq) {
              used[fi] = true;
              found = true;
            }
          }
        }
        if (!found) {
          match = false;
          detail = "declared cycle '" + c.puncture + "' is not a complementary region";
        }
      }
    }
    check(rep, "boundary cycles match complementary regions", match, detail);
  }
  {
    bool cusp_ok = true;
    for (const auto& f : faces)
      if (t.face_cusp_count(f) < 1) cusp_ok = false;
    check(rep, "every region has a cusp", cusp_ok, "smooth (cusp-free) region boundary");
  }

  if (map) {
    bool sized = map->images.size() == t.branches.size();
    check(rep, "map defined on every branch", sized, "image table size mismatch");
    bool cont_ok = true;
    std::string detail;
    if (sized) {
      for (size_t bi = 0; bi < t.branches.size() && cont_ok; ++bi) {
        if (!t.branches[bi].alive) continue;
        const EdgePath& p = map->images[bi];
        for (size_t k = 0; k + 1 < p.size(); ++k) {
          if (t.head(p[k]).sw != t.tail(p[k + 1]).sw) {
            cont_ok = false;
            detail = "image of " + t.branches[bi].name + " breaks at position " +
                     std::to_string(k);
            break;
          }
        }
      }
    }
    check(rep, "image path continuity", cont_ok, detail);

    bool vertex_ok = true;
    std::string vdetail;
    if (sized && cont_ok) {
      try {
        for (int s : t.live_switch_ids()) (void)map_switch_image(t, *map, s);
      } catch (const std::exception& e) {
        vertex_ok = false;
        vdetail = e.what();
      }
    }
    check(rep, "consistent switch images", vertex_ok, vdetail);
  }

  return rep;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

namespace {

struct Tok {
  std::string text;
  int line;
  int col;
};

std::vector<std::vector<Tok>> tokenize_lines(const std::string& text) {
  std::vector<std::vector<Tok>> lines;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::vector<Tok> toks;
    size_t i = 0;
    while (i < raw.size()) {
      if (std::isspace(static_cast<unsigned char>(raw[i]))) {
        ++i;
        continue;
      }
      if (raw[i] == '#') break;
      size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j])) &&
             raw[j] != '#')
        ++j;
      toks.push_back({raw.substr(i, j - i), lineno, static_cast<int>(i + 1)});
      i = j;
    }
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  return lines;
}

// "name+" or "name-" -> (name, forward?)
std::pair<std::string, bool> parse_signed(const Tok& tok) {
  const std::string& s = tok.text;
  if (s.size() < 2 || (s.back() != '+' && s.back() != '-'))
    throw ParseError(tok.line, tok.col, "expected '<branch>+' or '<branch>-', got '" + s + "'");
  return {s.substr(0, s.size() - 1), s.back() == '+'};
}

}  // namespace

TrainMapFile parse_trainmap(const std::string& text) {
  auto lines = tokenize_lines(text);
  enum Section { kNone, kSwitches, kBranches, kBoundary, kMap };
  Section sec = kNone;

  MeasuredTrainTrack t;
  GraphMap g;
  std::map<std::string, int> branch_id;
  std::vector<std::string> branch_names;
  struct SwitchLine {
    std::string name;
    std::vector<Tok> ends;
    int bar = -1;  // index into ends where side B starts
    int line = 0;
  };
  std::vector<SwitchLine> switch_lines;
  struct CycleLine {
    std::string label;
    std::vector<Tok> steps;
  };
  std::vector<CycleLine> cycle_lines;
  struct MapLine {
    std::string name;
    std::vector<Tok> letters;
    int line = 0;
    int col = 0;
  };
  std::vector<MapLine> map_lines;

  auto intern_branch = [&](const std::string& name) {
    auto it = branch_id.find(name);
    if (it != branch_id.end()) return it->second;
    int id = static_cast<int>(branch_names.size());
    branch_id[name] = id;
    branch_names.push_back(name);
    return id;
  };

  for (const auto& line : lines) {
    const Tok& head = line[0];
    if (head.text == "[switches]") {
      sec = kSwitches;
      continue;
    }
    if (head.text == "[branches]") {
      sec = kBranches;
      continue;
    }
    if (head.text == "[boundary]") {
      sec = kBoundary;
      continue;
    }
    if (head.text == "[map]") {
      sec = kMap;
      continue;
    }
    switch (sec) {
      case kNone:
        throw ParseError(head.line, head.col, "content before any section header");
      case kSwitches: {
        if (head.text.back() != ':')
          throw ParseError(head.line, head.col, "switch line must start with '<id>:'");
        SwitchLine sl;
        sl.name = head.text.substr(0, head.text.size() - 1);
        sl.line = head.line;
        for (size_t i = 1; i < line.size(); ++i) {
          if (line[i].text == "|") {
            if (sl.bar >= 0) throw ParseError(line[i].line, line[i].col, "multiple '|'");
            sl.bar = static_cast<int>(sl.ends.size());
          } else {
            sl.ends.push_back(line[i]);
          }
        }
        if (sl.bar < 0) throw ParseError(head.line, head.col, "switch line missing '|'");
        if (sl.bar == 0 || sl.bar == static_cast<int>(sl.ends.size()))
          throw ParseError(head.line, head.col, "empty tangent side");
        switch_lines.push_back(std::move(sl));
        break;
      }
      case kBranches: {
        if (line.size() > 2)
          throw ParseError(line[2].line, line[2].col, "expected '<branch> [weight]'");
        int id = intern_branch(head.text);
        if (line.size() == 2) {
          try {
            double w = std::stod(line[1].text);
            while (static_cast<int>(t.branches.size()) <= id) t.branches.push_back({});
            t.branches[id].weight = w;
          } catch (const std::invalid_argument&) {
            throw ParseError(line[1].line, line[1].col, "bad weight '" + line[1].text + "'");
          }
        }
        break;
      }
      case kBoundary: {
        if (head.text.back() != ':')
          throw ParseError(head.line, head.col, "boundary line must start with '<label>:'");
        CycleLine cl;
        cl.label = head.text.substr(0, head.text.size() - 1);
        cl.steps.assign(line.begin() + 1, line.end());
        if (cl.steps.empty()) throw ParseError(head.line, head.col, "empty boundary cycle");
        cycle_lines.push_back(std::move(cl));
        break;
      }
      case kMap: {
        if (head.text.back() != ':')
          throw ParseError(head.line, head.col, "map line must start with '<branch>:'");
        MapLine ml;
        ml.name = head.text.substr(0, head.text.size() - 1);
        ml.line = head.line;
        ml.col = head.col;
        ml.letters.assign(line.begin() + 1, line.end());
        map_lines.push_back(std::move(ml));
        break;
      }
    }
  }

  // Build branches referenced by switch lines too.
  for (const auto& sl : switch_lines)
    for (const auto& tok : sl.ends) intern_branch(parse_signed(tok).first);
  while (t.branches.size() < branch_names.size()) t.branches.push_back({});
  for (size_t i = 0; i < branch_names.size(); ++i) t.branches[i].name = branch_names[i];

  // Switches.
  std::vector<std::array<bool, 2>> end_seen(t.branches.size(), {false, false});
  for (const auto& sl : switch_lines) {
    int si = static_cast<int>(t.switches.size());
    Switch s;
    s.side_split = sl.bar;
    for (const auto& tok : sl.ends) {
      auto [name, fwd] = parse_signed(tok);
      int b = branch_id[name];
      int end = fwd ? 0 : 1;  // e+ marks the initial end, e- the terminal end
      if (end_seen[b][end])
        throw ParseError(tok.line, tok.col, "end '" + tok.text + "' appears twice");
      end_seen[b][end] = true;
      t.branches[b].ends[end] = {si, static_cast<int>(s.slots.size())};
      s.slots.push_back({b, end});
    }
    t.switches.push_back(std::move(s));
  }
  for (size_t b = 0; b < t.branches.size(); ++b)
    for (int e = 0; e < 2; ++e)
      if (!end_seen[b][e])
        throw ParseError(0, 0, "branch '" + t.branches[b].name + "' missing end " +
                                   (e == 0 ? "'+'" : "'-'"));

  // chi must be negative (parse-time rejection of degenerate surfaces).
  if (t.euler_characteristic() >= 0)
    throw ParseError(0, 0, "track has chi >= 0; not a hyperbolic-type surface");

  // Boundary cycles.
  for (const auto& cl : cycle_lines) {
    BoundaryCycle c;
    c.puncture = cl.label;
    for (const auto& tok : cl.steps) {
      auto [name, fwd] = parse_signed(tok);
      auto it = branch_id.find(name);
      if (it == branch_id.end())
        throw ParseError(tok.line, tok.col, "unknown branch '" + name + "'");
      c.steps.push_back(DirB::make(it->second, fwd));
    }
    t.boundary.push_back(std::move(c));
  }

  // Map.
  g.images.resize(t.branches.size());
  std::vector<bool> have_image(t.branches.size(), false);
  for (const auto& ml : map_lines) {
    auto it = branch_id.find(ml.name);
    if (it == branch_id.end())
      throw ParseError(ml.line, ml.col, "map for unknown branch '" + ml.name + "'");
    if (have_image[it->second])
      throw ParseError(ml.line, ml.col, "duplicate image for '" + ml.name + "'");
    have_image[it->second] = true;
    EdgePath p;
    if (!(ml.letters.size() == 1 && ml.letters[0].text == ".")) {
      for (const auto& tok : ml.letters) {
        auto [name, fwd] = parse_signed(tok);
        auto bit = branch_id.find(name);
        if (bit == branch_id.end())
          throw ParseError(tok.line, tok.col, "unknown branch '" + name + "' in image");
        p.push_back(DirB::make(bit->second, fwd));
      }
    }
    g.images[it->second] = std::move(p);
  }
  if (!map_lines.empty())
    for (size_t b = 0; b < t.branches.size(); ++b)
      if (!have_image[b])
        throw ParseError(0, 0, "missing image for branch '" + t.branches[b].name + "'");

  // Structural validation that parse promises.
  auto rep = validate(t, map_lines.empty() ? nullptr : &g, 1e-4);
  for (const auto& c : rep.checks) {
    if (c.pass) continue;
    if (c.name == "switch condition" || c.name == "nonnegative weights")
      continue;  // weights are data, not structure; validate() reports them
    throw ParseError(0, 0, "invariant violated: " + c.name +
                               (c.detail.empty() ? "" : " (" + c.detail + ")"));
  }

  return {std::move(t), std::move(g)};
}

std::string write_trainmap(const MeasuredTrainTrack& track, const GraphMap& map) {
  std::ostringstream os;
  os.precision(17);
  auto tok = [&](DirB d) { return track.branches[d.branch()].name + (d.forward() ? "+" : "-"); };
  auto endtok = [&](const BranchEnd& e) {
    return track.branches[e.branch].name + (e.end == 0 ? "+" : "-");
  };
  os << "[switches]\n";
  int si = 0;
  for (size_t s = 0; s < track.switches.size(); ++s) {
    if (!track.switches[s].alive) continue;
    os << "s" << si++ << ":";
    const auto& sw = track.switches[s];
    for (int k = 0; k < sw.degree(); ++k) {
      if (k == sw.side_split) os << " |";
      os << " " << endtok(sw.slots[k]);
    }
    os << "\n";
  }
  os << "[branches]\n";
  for (const auto& b : track.branches) {
    if (!b.alive) continue;
    os << b.name;
    if (track.weights_installed()) os << " " << b.weight;
    os << "\n";
  }
  os << "[boundary]\n";
  for (const auto& c : track.boundary) {
    os << c.puncture << ":";
    for (DirB d : c.steps) os << " " << tok(d);
    os << "\n";
  }
  if (!map.images.empty()) {
    os << "[map]\n";
    for (size_t b = 0; b < track.branches.size(); ++b) {
      if (!track.branches[b].alive) continue;
      os << track.branches[b].name << ":";
      if (map.images[b].empty()) {
        os << " .";
      } else {
        for (DirB d : map.images[b]) os << " " << tok(d);
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace veer
