#ifndef VEER_DIRB_HPP
#define VEER_DIRB_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace veer {

// A directed branch: branch index plus direction. Encoded as 2*branch+dir so
// reversal is a single bit flip and directed branches index arrays densely.
struct DirB {
  int code = -1;

  DirB() = default;
  explicit DirB(int c) : code(c) {}

  static DirB fwd(int branch) { return DirB(2 * branch); }
  static DirB rev(int branch) { return DirB(2 * branch + 1); }
  static DirB make(int branch, bool forward) { return DirB(2 * branch + (forward ? 0 : 1)); }

  int branch() const { return code >> 1; }
  bool forward() const { return (code & 1) == 0; }
  DirB reversed() const { return DirB(code ^ 1); }
  bool valid() const { return code >= 0; }

  // End of the branch this directed edge departs from: end 0 when forward.
  int tail_end() const { return code & 1; }
  // End it arrives at.
  int head_end() const { return (code & 1) ^ 1; }

  friend bool operator==(DirB a, DirB b) { return a.code == b.code; }
  friend bool operator!=(DirB a, DirB b) { return a.code != b.code; }
  friend bool operator<(DirB a, DirB b) { return a.code < b.code; }
};

using EdgePath = std::vector<DirB>;

inline EdgePath reversed(const EdgePath& p) {
  EdgePath out;
  out.reserve(p.size());
  for (auto it = p.rbegin(); it != p.rend(); ++it) out.push_back(it->reversed());
  return out;
}

// Free reduction: cancel adjacent e ē pairs until none remain.
inline void free_reduce(EdgePath& p) {
  EdgePath out;
  out.reserve(p.size());
  for (DirB d : p) {
    if (!out.empty() && out.back() == d.reversed())
      out.pop_back();
    else
      out.push_back(d);
  }
  p = std::move(out);
}

}  // namespace veer

template <>
struct std::hash<veer::DirB> {
  size_t operator()(veer::DirB d) const noexcept { return std::hash<int>()(d.code); }
};

#endif
