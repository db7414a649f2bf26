#ifndef VEER_TEST_UTIL_HPP
#define VEER_TEST_UTIL_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "veer/train_track.hpp"

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(VEER_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline veer::TrainMapFile load_fixture(const std::string& name) {
  return veer::parse_trainmap(read_fixture(name));
}

// Branch id by name.
inline int bid(const veer::MeasuredTrainTrack& t, const std::string& name) {
  for (size_t i = 0; i < t.branches.size(); ++i)
    if (t.branches[i].alive && t.branches[i].name == name) return static_cast<int>(i);
  throw std::runtime_error("no branch named " + name);
}

// Image of a branch as a readable word ("a b- c").
inline std::string word_str(const veer::MeasuredTrainTrack& t, const veer::EdgePath& p) {
  std::string out;
  for (veer::DirB d : p) {
    if (!out.empty()) out += " ";
    out += t.branches[d.branch()].name;
    if (!d.forward()) out += "-";
  }
  return out;
}

#endif
