#ifndef VEER_WORDS_HPP
#define VEER_WORDS_HPP

#include <cstdlib>
#include <vector>

namespace veer {

// Free group words over generators 1..n; letter -k is the inverse of k.
using Word = std::vector<int>;

inline Word reduced(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int x : w) {
    if (!out.empty() && out.back() == -x)
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

inline Word inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
  return out;
}

inline Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return reduced(out);
}

// w = tail . core . tail^-1 with core cyclically reduced.
struct CyclicForm {
  Word tail;
  Word core;
};

inline CyclicForm cyclic_form(const Word& w0) {
  Word w = reduced(w0);
  size_t i = 0, j = w.size();
  while (j - i >= 2 && w[i] == -w[j - 1]) {
    ++i;
    --j;
  }
  CyclicForm cf;
  cf.tail.assign(w.begin(), w.begin() + i);
  cf.core.assign(w.begin() + i, w.begin() + j);
  return cf;
}

inline Word power(const Word& w, long k) {
  Word out;
  Word base = k >= 0 ? w : inverse(w);
  for (long i = 0; i < std::labs(k); ++i) out = concat(out, base);
  return out;
}

// true when b is a cyclic rotation of a (both assumed cyclically reduced).
inline bool cyclic_rotation_of(const Word& a, const Word& b, size_t* rot = nullptr) {
  if (a.size() != b.size()) return false;
  if (a.empty()) {
    if (rot) *rot = 0;
    return true;
  }
  for (size_t r = 0; r < a.size(); ++r) {
    bool eq = true;
    for (size_t k = 0; k < a.size(); ++k)
      if (a[(r + k) % a.size()] != b[k]) {
        eq = false;
        break;
      }
    if (eq) {
      if (rot) *rot = r;
      return true;
    }
  }
  return false;
}

}  // namespace veer

#endif
