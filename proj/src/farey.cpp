#include "cgdist/farey.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace cgdist {

namespace {

// x*a + y*b = gcd(a,b) >= 0
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  std::int64_t old_r = a, r = b, old_x = 1, cx = 0, old_y = 0, cy = 1;
  while (r != 0) {
    const std::int64_t k = old_r / r;
    old_r -= k * r;
    std::swap(old_r, r);
    old_x -= k * cx;
    std::swap(old_x, cx);
    old_y -= k * cy;
    std::swap(old_y, cy);
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_x = -old_x;
    old_y = -old_y;
  }
  x = old_x;
  y = old_y;
  return old_r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

int farey_distance(const Slope& a_in, const Slope& b_in) {
  const Slope a = make_slope(a_in.p, a_in.q);
  const Slope b = make_slope(b_in.p, b_in.q);
  if (a == b) return 0;

  // [[p, r], [q, s]] has determinant one and sends 1/0 to a.
  std::int64_t x = 0, y = 0;
  ext_gcd(a.p, a.q, x, y);  // p*x + q*y = 1
  const __int128 s = x, r = -y;
  __int128 num = s * b.p - r * b.q;
  __int128 den = -static_cast<__int128>(a.q) * b.p + static_cast<__int128>(a.p) * b.q;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (den == 0) return 0;
  if (den == 1) return 1;

  // Regular continued fraction of num/den.
  std::vector<__int128> quotients;
  while (den != 0) {
    __int128 q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
    quotients.push_back(q);
    const __int128 rem = num - q * den;
    num = den;
    den = rem;
  }

  // dist to convergents c_{i-2}, c_{i-1}; c_{-1} = 1/0, c_0 = a_0.
  int before = 0;
  int last = 1;
  for (std::size_t i = 1; i < quotients.size(); ++i) {
    int next = last + 1;
    if (quotients[i] == 1) next = std::min(next, before + 1);
    before = last;
    last = next;
  }
  return last;
}

std::vector<Slope> slopes_up_to_height(std::int64_t bound) {
  std::vector<Slope> out;
  out.push_back({1, 0});
  for (std::int64_t q = 1; q <= bound; ++q) {
    for (std::int64_t p = -bound; p <= bound; ++p) {
      if (std::gcd(p, q) == 1) out.push_back({p, q});
    }
  }
  return out;
}

namespace {

class BoundedFarey {
 public:
  explicit BoundedFarey(std::int64_t height) : height_(height), width_(2 * height + 1) {}

  std::size_t index(const Slope& s) const {
    return static_cast<std::size_t>(s.q * width_ + (s.p + height_));
  }
  std::size_t capacity() const { return static_cast<std::size_t>((height_ + 1) * width_); }

  template <class Fn>
  void for_each_neighbor(const Slope& v, Fn&& fn) const {
    std::int64_t x = 0, y = 0;
    ext_gcd(v.p, v.q, x, y);  // p*x + q*y = 1, so (r0, s0) = (-y, x) has p*s0 - q*r0 = 1
    const std::int64_t r0 = -y, s0 = x;
    std::int64_t lo = std::numeric_limits<std::int64_t>::min() / 4;
    std::int64_t hi = std::numeric_limits<std::int64_t>::max() / 4;
    const auto clamp_range = [&](std::int64_t base, std::int64_t step) {
      if (step == 0) {
        if (std::llabs(base) > height_) hi = lo - 1;
        return;
      }
      std::int64_t a = ceil_div(-height_ - base, step), b = floor_div(height_ - base, step);
      if (step < 0) {
        a = ceil_div(height_ - base, step);
        b = floor_div(-height_ - base, step);
      }
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    };
    clamp_range(r0, v.p);
    clamp_range(s0, v.q);
    for (std::int64_t k = lo; k <= hi; ++k) fn(make_slope(r0 + k * v.p, s0 + k * v.q));
  }

  std::vector<int> distances_from(const Slope& source, int max_depth) const {
    std::vector<int> dist(capacity(), -1);
    std::deque<Slope> queue;
    dist[index(source)] = 0;
    queue.push_back(source);
    while (!queue.empty()) {
      const Slope v = queue.front();
      queue.pop_front();
      const int d = dist[index(v)];
      if (d >= max_depth) continue;
      for_each_neighbor(v, [&](const Slope& w) {
        auto& slot = dist[index(w)];
        if (slot == -1) {
          slot = d + 1;
          queue.push_back(w);
        }
      });
    }
    return dist;
  }

  bool contains(const Slope& s) const { return std::llabs(s.p) <= height_ && s.q <= height_; }

 private:
  std::int64_t height_;
  std::int64_t width_;
};

}  // namespace

int farey_distance_bfs(const Slope& a_in, const Slope& b_in, std::int64_t height_bound, int max_depth) {
  const Slope a = make_slope(a_in.p, a_in.q);
  const Slope b = make_slope(b_in.p, b_in.q);
  const BoundedFarey graph(height_bound);
  if (!graph.contains(a) || !graph.contains(b)) throw std::domain_error("farey_distance_bfs: slope above height bound");
  return graph.distances_from(a, max_depth)[graph.index(b)];
}

std::vector<int> farey_bfs_all(const Slope& source, std::int64_t height_bound, const std::vector<Slope>& targets) {
  const BoundedFarey graph(height_bound);
  const auto dist = graph.distances_from(make_slope(source.p, source.q), std::numeric_limits<int>::max());
  std::vector<int> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back(dist[graph.index(make_slope(t.p, t.q))]);
  return out;
}

bool farey_self_test(std::int64_t bound) {
  static std::map<std::int64_t, bool> cache;
  static std::mutex lock;
  std::lock_guard guard(lock);
  if (auto it = cache.find(bound); it != cache.end()) return it->second;
  const auto slopes = slopes_up_to_height(bound);
  bool ok = true;
  for (const auto& a : slopes) {
    const auto reference = farey_bfs_all(a, 4 * bound, slopes);
    for (std::size_t j = 0; j < slopes.size() && ok; ++j) ok = reference[j] == farey_distance(a, slopes[j]);
    if (!ok) break;
  }
  cache[bound] = ok;
  return ok;
}

}  // namespace cgdist
