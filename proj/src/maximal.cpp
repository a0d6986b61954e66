#include "vlab/maximal.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

#include "vlab/exact_sum.hpp"
#include "vlab/simd.hpp"

namespace vlab {

namespace {

using Index = std::ptrdiff_t;

std::vector<double> abs_box(const GridFunction& f) {
  auto b = f.box_values();
  for (double& v : b) v = std::fabs(v);
  return b;
}

MaxOpResult collect(const GridFunction& f, const std::vector<double>& best,
                    const std::vector<Window>& win) {
  const auto& dom = f.domain();
  std::vector<double> vals;
  std::vector<Window> out;
  vals.reserve(dom.cell_count());
  out.reserve(dom.cell_count());
  for (std::size_t c : dom.cells()) {
    vals.push_back(best[c]);
    out.push_back(win[c]);
  }
  return {GridFunction(f.domain_ptr(), std::move(vals)), std::move(out)};
}

// ---------------------------------------------------------------------------
// Oracle

MaxOpResult oracle_1d(const GridFunction& f) {
  const auto b = abs_box(f);
  const Index n = static_cast<Index>(b.size());
  std::vector<double> best(b.size(), -1.0);
  std::vector<Window> win(b.size());
  for (Index a = 0; a < n; ++a) {
    ExactSum s;
    for (Index e = a; e < n; ++e) {
      s.add(b[e]);
      const auto len = static_cast<std::size_t>(e - a + 1);
      const double avg = s.value() / static_cast<double>(len);
      for (Index i = a; i <= e; ++i) {
        const Window& w = win[i];
        const bool better = avg > best[i] ||
                            (avg == best[i] && (len < w.size || (len == w.size && a < w.start[0])));
        if (better) {
          best[i] = avg;
          win[i] = {{a, 0}, len};
        }
      }
    }
  }
  return collect(f, best, win);
}

MaxOpResult oracle_2d(const GridFunction& f) {
  const auto b = abs_box(f);
  const Index nx = static_cast<Index>(f.domain().nx());
  const Index ny = static_cast<Index>(f.domain().ny());
  const Index kmax = std::max(nx, ny);
  std::vector<double> best(b.size(), -1.0);
  std::vector<Window> win(b.size());
  for (Index k = 1; k <= kmax; ++k) {
    const auto area = static_cast<double>(k * k);
    for (Index ay = -(k - 1); ay < ny; ++ay) {
      for (Index ax = -(k - 1); ax < nx; ++ax) {
        const Index x0 = std::max<Index>(ax, 0), x1 = std::min(ax + k, nx);
        const Index y0 = std::max<Index>(ay, 0), y1 = std::min(ay + k, ny);
        ExactSum s;
        for (Index y = y0; y < y1; ++y)
          for (Index x = x0; x < x1; ++x) s.add(b[y * nx + x]);
        const double avg = s.value() / area;
        for (Index y = y0; y < y1; ++y) {
          for (Index x = x0; x < x1; ++x) {
            const Index i = y * nx + x;
            const Window& w = win[i];
            const auto ks = static_cast<std::size_t>(k);
            bool better = avg > best[i];
            if (!better && avg == best[i]) {
              if (ks != w.size)
                better = ks < w.size;
              else if (ay != w.start[1])
                better = ay < w.start[1];
              else
                better = ax < w.start[0];
            }
            if (better) {
              best[i] = avg;
              win[i] = {{ax, ay}, ks};
            }
          }
        }
      }
    }
  }
  return collect(f, best, win);
}

// ---------------------------------------------------------------------------
// Fast path

// Maximum of vals over index windows [lo_i, hi_i] whose ends never decrease;
// ties resolve to the smallest index.
class SlidingMax {
 public:
  explicit SlidingMax(const std::vector<double>& vals) : vals_(vals) {}
  // Extends the window to include indices up to hi and drops those below lo.
  Index query(Index lo, Index hi) {
    for (; next_ <= hi; ++next_) {
      while (!dq_.empty() && vals_[dq_.back()] < vals_[next_]) dq_.pop_back();
      dq_.push_back(next_);
    }
    while (dq_.front() < lo) dq_.pop_front();
    return dq_.front();
  }

 private:
  const std::vector<double>& vals_;
  std::deque<Index> dq_;
  Index next_ = 0;
};

constexpr int kStartBits = 24;

MaxOpResult fast_1d(const GridFunction& f) {
  const auto b = abs_box(f);
  const Index n = static_cast<Index>(b.size());
  std::vector<ExactSum> prefix(b.size() + 1);
  for (Index i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i];
    prefix[i + 1].add(b[i]);
  }
  std::vector<double> best(b.size(), -1.0), cand(b.size());
  std::vector<std::int64_t> best_tag(b.size(), 0), cand_tag(b.size());
  std::vector<double> avg;
  for (Index len = 1; len <= n; ++len) {
    const Index count = n - len + 1;
    avg.resize(static_cast<std::size_t>(count));
    for (Index a = 0; a < count; ++a)
      avg[a] = (prefix[a + len] - prefix[a]).value() / static_cast<double>(len);
    SlidingMax window(avg);
    for (Index i = 0; i < n; ++i) {
      const Index a = window.query(std::max<Index>(0, i - len + 1), std::min(i, count - 1));
      cand[i] = avg[a];
      cand_tag[i] = (static_cast<std::int64_t>(len) << kStartBits) | a;
    }
    simd::promote_greater(best, best_tag, cand, cand_tag);
  }
  std::vector<Window> win(b.size());
  for (Index i = 0; i < n; ++i) {
    const std::int64_t t = best_tag[i];
    win[i] = {{static_cast<Index>(t & ((std::int64_t{1} << kStartBits) - 1)), 0},
              static_cast<std::size_t>(t >> kStartBits)};
  }
  return collect(f, best, win);
}

MaxOpResult fast_2d(const GridFunction& f) {
  const auto b = abs_box(f);
  const Index nx = static_cast<Index>(f.domain().nx());
  const Index ny = static_cast<Index>(f.domain().ny());
  const Index kmax = std::max(nx, ny);
  const Index sw = nx + 1;
  std::vector<ExactSum> sat(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (Index y = 0; y < ny; ++y) {
    ExactSum row;
    for (Index x = 0; x < nx; ++x) {
      row.add(b[y * nx + x]);
      sat[(y + 1) * sw + x + 1] = sat[y * sw + x + 1] + row;
    }
  }
  auto rect = [&](Index x0, Index x1, Index y0, Index y1) {
    ExactSum s = sat[y1 * sw + x1];
    s -= sat[y0 * sw + x1];
    s -= sat[y1 * sw + x0];
    s += sat[y0 * sw + x0];
    return s;
  };
  const std::size_t cells = b.size();
  std::vector<double> best(cells, -1.0), cand(cells);
  std::vector<std::int64_t> best_tag(cells, 0), cand_tag(cells);
  std::vector<double> avg, row_val, col;
  std::vector<Index> row_arg;
  for (Index k = 1; k <= kmax; ++k) {
    // Square positions shifted by k-1 so indices start at zero.
    const Index px = nx + k - 1, py = ny + k - 1;
    const auto area = static_cast<double>(k * k);
    avg.assign(static_cast<std::size_t>(px * py), 0.0);
    for (Index j = 0; j < py; ++j) {
      const Index ay = j - (k - 1);
      const Index y0 = std::max<Index>(ay, 0), y1 = std::min(ay + k, ny);
      for (Index i = 0; i < px; ++i) {
        const Index ax = i - (k - 1);
        const Index x0 = std::max<Index>(ax, 0), x1 = std::min(ax + k, nx);
        avg[j * px + i] = rect(x0, x1, y0, y1).value() / area;
      }
    }
    // Along x: best square start for each (row of starts, cell column).
    row_val.assign(static_cast<std::size_t>(py * nx), 0.0);
    row_arg.assign(static_cast<std::size_t>(py * nx), 0);
    std::vector<double> line(static_cast<std::size_t>(px));
    for (Index j = 0; j < py; ++j) {
      std::copy(avg.begin() + j * px, avg.begin() + (j + 1) * px, line.begin());
      SlidingMax sm(line);
      for (Index x = 0; x < nx; ++x) {
        const Index a = sm.query(x, x + k - 1);
        row_val[j * nx + x] = line[a];
        row_arg[j * nx + x] = a;
      }
    }
    // Along y.
    col.resize(static_cast<std::size_t>(py));
    for (Index x = 0; x < nx; ++x) {
      for (Index j = 0; j < py; ++j) col[j] = row_val[j * nx + x];
      SlidingMax sm(col);
      for (Index y = 0; y < ny; ++y) {
        const Index j = sm.query(y, y + k - 1);
        const Index c = y * nx + x;
        cand[c] = col[j];
        cand_tag[c] = (static_cast<std::int64_t>(k) << 40) | (static_cast<std::int64_t>(j) << 20) |
                      row_arg[j * nx + x];
      }
    }
    simd::promote_greater(best, best_tag, cand, cand_tag);
  }
  std::vector<Window> win(cells);
  constexpr std::int64_t kMask = (std::int64_t{1} << 20) - 1;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::int64_t t = best_tag[c];
    const auto k = static_cast<Index>(t >> 40);
    win[c] = {{(t & kMask) - (k - 1), ((t >> 20) & kMask) - (k - 1)}, static_cast<std::size_t>(k)};
  }
  return collect(f, best, win);
}

}  // namespace

MaxOpResult maximal_oracle(const GridFunction& f) {
  return f.domain().dim() == 1 ? oracle_1d(f) : oracle_2d(f);
}

MaxOpResult maximal_fast(const GridFunction& f) {
  if (f.domain().dim() == 1) {
    if (f.domain().nx() >= (std::size_t{1} << kStartBits))
      throw std::invalid_argument("grid too long for the maximal operator");
    return fast_1d(f);
  }
  if (f.domain().nx() >= (std::size_t{1} << 19) || f.domain().ny() >= (std::size_t{1} << 19))
    throw std::invalid_argument("grid too large for the maximal operator");
  return fast_2d(f);
}

GridFunction FourierModulus::apply(const GridFunction& f) const {
  const auto& dom = f.domain();
  const std::size_t nx = dom.nx(), ny = dom.ny();
  auto table = [](std::size_t n, std::vector<double>& c, std::vector<double>& s) {
    c.resize(n);
    s.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      c[m] = std::cos(t);
      s[m] = std::sin(t);
    }
  };
  std::vector<double> re = f.box_values(), im(re.size(), 0.0);
  std::vector<double> cx, sx;
  table(nx, cx, sx);
  std::vector<double> in_re(nx), in_im(nx), out_re(nx), out_im(nx);
  for (std::size_t y = 0; y < ny; ++y) {
    std::copy_n(re.begin() + y * nx, nx, in_re.begin());
    std::copy_n(im.begin() + y * nx, nx, in_im.begin());
    simd::dft(in_re, in_im, cx, sx, out_re, out_im);
    std::copy_n(out_re.begin(), nx, re.begin() + y * nx);
    std::copy_n(out_im.begin(), nx, im.begin() + y * nx);
  }
  if (dom.dim() == 2) {
    std::vector<double> cy, sy;
    table(ny, cy, sy);
    std::vector<double> a_re(ny), a_im(ny), b_re(ny), b_im(ny);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        a_re[y] = re[y * nx + x];
        a_im[y] = im[y * nx + x];
      }
      simd::dft(a_re, a_im, cy, sy, b_re, b_im);
      for (std::size_t y = 0; y < ny; ++y) {
        re[y * nx + x] = b_re[y];
        im[y * nx + x] = b_im[y];
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(nx * ny));
  std::vector<double> mod(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) mod[i] = std::hypot(re[i], im[i]) * scale;
  auto full = share(dom.with_mask(std::vector<std::uint8_t>(dom.box_size(), 1)));
  return GridFunction(std::move(full), std::move(mod));
}

GridFunction apply_operator(const Operator& t, const GridFunction& f) { return t.apply(f); }

}  // namespace vlab
