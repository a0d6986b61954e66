#include "vlab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace vlab {

namespace {

std::string fmt_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t cell_count_for(double a, double b, double h) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(h))
    throw GridError("domain bounds and cell size must be finite");
  if (!(h > 0)) throw GridError("cell size must be positive");
  if (!(a < b)) throw GridError("domain requires lo < hi");
  const double n = std::round((b - a) / h);
  if (n < 1) throw GridError("domain has zero cells");
  if (n > 1e9) throw GridError("domain has too many cells");
  return static_cast<std::size_t>(n);
}

}  // namespace

GridDomain::GridDomain(int dim, std::array<double, 2> origin, double h,
                       std::array<std::size_t, 2> counts,
                       std::vector<std::uint8_t> mask)
    : dim_(dim), origin_(origin), h_(h), counts_(counts), mask_(std::move(mask)) {
  if (dim_ != 1 && dim_ != 2) throw GridError("dimension must be 1 or 2");
  if (!(h_ > 0) || !std::isfinite(h_)) throw GridError("cell size must be positive and finite");
  if (dim_ == 1) {
    counts_[1] = 1;
    origin_[1] = 0.0;
  }
  if (counts_[0] < 1 || counts_[1] < 1) throw GridError("every axis needs at least one cell");
  if (mask_.size() != box_size()) throw GridError("mask size does not match cell counts");
  slots_.assign(mask_.size(), -1);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) {
      mask_[i] = 1;
      slots_[i] = static_cast<std::ptrdiff_t>(cells_.size());
      cells_.push_back(i);
    }
  }
}

double GridDomain::cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }

double GridDomain::measure() const {
  return cell_volume() * static_cast<double>(cells_.size());
}

std::array<double, 2> GridDomain::center(std::size_t box_index) const {
  const std::size_t ix = box_index % counts_[0];
  const std::size_t iy = box_index / counts_[0];
  std::array<double, 2> c{origin_[0] + (static_cast<double>(ix) + 0.5) * h_, 0.0};
  if (dim_ == 2) c[1] = origin_[1] + (static_cast<double>(iy) + 0.5) * h_;
  return c;
}

double GridDomain::center_norm(std::size_t box_index) const {
  const auto c = center(box_index);
  return dim_ == 1 ? std::fabs(c[0]) : std::hypot(c[0], c[1]);
}

bool GridDomain::same_grid(const GridDomain& other) const {
  return dim_ == other.dim_ && origin_ == other.origin_ && h_ == other.h_ &&
         counts_ == other.counts_;
}

bool GridDomain::operator==(const GridDomain& other) const {
  return same_grid(other) && mask_ == other.mask_;
}

GridDomain GridDomain::with_mask(std::vector<std::uint8_t> mask) const {
  return GridDomain(dim_, origin_, h_, counts_, std::move(mask));
}

GridFunction::GridFunction(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (!domain_) throw GridError("grid function needs a domain");
  if (values_.size() != domain_->cell_count())
    throw GridError("value count does not match masked cells");
  for (double v : values_)
    if (!std::isfinite(v)) throw GridError("grid function values must be finite");
}

double GridFunction::at_box(std::size_t box_index) const {
  const auto s = domain_->slot(box_index);
  return s < 0 ? 0.0 : values_[static_cast<std::size_t>(s)];
}

std::vector<double> GridFunction::box_values() const {
  std::vector<double> out(domain_->box_size(), 0.0);
  const auto cells = domain_->cells();
  for (std::size_t k = 0; k < cells.size(); ++k) out[cells[k]] = values_[k];
  return out;
}

GridFunction GridFunction::restrict_to(DomainPtr sub) const {
  if (!sub->same_grid(*domain_)) throw GridError("restriction needs the same grid");
  std::vector<double> out;
  out.reserve(sub->cell_count());
  for (std::size_t c : sub->cells()) out.push_back(at_box(c));
  return GridFunction(std::move(sub), std::move(out));
}

GridFunction GridFunction::scaled(double c) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= c;
  return GridFunction(domain_, std::move(out));
}

GridFunction GridFunction::abs() const {
  std::vector<double> out(values_);
  for (double& v : out) v = std::fabs(v);
  return GridFunction(domain_, std::move(out));
}

ExponentField::ExponentField(GridFunction values) : values_(std::move(values)) {
  const auto cells = values_.domain().cells();
  const auto v = values_.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] >= 1.0)) {
      const auto c = values_.domain().center(cells[k]);
      throw GridError("exponent below 1 at x = " + fmt_exact(c[0]) +
                      (values_.domain().dim() == 2 ? ", " + fmt_exact(c[1]) : std::string()));
    }
  }
}

ExponentField ExponentField::restrict_to(DomainPtr sub) const {
  for (std::size_t c : sub->cells())
    if (!values_.domain().contains(c)) throw GridError("exponent undefined on part of the region");
  return ExponentField(values_.restrict_to(std::move(sub)));
}

GridDomain make_interval(double a, double b, double h) {
  const std::size_t n = cell_count_for(a, b, h);
  return GridDomain(1, {a, 0.0}, h, {n, 1}, std::vector<std::uint8_t>(n, 1));
}

GridDomain make_box(std::array<double, 2> lo, std::array<double, 2> hi, double h) {
  const std::size_t nx = cell_count_for(lo[0], hi[0], h);
  const std::size_t ny = cell_count_for(lo[1], hi[1], h);
  return GridDomain(2, lo, h, {nx, ny}, std::vector<std::uint8_t>(nx * ny, 1));
}

DomainPtr share(GridDomain d) { return std::make_shared<const GridDomain>(std::move(d)); }

GridDomain tail_restrict(const GridDomain& dom, double radius) {
  if (!(radius >= 0)) throw GridError("radius must be non-negative");
  return restrict_mask(dom, [&](std::size_t c) { return dom.center_norm(c) > radius; });
}

GridDomain ball_restrict(const GridDomain& dom, double radius) {
  if (!(radius >= 0)) throw GridError("radius must be non-negative");
  return restrict_mask(dom, [&](std::size_t c) { return dom.center_norm(c) <= radius; });
}

double measure(const GridDomain& dom) { return dom.measure(); }

GridDomain restrict_mask(const GridDomain& dom, const std::function<bool(std::size_t)>& keep) {
  std::vector<std::uint8_t> mask(dom.box_size(), 0);
  for (std::size_t c : dom.cells()) mask[c] = keep(c) ? 1 : 0;
  return dom.with_mask(std::move(mask));
}

GridDomain restrict_mask(const GridFunction& f, const std::function<bool(double)>& pred) {
  const auto& dom = f.domain();
  return restrict_mask(dom, [&](std::size_t c) {
    return pred(f[static_cast<std::size_t>(dom.slot(c))]);
  });
}

TruncationSchedule TruncationSchedule::geometric(double r0, int k_max) {
  if (!(r0 > 0) || !std::isfinite(r0)) throw GridError("schedule base radius must be positive");
  if (k_max < 0) throw GridError("schedule needs at least one radius");
  TruncationSchedule s;
  for (int k = 0; k <= k_max; ++k) s.radii.push_back(std::ldexp(r0, k));
  return s;
}

void TruncationSchedule::validate() const {
  if (radii.empty()) throw GridError("schedule is empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || radii[i] < 0) throw GridError("schedule radii must be finite and >= 0");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw GridError("schedule radii must be strictly increasing");
  }
}

std::string serialize(const GridDomain& dom) {
  std::ostringstream out;
  out << "grid-domain 1\n";
  out << "dim " << dom.dim() << "\n";
  out << "origin " << fmt_exact(dom.origin()[0]);
  if (dom.dim() == 2) out << " " << fmt_exact(dom.origin()[1]);
  out << "\nh " << fmt_exact(dom.h()) << "\n";
  out << "counts " << dom.nx();
  if (dom.dim() == 2) out << " " << dom.ny();
  out << "\nmask";
  const auto mask = dom.mask();
  // First run counts masked-out cells (possibly zero), then runs alternate.
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (std::uint8_t m : mask) {
    if (m == current) {
      ++run;
    } else {
      out << " " << run;
      current = m;
      run = 1;
    }
  }
  out << " " << run << "\n";
  return out.str();
}

GridDomain parse_domain(const std::string& text) {
  std::istringstream in(text);
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "grid-domain" || version != 1)
    throw GridError("not a grid-domain record");
  int dim = 0;
  std::array<double, 2> origin{0, 0};
  double h = 0;
  std::array<std::size_t, 2> counts{1, 1};
  std::vector<std::uint8_t> mask;
  auto read_double = [&](double& out) {
    std::string tok;
    if (!(in >> tok)) throw GridError("truncated grid-domain record");
    std::size_t used = 0;
    out = std::stod(tok, &used);
    if (used != tok.size()) throw GridError("bad number '" + tok + "'");
  };
  if (!(in >> key) || key != "dim" || !(in >> dim) || (dim != 1 && dim != 2))
    throw GridError("grid-domain record: bad dim");
  if (!(in >> key) || key != "origin") throw GridError("grid-domain record: expected origin");
  for (int i = 0; i < dim; ++i) read_double(origin[i]);
  if (!(in >> key) || key != "h") throw GridError("grid-domain record: expected h");
  read_double(h);
  if (!(in >> key) || key != "counts") throw GridError("grid-domain record: expected counts");
  for (int i = 0; i < dim; ++i)
    if (!(in >> counts[i])) throw GridError("grid-domain record: bad counts");
  if (!(in >> key) || key != "mask") throw GridError("grid-domain record: expected mask");
  const std::size_t total = counts[0] * counts[1];
  std::uint8_t current = 0;
  std::size_t run = 0;
  while (in >> run) {
    if (mask.size() + run > total) throw GridError("grid-domain record: mask overruns grid");
    mask.insert(mask.end(), run, current);
    current ^= 1;
  }
  if (mask.size() != total) throw GridError("grid-domain record: mask does not cover grid");
  return GridDomain(dim, origin, h, counts, std::move(mask));
}

}  // namespace vlab
