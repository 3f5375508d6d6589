#include "freeprod/smatrix.hpp"

#include <algorithm>
#include <cmath>

namespace freeprod {

namespace {

const Mat2& eta() {
  static const Mat2 m = (Mat2() << 1.0, 0.0, 0.0, -1.0).finished();
  return m;
}

cplx gaussian_fourier(const WavePacket2D& f, const Vec2& p, const Vec2& pbar) {
  const Vec2 k = eta() * (p - pbar);
  const double quad = k.dot(f.width * k);
  return std::sqrt(f.width.determinant()) * std::exp(cplx(-0.5 * quad, lorentz_dot(p, f.center)));
}

VelocityInterval gaussian_velocity(const WavePacket2D& f, const Vec2& pbar, double threshold) {
  const double r = std::sqrt(2.0 * std::log(1.0 / threshold));
  const double half = r * std::sqrt(f.width.inverse()(1, 1));
  auto v = [&](double p1) { return p1 / std::sqrt(p1 * p1 + f.mass * f.mass); };
  return {v(pbar(1) - half), v(pbar(1) + half)};
}

double weighted_mass(const Eigen::VectorXd& w, const Vec& v) {
  return (w.array() * v.cwiseAbs2().array()).sum();
}

}  // namespace

double lorentz_dot(const Vec2& a, const Vec2& b) { return a(0) * b(0) - a(1) * b(1); }

Vec2 mass_shell(double m, double theta) { return Vec2(m * std::cosh(theta), m * std::sinh(theta)); }

void WavePacket2D::validate() const {
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "wave packet: mass must be positive");
  if ((width - width.transpose()).norm() > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "wave packet: width matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(width);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "wave packet: width matrix must be positive definite");
}

WavePacket2D WavePacket2D::on_shell(double mass, double theta, double spread, Vec2 center) {
  WavePacket2D f;
  f.mass = mass;
  f.center = center;
  f.width = spread * spread * Mat2::Identity();
  f.momentum = mass_shell(mass, theta);
  f.validate();
  return f;
}

WavePacket2D WavePacket2D::translated(const Vec2& a) const {
  WavePacket2D f = *this;
  f.center += a;
  return f;
}

WavePacket2D WavePacket2D::evolved(double t) const {
  WavePacket2D f = *this;
  f.time += t;
  return f;
}

cplx WavePacket2D::value(const Vec2& a) const {
  if (time != 0.0)
    throw Error(ErrorCode::InvalidArgument, "wave packet: position values are only available at time 0");
  const Vec2 u = a - center;
  const double envelope = std::exp(-0.5 * u.dot(width.inverse() * u));
  const double phase = lorentz_dot(momentum, u);
  if (real) return envelope * std::cos(phase);
  return envelope * std::exp(cplx(0.0, -phase));
}

cplx WavePacket2D::fourier(const Vec2& p) const {
  cplx v = gaussian_fourier(*this, p, momentum);
  if (real) v = 0.5 * (v + gaussian_fourier(*this, p, -momentum));
  if (time != 0.0) {
    const double omega = std::sqrt(p(1) * p(1) + mass * mass);
    v *= std::exp(cplx(0.0, (p(0) - omega) * time));
  }
  return v;
}

double RapidityFunction::norm() const { return std::sqrt(std::abs(grid_inner(grid, values, values))); }

RapidityFunction rapidity_transform(const WavePacket2D& f, int sign, const RapidityGrid& grid) {
  f.validate();
  grid.validate();
  if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "rapidity_transform: sign must be +1 or -1");
  RapidityFunction r;
  r.grid = grid;
  r.values.resize(grid.points);
  for (int k = 0; k < grid.points; ++k)
    r.values(k) = f.fourier(static_cast<double>(sign) * mass_shell(f.mass, grid.theta(k)));

  const Eigen::VectorXd abs = r.values.cwiseAbs();
  const double peak = abs.maxCoeff();
  r.support_min = r.support_max = grid.theta(0);
  bool found = false;
  for (int k = 0; k < grid.points; ++k)
    if (abs(k) > kSupportTolerance * peak) {
      if (!found) r.support_min = grid.theta(k);
      r.support_max = grid.theta(k);
      found = true;
    }

  const Eigen::VectorXd w = grid.weights();
  const double total = weighted_mass(w, r.values);
  const int edge = std::max(1, grid.points / 20);
  const double outer = weighted_mass(w.head(edge), r.values.head(edge)) +
                       weighted_mass(w.tail(edge), r.values.tail(edge));
  r.edge_mass = total > 0.0 ? outer / total : 0.0;
  // functions that vanish to working precision carry no rapidity content to lose
  if (peak > 1e-12 * std::sqrt(f.width.determinant()) && r.edge_mass > kEdgeMassTolerance)
    throw Error(ErrorCode::Truncation, "rapidity_transform: edge mass " + std::to_string(r.edge_mass) +
                                           " exceeds 1e-6, widen the grid");
  return r;
}

VelocityInterval velocity_support(const WavePacket2D& f, double threshold) {
  f.validate();
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorCode::InvalidArgument, "velocity_support: threshold must lie in (0, 1)");
  VelocityInterval v = gaussian_velocity(f, f.momentum, threshold);
  if (f.real) {
    const VelocityInterval w = gaussian_velocity(f, -f.momentum, threshold);
    v.min = std::min(v.min, w.min);
    v.max = std::max(v.max, w.max);
  }
  return v;
}

bool precedes(const WavePacket2D& g, const WavePacket2D& f, double threshold) {
  return velocity_support(f, threshold).min > velocity_support(g, threshold).max;
}

FockState apply_field(const SymmetricFock& fock, const RapidityFunction& f_plus,
                      const RapidityFunction& f_minus, const FockState& psi) {
  const FockState created = fock.create(f_plus.values, psi);
  const FockState annihilated = fock.annihilate(f_minus.values.conjugate(), psi);
  return fock.add(created, annihilated);
}

double TwoParticleState::norm() const { return std::sqrt(std::abs(inner(*this))); }

cplx TwoParticleState::inner(const TwoParticleState& other) const {
  if (first != other.first || second != other.second || diagonal != other.diagonal) return 0.0;
  if (amplitude.rows() != other.amplitude.rows() || amplitude.cols() != other.amplitude.cols())
    throw Error(ErrorCode::InvalidArgument, "two-particle inner product: grids differ");
  const Eigen::VectorXd w = grid.weights();
  const Mat ww = (w * w.transpose()).cast<cplx>();
  return (amplitude.conjugate().cwiseProduct(other.amplitude).cwiseProduct(ww)).sum();
}

void update_masses(TwoParticleState& s) {
  const Eigen::VectorXd w = s.grid.weights();
  double total = 0.0, below = 0.0, above = 0.0;
  for (Eigen::Index j = 0; j < s.amplitude.cols(); ++j)
    for (Eigen::Index i = 0; i < s.amplitude.rows(); ++i) {
      const double m = w(i) * w(j) * std::norm(s.amplitude(i, j));
      total += m;
      if (i < j) below += m;
      if (i > j) above += m;
    }
  s.mass_below = total > 0.0 ? below / total : 0.0;
  s.mass_above = total > 0.0 ? above / total : 0.0;
}

TwoParticleState scattering_state(Direction direction, Label k, Label k_prime, const WavePacket2D& f,
                                  const WavePacket2D& g, const RapidityGrid& grid) {
  if (!precedes(g, f))
    throw Error(ErrorCode::DomainViolation,
                "scattering_state: velocity support of g does not precede that of f");
  const Vec fp = rapidity_transform(f, 1, grid).values;
  const Vec gp = rapidity_transform(g, 1, grid).values;

  TwoParticleState s;
  s.grid = grid;
  if (k == k_prime) {
    const SymmetricFock fock(grid, 2);
    const FockState two = fock.create(gp, fock.create(fp, fock.vacuum()));
    s.first = s.second = k;
    s.diagonal = true;
    // row-major (theta1 most significant) storage read as column-major is the transpose
    s.amplitude = Eigen::Map<const Mat>(two.components[2].data(), grid.points, grid.points).transpose();
  } else if (direction == Direction::Out) {
    s.first = k;
    s.second = k_prime;
    s.amplitude = fp * gp.transpose();
  } else {
    s.first = k_prime;
    s.second = k;
    s.amplitude = gp * fp.transpose();
  }
  update_masses(s);
  return s;
}

DirectTwoParticle direct_scattering_state(Direction direction, Label k, Label k_prime,
                                          const WavePacket2D& f, const WavePacket2D& g,
                                          const RapidityGrid& grid) {
  if (k == k_prime)
    throw Error(ErrorCode::InvalidArgument, "direct_scattering_state: needs two different copies");
  const TwoParticleState expected = scattering_state(direction, k, k_prime, f, g, grid);

  const int n = grid.points;
  const Eigen::VectorXd sqrt_w = grid.weights().cwiseSqrt();
  // phi(h) restricted to C·Omega ⊕ one-particle space
  auto field = [&](const WavePacket2D& h) {
    const Vec plus = rapidity_transform(h, 1, grid).values;
    const Vec minus = rapidity_transform(h, -1, grid).values;
    Mat m = Mat::Zero(n + 1, n + 1);
    m.block(1, 0, n, 1) = sqrt_w.cast<cplx>().cwiseProduct(plus);
    m.block(0, 1, 1, n) = sqrt_w.cast<cplx>().cwiseProduct(minus).transpose();
    return m;
  };
  const Mat phi_f = field(f), phi_g = field(g);

  const FockSpace fock({SeedSpace::standard(k, n + 1), SeedSpace::standard(k_prime, n + 1)}, 2);
  const Vec omega = fock.vacuum();
  Applied first, second;
  DirectTwoParticle out;
  if (direction == Direction::Out) {
    first = lambda_act(fock, k, phi_f, omega);
    second = rho_act(fock, k_prime, phi_g, first.vector);
    out.sector = {k, k_prime};
  } else {
    first = rho_act(fock, k, phi_f, omega);
    second = lambda_act(fock, k_prime, phi_g, first.vector);
    out.sector = {k_prime, k};
  }
  out.fock_vector = std::move(second.vector);
  out.exact = first.exact && second.exact;

  // expected amplitude in sqrt(w)-scaled coordinates, first letter most significant
  const Mat scaled = sqrt_w.asDiagonal() * expected.amplitude * sqrt_w.asDiagonal();
  Vec reference = Vec::Zero(out.fock_vector.size());
  const Sector& sec = fock.sector(out.sector);
  const Mat row_major = scaled.transpose();
  reference.segment(static_cast<Eigen::Index>(sec.offset), static_cast<Eigen::Index>(sec.dim)) =
      Eigen::Map<const Vec>(row_major.data(), row_major.size());
  out.residual = (out.fock_vector - reference).norm();
  return out;
}

TwoParticleState smatrix_apply(const TwoParticleState& state, double tol) {
  if (state.diagonal) return state;
  if (state.mass_below > tol)
    throw Error(ErrorCode::DomainViolation,
                "smatrix_apply: " + std::to_string(state.mass_below) +
                    " of the mass lies on theta1 < theta2, not an out-state");
  TwoParticleState out = state;
  out.first = state.second;
  out.second = state.first;
  out.amplitude = state.amplitude.transpose();
  update_masses(out);
  return out;
}

TwoParticleState smatrix_inverse(const TwoParticleState& state, double tol) {
  if (state.diagonal) return state;
  if (state.mass_above > tol)
    throw Error(ErrorCode::DomainViolation,
                "smatrix_inverse: " + std::to_string(state.mass_above) +
                    " of the mass lies on theta1 > theta2, not an in-state");
  TwoParticleState out = state;
  out.first = state.second;
  out.second = state.first;
  out.amplitude = state.amplitude.transpose();
  update_masses(out);
  return out;
}

double support_condition_check(const WavePacket2D& f, const WavePacket2D& g, const RapidityGrid& grid) {
  if (!precedes(g, f))
    throw Error(ErrorCode::DomainViolation,
                "support_condition_check: velocity support of g does not precede that of f");
  const Eigen::VectorXd w = grid.weights();
  const Eigen::VectorXd a = w.cwiseProduct(rapidity_transform(f, 1, grid).values.cwiseAbs2());
  const Eigen::VectorXd b = w.cwiseProduct(rapidity_transform(g, 1, grid).values.cwiseAbs2());
  const double total = a.sum() * b.sum();
  if (!(total > 0.0)) return 0.0;
  // sum_{i<j} a_i b_j with a running suffix sum of b
  double below = 0.0, suffix = 0.0;
  for (Eigen::Index i = a.size() - 1; i >= 0; --i) {
    below += a(i) * suffix;
    suffix += b(i);
  }
  return below / total;
}

}  // namespace freeprod
