#pragma once

#include <optional>

#include "freeprod/fock.hpp"
#include "freeprod/symmetric_fock.hpp"

namespace freeprod {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// a·b = a0 b0 - a1 b1
double lorentz_dot(const Vec2& a, const Vec2& b);

// p_m(theta) = (m cosh theta, m sinh theta)
Vec2 mass_shell(double m, double theta);

/// Gaussian test function
///   f(a) = exp(-(a-c)^T W^{-1} (a-c) / 2) e^{-i pbar·(a-c)},
/// or, with `real`, the cosine superposition of the +pbar and -pbar packets.
/// `time` applies the free evolution f -> f_t in momentum space.
struct WavePacket2D {
  double mass = 1.0;
  Vec2 center = Vec2::Zero();
  Mat2 width = Mat2::Identity();
  Vec2 momentum = Vec2::Zero();
  bool real = false;
  double time = 0.0;

  void validate() const;
  // Packet with on-shell modulation at rapidity theta.
  static WavePacket2D on_shell(double mass, double theta, double spread, Vec2 center = Vec2::Zero());
  WavePacket2D translated(const Vec2& a) const;
  WavePacket2D evolved(double t) const;

  // f(a) in position space.
  cplx value(const Vec2& a) const;
  // (1/2pi) ∫ d^2a e^{i p·a} f(a), closed form.
  cplx fourier(const Vec2& p) const;
};

inline constexpr double kSupportTolerance = 1e-3;
inline constexpr double kEdgeMassTolerance = 1e-6;

struct RapidityFunction {
  RapidityGrid grid;
  Vec values;
  double support_min = 0.0;  // where |value| > kSupportTolerance · max
  double support_max = 0.0;
  double edge_mass = 0.0;    // fraction of L^2 mass on the outer 5% of the grid at each end

  double norm() const;
};

// f^±(theta) = f~(±p_m(theta)). Throws Truncation when the edge mass exceeds 1e-6.
RapidityFunction rapidity_transform(const WavePacket2D& f, int sign, const RapidityGrid& grid = {});

struct VelocityInterval {
  double min = 0.0;
  double max = 0.0;
};

inline constexpr double kVelocityThreshold = 1e-3;

/// Velocities p1/omega(p) over {p : |f~(p)| > threshold · max |f~|}. For the
/// Gaussian this set is an ellipse, so the interval is exact; cosine packets
/// use the union over both modulations.
VelocityInterval velocity_support(const WavePacket2D& f, double threshold = kVelocityThreshold);

// Γ(g) ≺ Γ(f): min velocity of f strictly above max velocity of g.
bool precedes(const WavePacket2D& g, const WavePacket2D& f, double threshold = kVelocityThreshold);

// phi(f) Psi = z†(f+) Psi + z(J f-) Psi with (J psi)(theta) = conj psi(theta).
FockState apply_field(const SymmetricFock& fock, const RapidityFunction& f_plus,
                      const RapidityFunction& f_minus, const FockState& psi);

enum class Direction { In, Out };

/// Two-particle amplitude psi(theta1, theta2) on the grid, rows indexed by
/// theta1. Cross sectors sit in H°_first ⊗ H°_second; a diagonal state sits
/// in the two-particle space of a single copy.
struct TwoParticleState {
  Label first = 1;
  Label second = 2;
  bool diagonal = false;
  RapidityGrid grid;
  Mat amplitude;
  double mass_below = 0.0;  // fraction of ||psi||^2 on theta1 < theta2
  double mass_above = 0.0;  // fraction on theta1 > theta2

  double norm() const;
  cplx inner(const TwoParticleState& other) const;  // zero across different sectors
};

// Fills mass_below / mass_above from the amplitude.
void update_masses(TwoParticleState& s);

/// out: phi'_{k'}(g) phi_k(f) Omega = f+ ⊗ g+ in sector (k, k');
/// in:  phi_{k'}(g) phi'_k(f) Omega = g+ ⊗ f+ in sector (k', k).
/// For k = k' both are the two-particle component of z†(g+) z†(f+) Omega.
/// Requires precedes(g, f).
TwoParticleState scattering_state(Direction direction, Label k, Label k_prime, const WavePacket2D& f,
                                  const WavePacket2D& g, const RapidityGrid& grid = {});

/// Same state evaluated through lambda and rho on a free product of two
/// single-copy spaces C·Omega ⊕ (one-particle grid space), with max_len 2.
/// Coordinates are sqrt(w)-scaled so the Euclidean product is the grid product.
struct DirectTwoParticle {
  Vec fock_vector;
  Word sector;
  bool exact = true;
  double residual = 0.0;  // against scattering_state, same scaling
};

DirectTwoParticle direct_scattering_state(Direction direction, Label k, Label k_prime,
                                          const WavePacket2D& f, const WavePacket2D& g,
                                          const RapidityGrid& grid);

inline constexpr double kSupportConditionTolerance = 1e-3;

// Out-representative -> in-representative: psi(theta1, theta2) -> psi(theta2, theta1)
// with the sector swapped; identity on diagonal states.
TwoParticleState smatrix_apply(const TwoParticleState& state,
                               double tol = kSupportConditionTolerance);
TwoParticleState smatrix_inverse(const TwoParticleState& state,
                                 double tol = kSupportConditionTolerance);

// Fraction of the L^2 mass of f+ ⊗ g+ on theta1 < theta2. Requires precedes(g, f).
double support_condition_check(const WavePacket2D& f, const WavePacket2D& g,
                               const RapidityGrid& grid = {});

}  // namespace freeprod
