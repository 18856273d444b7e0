#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "catmouse/chain.hpp"
#include "catmouse/stats.hpp"

namespace catmouse {

namespace lattice {

inline constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

// Exact sampler for T1, the first passage time from 1 to 0 of the simple
// random walk, by inversion of P(T1 > 2k-1) = C(2k,k)/4^k.
class FirstPassage {
 public:
  static const FirstPassage& instance();

  // P(T1 > 2k - 1) = P(T1 > 2k).
  double survival(std::uint64_t k) const;

  // T1 if T1 <= cap, else kNone.
  std::uint64_t sample(Stream& rng, std::uint64_t cap) const;

  // T1 + T1' (hitting 0 from 2) if <= cap, else kNone.
  std::uint64_t sample_t2(Stream& rng, std::uint64_t cap) const;

 private:
  FirstPassage();
  static constexpr std::uint64_t kTable = std::uint64_t{1} << 16;
  std::vector<double> table_;  // survival(k), k <= kTable
};

struct Mouse1D {
  std::uint64_t kappa = 0;     // mouse moves before time n
  std::int64_t position = 0;   // M_n
  std::uint64_t meetings = 0;  // completed cycles by time n
};

// Exact M_n for the pair on Z from (0,0): cycles are a Geom(1/2) together
// phase followed by T2; the mouse makes kappa fair +-1 steps.
Mouse1D sample_mouse_1d(std::uint64_t n, Stream& rng);

// Same quantity by stepping the pair chain.
Mouse1D brute_force_mouse_1d(std::uint64_t n, Stream& rng);

// Renewal count of (2 + T2) cycles completed by each time in `times`.
std::vector<std::uint64_t> renewal_counts(const std::vector<std::uint64_t>& times, Stream& rng);

// samples[g][r] = u_{floor(n t_g)} / sqrt(n) for replica r.
std::vector<std::vector<double>> meeting_counter(std::uint64_t n, const std::vector<double>& t_grid,
                                                 std::size_t replicas, std::uint64_t seed,
                                                 unsigned workers = 1);

// M_{floor(n t)} / n^{1/4} from C0 = M0 = 0.
std::vector<double> scaling_1d(std::uint64_t n, double t, std::size_t replicas, std::uint64_t seed,
                               unsigned workers = 1);

struct GfCheck {
  double u = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double exact = 0.0;
  Verdict verdict;
};

inline double t1_generating_function(double u) { return (1.0 - std::sqrt(1.0 - u * u)) / u; }

// Monte Carlo E(u^T1) by stepping the walk; paths are cut once u^t < 1e-18.
GfCheck hitting_gf_check(double u, std::size_t samples, Stream& rng);

// ---------------------------------------------------------------------------
// Return kernel of the plane walk to the unit vectors E = {e1, e-1, e2, e-2}.

struct ReturnKernel {
  double same = 0.0;
  double opposite = 0.0;
  double perp = 0.0;  // each of the two orthogonal unit vectors
  double sum() const { return same + opposite + 2.0 * perp; }
};

// phi(x) = P_x(first visit to E is at e1), harmonic off E, 1/4 on the box boundary.
struct DirichletSolution {
  int radius = 0;
  std::vector<double> phi;  // rows x2 = 0..R, columns x1 = -R..R; x2 < 0 by mirror
  ReturnKernel r;
  double residual = 0.0;
  int sweeps = 0;
  std::vector<double> residual_history;  // one entry per checkpoint
  int checkpoint_every = 0;
  double phi_at(int x1, int x2) const;
  double r_same() const { return r.same; }
  double r_opposite() const { return r.opposite; }
  double r_perp() const { return r.perp; }
};

DirichletSolution solve_dirichlet(int radius, double tol = 1e-13, int max_sweeps = 400000,
                                  int checkpoint_every = 100);

// Harmonic residual max |phi - mean of neighbours| off E inside the box.
double harmonic_residual(const DirichletSolution& s);

// Two-radius extrapolation assuming an O(1/R^2) truncation error; b has twice a's radius.
ReturnKernel richardson(const DirichletSolution& a, const DirichletSolution& b);

struct ReturnKernelMc {
  ReturnKernel estimate;
  ReturnKernel se;
  std::uint64_t excursions = 0;
  std::uint64_t exits = 0;
  std::uint64_t steps = 0;
  int stop_radius = 0;
};

// Excursions from e1 until the next visit to E; an excursion reaching the box
// boundary is credited 1/4 to each unit vector, like the Dirichlet boundary value.
ReturnKernelMc return_kernel_mc(std::size_t excursions, int stop_radius, std::uint64_t seed,
                                unsigned workers = 1);

// Relative-position chain on E x E.
struct RelativeChain {
  FiniteChain kernel;
  Measure mu_R;
  double diag_mass = 0.0;
  double alpha0() const;
};

// Index of a unit vector: e1, e-1, e2, e-2 -> 0..3.
int unit_index(Point2 e);
Point2 unit_vector(int index);

RelativeChain build_relative_chain(const ReturnKernel& r);

struct DiagMassMc {
  double estimate = 0.0;
  double se = 0.0;
  std::uint64_t meetings = 0;
  std::uint64_t visits = 0;
  std::uint64_t exits = 0;
  std::uint64_t steps = 0;
};

// Pair simulation recording the relative positions at every visit of the cat
// to the current frame's unit vectors; diag mass = meetings / visits.
DiagMassMc relative_visits_mc(std::size_t meetings, int stop_radius, std::uint64_t seed,
                              unsigned workers = 1);

struct Mouse2D {
  std::uint64_t kappa = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::uint64_t meetings = 0;
};

// Exact M_N for the plane pair from (0,0). In rotated coordinates the
// separation is two independent 1D walks and a meeting is their first common
// zero, found by merging the two zero sets.
Mouse2D sample_mouse_2d(std::uint64_t N, Stream& rng);

Mouse2D brute_force_mouse_2d(std::uint64_t N, Stream& rng);

// First coordinate of M_{floor(e^{n t})} / sqrt(n).
std::vector<double> scaling_2d_marginal(double n, double t, std::size_t replicas, std::uint64_t seed,
                                        unsigned workers = 1);

}  // namespace lattice
}  // namespace catmouse
